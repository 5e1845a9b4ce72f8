"""Accuracy and domain-gap metrics (RBF-MMD, Fréchet distance)."""

from typing import Optional, Sequence, Union

import numpy as np
import torch
from scipy import linalg
from scipy.spatial.distance import cdist, pdist

from ..common.errors import EmptyInputError, NumericError, ParameterError, PreconditionError, ShapeError

ArrayLike = Union[np.ndarray, torch.Tensor, Sequence[Sequence[float]]]

COV_REGULARIZER = 1e-6


def _as_array(x: ArrayLike) -> np.ndarray:
    if isinstance(x, torch.Tensor):
        x = x.detach().cpu().numpy()
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    return arr


def top1_accuracy(predictions: Sequence[int], labels: Sequence[int]) -> float:
    """Fraction of exact matches."""
    if len(predictions) != len(labels):
        raise ShapeError(f"{len(predictions)} predictions for {len(labels)} labels")
    if not labels:
        raise EmptyInputError("accuracy of an empty set")
    return sum(int(p) == int(y) for p, y in zip(predictions, labels)) / len(labels)


def median_bandwidth(x: ArrayLike, y: ArrayLike) -> float:
    """Median pairwise Euclidean distance over the pooled sample (1.0 if degenerate)."""
    pooled = np.vstack([_as_array(x), _as_array(y)])
    if len(pooled) < 2:
        return 1.0
    median = float(np.median(pdist(pooled)))
    return median if median > 0.0 else 1.0


def mmd_rbf(x: ArrayLike, y: ArrayLike, bandwidth: Optional[float] = None) -> float:
    """
    Biased RBF maximum mean discrepancy.

    Args:
        x: n x d sample
        y: m x d sample
        bandwidth: Kernel width sigma; median heuristic when None

    Returns:
        ``sqrt(max(0, mean k(x,x) + mean k(y,y) - 2 mean k(x,y)))``
    """
    x, y = _as_array(x), _as_array(y)
    if len(x) == 0 or len(y) == 0:
        raise EmptyInputError("mmd_rbf needs non-empty samples")
    if x.shape[1] != y.shape[1]:
        raise ShapeError(f"mmd_rbf dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    if bandwidth is None:
        bandwidth = median_bandwidth(x, y)
    if bandwidth <= 0.0:
        raise ParameterError(f"bandwidth must be positive, got {bandwidth}")

    def kernel(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.exp(-cdist(a, b, "sqeuclidean") / (2.0 * bandwidth**2))

    mmd2 = kernel(x, x).mean() + kernel(y, y).mean() - 2.0 * kernel(x, y).mean()
    return float(np.sqrt(max(0.0, mmd2)))


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    values, vectors = linalg.eigh(m)
    return (vectors * np.sqrt(np.clip(values, 0.0, None))) @ vectors.T


def frechet_distance(x: ArrayLike, y: ArrayLike) -> float:
    """
    Fréchet distance between Gaussian fits of two samples.

    Covariances get ``1e-6 * I``; the trace of ``(S_x S_y)^(1/2)`` comes from the
    eigenvalues of the symmetric ``S_x^(1/2) S_y S_x^(1/2)``.

    Args:
        x: n x d sample, n >= 2
        y: m x d sample, m >= 2

    Returns:
        Non-negative distance
    """
    x, y = _as_array(x), _as_array(y)
    if len(x) < 2 or len(y) < 2:
        raise PreconditionError("frechet_distance needs at least two samples per set")
    if x.shape[1] != y.shape[1]:
        raise ShapeError(f"frechet_distance dimension mismatch: {x.shape[1]} vs {y.shape[1]}")

    d = x.shape[1]
    eye = COV_REGULARIZER * np.eye(d)
    cov_x = np.atleast_2d(np.cov(x, rowvar=False)) + eye
    cov_y = np.atleast_2d(np.cov(y, rowvar=False)) + eye
    diff = x.mean(axis=0) - y.mean(axis=0)

    root_x = _psd_sqrt(cov_x)
    product = root_x @ cov_y @ root_x
    product = 0.5 * (product + product.T)
    values = linalg.eigh(product, eigvals_only=True)
    if values.min() < -1e-8 * max(1.0, float(np.abs(values).max())):
        raise NumericError("covariance product is not positive semi-definite")
    trace_sqrt = float(np.sqrt(np.clip(values, 0.0, None)).sum())

    distance = float(diff @ diff + np.trace(cov_x) + np.trace(cov_y) - 2.0 * trace_sqrt)
    return max(0.0, distance)
