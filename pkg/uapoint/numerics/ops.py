"""Softmax and cosine primitives on float64 tensors."""

from typing import Sequence, Union

import numpy as np
import torch
import torch.nn.functional as F

from ..common.errors import DegenerateInputError, NonFiniteInputError, ParameterError, ShapeError

DTYPE = torch.float64

TensorLike = Union[torch.Tensor, np.ndarray, Sequence[float], Sequence[Sequence[float]]]


def as_tensor(x: TensorLike) -> torch.Tensor:
    """Convert array-likes to float64 tensors; tensors keep their graph."""
    if isinstance(x, torch.Tensor):
        return x if x.dtype == DTYPE else x.to(DTYPE)
    return torch.as_tensor(np.asarray(x, dtype=np.float64), dtype=DTYPE)


def softmax(
    logits: TensorLike,
    temperature: Union[float, torch.Tensor] = 1.0,
    dim: int = -1,
) -> torch.Tensor:
    """
    Temperature softmax with max-subtraction.

    Args:
        logits: Finite logits; the softmax runs over ``dim``
        temperature: Positive temperature (float or scalar tensor, may carry grad)
        dim: Axis to normalise over

    Returns:
        Probabilities summing to 1 along ``dim``
    """
    logits = as_tensor(logits)
    if not bool(torch.isfinite(logits).all()):
        raise NonFiniteInputError("softmax received non-finite logits")
    t = temperature if isinstance(temperature, torch.Tensor) else torch.tensor(float(temperature), dtype=DTYPE)
    if not bool((t > 0).all()):
        raise ParameterError(f"temperature must be positive, got {float(t.min())}")

    z = logits / t
    z = z - z.amax(dim=dim, keepdim=True).detach()
    e = torch.exp(z)
    return e / e.sum(dim=dim, keepdim=True)


def cosine_sim(a: TensorLike, b: TensorLike) -> torch.Tensor:
    """
    Cosine similarity of two nonzero vectors, clamped to [-1, 1].

    Args:
        a: First vector
        b: Second vector of the same dimension

    Returns:
        Scalar tensor
    """
    a = as_tensor(a).reshape(-1)
    b = as_tensor(b).reshape(-1)
    if a.shape != b.shape:
        raise ShapeError(f"cosine_sim dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    na = torch.linalg.vector_norm(a)
    nb = torch.linalg.vector_norm(b)
    if float(na) == 0.0 or float(nb) == 0.0:
        raise DegenerateInputError("cosine_sim of a zero-norm vector")
    return torch.clamp(torch.dot(a, b) / (na * nb), -1.0, 1.0)


def cosine_matrix(a: torch.Tensor, b: torch.Tensor, eps: float = 1e-8) -> torch.Tensor:
    """Pairwise cosine similarities between the rows of ``a`` and ``b``."""
    if a.shape[-1] != b.shape[-1]:
        raise ShapeError(f"cosine_matrix dimension mismatch: {a.shape[-1]} vs {b.shape[-1]}")
    return F.normalize(a, dim=-1, eps=eps) @ F.normalize(b, dim=-1, eps=eps).transpose(-1, -2)
