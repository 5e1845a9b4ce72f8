"""Reliability weights, class prototypes and prototype alignment."""

import math
from typing import List, Optional, Sequence, Union

import numpy as np
import torch

from ..common.errors import EmptyInputError, ParameterError, PreconditionError, ShapeError
from ..common.logging import get_logger
from ..numerics.ops import DTYPE, as_tensor, cosine_matrix

logger = get_logger(__name__)


class Prototypes:
    """Weighted class means; classes with zero total weight are invalid."""

    def __init__(self, vectors: torch.Tensor, total_weight: torch.Tensor) -> None:
        """
        Initialize prototypes.

        Args:
            vectors: K x d prototype matrix (zero rows for invalid classes)
            total_weight: K summed reliability weights
        """
        self.vectors = vectors
        self.total_weight = total_weight

    @property
    def valid(self) -> torch.Tensor:
        return self.total_weight > 0

    def detach(self) -> "Prototypes":
        return Prototypes(self.vectors.detach(), self.total_weight.detach())


def reliability_weight(p: Union[torch.Tensor, Sequence[float]]) -> torch.Tensor:
    """``1 - H(p) / log K`` over the last axis, in [0, 1]."""
    p = as_tensor(p)
    k = p.shape[-1]
    if k < 2:
        raise PreconditionError("reliability weight needs at least two classes")
    entropy = torch.special.entr(p).sum(dim=-1)
    return torch.clamp(1.0 - entropy / math.log(k), 0.0, 1.0)


def build_prototypes(
    embs: torch.Tensor,
    labels: Sequence[int],
    weights: Union[torch.Tensor, Sequence[float]],
    num_classes: Optional[int] = None,
) -> Prototypes:
    """
    ``U_c = sum_i w_i v_i / sum_i w_i`` over the samples of class c.

    Args:
        embs: n x d embeddings
        labels: n class indices
        weights: n non-negative weights
        num_classes: K; defaults to max(labels) + 1

    Returns:
        Prototypes with invalid rows for classes without weight
    """
    embs = as_tensor(embs)
    weights = as_tensor(weights)
    n = len(labels)
    if n == 0:
        raise EmptyInputError("build_prototypes needs at least one sample")
    if embs.shape[0] != n or weights.reshape(-1).shape[0] != n:
        raise ShapeError(f"embeddings ({embs.shape[0]}), labels ({n}) and weights differ in length")
    if bool((weights < 0).any()):
        raise ParameterError("prototype weights must be non-negative")
    k = num_classes if num_classes is not None else max(labels) + 1

    assign = torch.zeros(k, n, dtype=DTYPE)
    assign[torch.as_tensor(list(labels)), torch.arange(n)] = 1.0
    weighted = assign * weights.reshape(1, n)
    totals = weighted.sum(dim=1)
    sums = weighted @ embs
    safe = torch.where(totals > 0, totals, torch.ones_like(totals))
    vectors = torch.where((totals > 0).unsqueeze(1), sums / safe.unsqueeze(1), torch.zeros_like(sums))
    return Prototypes(vectors, totals)


def pseudo_label(p: Union[torch.Tensor, Sequence[float]]) -> int:
    """Argmax class, ties broken towards the lowest index."""
    return int(np.argmax(as_tensor(p).detach().cpu().numpy()))


def pseudo_labels(probs: torch.Tensor) -> List[int]:
    """Row-wise ``pseudo_label``."""
    return [int(i) for i in np.argmax(probs.detach().cpu().numpy(), axis=1)]


def proto_loss(
    target_embs: torch.Tensor,
    target_weights: Union[torch.Tensor, Sequence[float]],
    labels: Sequence[int],
    protos: Prototypes,
    temperature: Union[float, torch.Tensor],
) -> torch.Tensor:
    """
    Weighted cross-entropy of targets against the prototypes of their pseudo-labels.

    The softmax runs over valid prototypes; targets pointing at an invalid prototype
    are skipped. Weights and pseudo-labels carry no gradient.

    Args:
        target_embs: n x d target embeddings
        target_weights: n reliability weights
        labels: n pseudo-labels
        protos: Prototypes (typically previous-epoch source prototypes)
        temperature: Softmax temperature

    Returns:
        Loss normalised by the total weight; 0 when that weight is 0
    """
    target_embs = as_tensor(target_embs)
    weights = as_tensor(target_weights).detach().reshape(-1)
    zero = target_embs.sum() * 0.0

    valid = protos.valid
    valid_idx = [int(i) for i in torch.nonzero(valid).reshape(-1)]
    column = {c: j for j, c in enumerate(valid_idx)}
    keep = [i for i, c in enumerate(labels) if c in column]
    if not keep or float(weights[keep].sum()) == 0.0:
        logger.warning("proto_loss_zero_weight", targets=len(labels), usable=len(keep))
        return zero

    w = weights[keep]
    sims = cosine_matrix(target_embs[keep], protos.vectors[valid_idx]) / temperature
    log_probs = torch.log_softmax(sims, dim=-1)
    picked = log_probs[torch.arange(len(keep)), torch.as_tensor([column[labels[i]] for i in keep])]
    return -(w * picked).sum() / w.sum()
