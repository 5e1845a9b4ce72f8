"""Confidence and orthogonality regularisers and the composite objective."""

import math
from typing import Optional, Union

import torch
import torch.nn.functional as F

from ..common.errors import EmptyInputError, NonFiniteInputError
from ..numerics.ops import DTYPE, as_tensor

Scalar = Union[float, torch.Tensor]


def conf_loss(source_probs: torch.Tensor, target_probs: torch.Tensor) -> torch.Tensor:
    """Mean prediction entropy of the source batch plus that of the target batch."""
    source_probs = as_tensor(source_probs)
    target_probs = as_tensor(target_probs)
    if source_probs.shape[0] == 0 or target_probs.shape[0] == 0:
        raise EmptyInputError("conf_loss needs non-empty source and target batches")
    source = torch.special.entr(source_probs).sum(dim=-1).mean()
    target = torch.special.entr(target_probs).sum(dim=-1).mean()
    return source + target


def ortho_loss(i3d: torch.Tensor) -> torch.Tensor:
    """``|I I^T - Id|_F^2`` over the token Gram matrix (t x t)."""
    i3d = as_tensor(i3d)
    gram = i3d @ i3d.transpose(-1, -2)
    eye = torch.eye(gram.shape[-1], dtype=DTYPE)
    return ((gram - eye) ** 2).sum(dim=(-2, -1))


def token_ortho_loss(i3d: torch.Tensor, eps: float = 1e-8) -> torch.Tensor:
    """
    ``ortho_loss`` of the L2-normalised token rows.

    Only the directions of the geometric tokens are decorrelated, so the term stays
    below ``t (t - 1)`` whatever the token scale. Zero tokens contribute a constant.

    Args:
        i3d: t x d_tok token matrix
        eps: Norm guard

    Returns:
        Scalar loss
    """
    return ortho_loss(F.normalize(as_tensor(i3d), dim=-1, eps=eps))


def total_loss(
    ce: Scalar,
    ortho: Scalar,
    proto: Optional[Scalar],
    ot: Scalar,
    conf: Scalar,
    alpha: float,
) -> Scalar:
    """``ce + alpha * (ortho + proto + ot + conf)``; a missing proto term counts as 0."""
    aux = ortho + (proto if proto is not None else 0.0) + ot + conf
    total = ce + alpha * aux
    finite = bool(torch.isfinite(total).all()) if isinstance(total, torch.Tensor) else math.isfinite(total)
    if not finite:
        raise NonFiniteInputError("composite loss is not finite")
    return total
