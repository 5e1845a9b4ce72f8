"""Low-rank residual adapters."""

import torch

from ..common.errors import ShapeError


def apply_lora(base: torch.Tensor, a: torch.Tensor, b: torch.Tensor, scale: float) -> torch.Tensor:
    """
    Effective weight ``base + scale * B @ A``.

    Args:
        base: out x in frozen weight (never modified)
        a: r x in down-projection
        b: out x r up-projection
        scale: Adapter scale

    Returns:
        New out x in tensor
    """
    if base.dim() != 2 or a.dim() != 2 or b.dim() != 2:
        raise ShapeError("apply_lora expects 2-D matrices")
    if b.shape[1] != a.shape[0]:
        raise ShapeError(f"adapter rank mismatch: B has {b.shape[1]} columns, A has {a.shape[0]} rows")
    if b.shape[0] != base.shape[0] or a.shape[1] != base.shape[1]:
        raise ShapeError(f"adapter product {b.shape[0]}x{a.shape[1]} does not match base {tuple(base.shape)}")
    return base + scale * (b @ a)
