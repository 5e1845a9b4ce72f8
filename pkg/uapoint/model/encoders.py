"""Point-set encoder and the LoRA-adapted depth-view encoder."""

from typing import Optional

import numpy as np
import torch
import torch.nn.functional as F

from ..common.errors import DegenerateInputError, ShapeError
from ..numerics.ops import DTYPE
from ..pointcloud.base import PointSet
from ..projection.render import DepthMap
from .lora import apply_lora
from .state import ModelState

MIN_POINTS = 8
NORM_EPS = 1e-8


def encode_point_set(ps: PointSet, state: ModelState) -> torch.Tensor:
    """
    Geometric tokens I_3D of one sample.

    A per-point MLP (3 -> hidden -> d_tok, ReLU) is max-pooled channel-wise over four
    groups given by the signs of x and y; an empty group yields a zero token.

    Args:
        ps: Normalised sample with at least 8 points
        state: Model state

    Returns:
        4 x d_tok token matrix
    """
    if len(ps) < MIN_POINTS:
        raise DegenerateInputError(f"point encoder needs at least {MIN_POINTS} points, got {len(ps)}")

    # canonical order, so any permutation of the input encodes identically
    order = np.lexsort(ps.points.T[::-1])
    points = torch.from_numpy(np.ascontiguousarray(ps.points[order])).to(DTYPE)

    hidden = F.relu(F.linear(points, state.point_w1, state.point_b1))
    feats = F.linear(hidden, state.point_w2, state.point_b2)

    group = 2 * (points[:, 0] < 0).long() + (points[:, 1] < 0).long()
    tokens = []
    for g in range(4):
        mask = group == g
        if bool(mask.any()):
            tokens.append(feats[mask].amax(dim=0))
        else:
            tokens.append(torch.zeros(feats.shape[1], dtype=DTYPE))
    return torch.stack(tokens)


def patchify(pixels: torch.Tensor, patch_size: int) -> torch.Tensor:
    """(..., H, W) -> (..., n_patches, patch_size**2) in row-major patch order."""
    *lead, h, w = pixels.shape
    if h % patch_size or w % patch_size:
        raise ShapeError(f"depth map {h}x{w} is not tiled by {patch_size}x{patch_size} patches")
    rows, cols = h // patch_size, w // patch_size
    x = pixels.reshape(*lead, rows, patch_size, cols, patch_size)
    x = x.movedim(-3, -2)
    return x.reshape(*lead, rows * cols, patch_size * patch_size)


def pool_view_tokens(pixels: torch.Tensor, prompt: Optional[torch.Tensor], state: ModelState) -> torch.Tensor:
    """
    Mean-pooled token of depth maps.

    Patch tokens are ``GeLU(patch @ W_eff.T + b + pos)``; prompt tokens are prepended
    before pooling.

    Args:
        pixels: (..., H, W) depth maps
        prompt: Visual prompt tokens, (L, d_tok) or broadcastable (..., L, d_tok); None for no prompt
        state: Model state

    Returns:
        (..., d_tok) pooled features
    """
    cfg = state.cfg
    if pixels.shape[-2:] != (cfg.image_size, cfg.image_size):
        raise ShapeError(f"depth map must be {cfg.image_size}x{cfg.image_size}, got {tuple(pixels.shape[-2:])}")

    weight = apply_lora(state.patch_base, state.patch_a, state.patch_b, cfg.lora_scale)
    tokens = F.gelu(F.linear(patchify(pixels, cfg.patch_size), weight, state.patch_bias) + state.pos)
    total = tokens.sum(dim=-2)
    count = tokens.shape[-2]

    if prompt is not None:
        if prompt.shape[-1] != tokens.shape[-1]:
            raise ShapeError(f"prompt width {prompt.shape[-1]} does not match token width {tokens.shape[-1]}")
        prompt_sum = prompt.sum(dim=-2)
        # one prompt per cloud is shared by all of its views
        while prompt_sum.dim() < total.dim():
            prompt_sum = prompt_sum.unsqueeze(-2)
        total = total + prompt_sum
        count += prompt.shape[-2]
    return total / count


def encode_views(pixels: torch.Tensor, prompt: Optional[torch.Tensor], state: ModelState) -> torch.Tensor:
    """Unit-norm embeddings (..., d) of a stack of depth maps."""
    pooled = pool_view_tokens(pixels, prompt, state)
    head = apply_lora(state.head_base, state.head_a, state.head_b, state.cfg.lora_scale)
    return F.normalize(F.linear(pooled, head, state.head_bias), dim=-1, eps=NORM_EPS)


def encode_view(dm: DepthMap, prompt: Optional[torch.Tensor], state: ModelState) -> torch.Tensor:
    """Unit-norm embedding of one depth map."""
    pixels = torch.from_numpy(dm.pixels).to(DTYPE)
    return encode_views(pixels, prompt, state)
