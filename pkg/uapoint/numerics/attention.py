"""Multi-head cross-attention followed by a GeLU bottleneck feed-forward network."""

import math
from typing import Mapping, Tuple, Union

import torch
import torch.nn.functional as F

from ..common.errors import ShapeError

AttentionWeights = Mapping[str, torch.Tensor]

_REQUIRED = ("w_q", "w_k", "w_v", "ffn_w1", "ffn_b1", "ffn_w2", "ffn_b2")


def feed_forward(x: torch.Tensor, weights: AttentionWeights) -> torch.Tensor:
    """Linear-GeLU-Linear applied row-wise."""
    return F.linear(F.gelu(F.linear(x, weights["ffn_w1"], weights["ffn_b1"])), weights["ffn_w2"], weights["ffn_b2"])


def mhca(
    query: torch.Tensor,
    keys: torch.Tensor,
    values: torch.Tensor,
    heads: int,
    weights: AttentionWeights,
    return_attention: bool = False,
) -> Union[torch.Tensor, Tuple[torch.Tensor, torch.Tensor]]:
    """
    Multi-head cross-attention block.

    Queries, keys and values are projected by ``w_q``, ``w_k``, ``w_v`` (no bias),
    attended per head with scaled dot products, concatenated and passed through the
    feed-forward network.

    Args:
        query: Query tokens, L_q x d_q
        keys: Key tokens, L_k x d_k
        values: Value tokens, L_k x d_k
        heads: Number of heads; must divide the model dimension
        weights: Mapping with w_q (d_q x d), w_k, w_v (d_k x d) and FFN weights
        return_attention: Also return the per-head attention weights (heads x L_q x L_k)

    Returns:
        Output tokens, L_q x d (and the attention weights when requested)
    """
    missing = [name for name in _REQUIRED if name not in weights]
    if missing:
        raise ShapeError(f"mhca weights missing: {', '.join(missing)}")
    if query.dim() != 2 or keys.dim() != 2 or values.dim() != 2:
        raise ShapeError("mhca expects 2-D token matrices")
    if keys.shape[0] != values.shape[0]:
        raise ShapeError(f"keys and values token counts differ: {keys.shape[0]} vs {values.shape[0]}")
    if keys.shape[0] == 0:
        raise ShapeError("mhca needs at least one key token")

    w_q, w_k, w_v = weights["w_q"], weights["w_k"], weights["w_v"]
    if query.shape[1] != w_q.shape[0] or keys.shape[1] != w_k.shape[0] or values.shape[1] != w_v.shape[0]:
        raise ShapeError("token width does not match projection input width")
    d = w_q.shape[1]
    if w_k.shape[1] != d or w_v.shape[1] != d:
        raise ShapeError("query, key and value projections disagree on model dimension")
    if heads < 1 or d % heads != 0:
        raise ShapeError(f"model dimension {d} not divisible by heads {heads}")

    head_dim = d // heads
    n_q, n_k = query.shape[0], keys.shape[0]

    q = (query @ w_q).reshape(n_q, heads, head_dim).transpose(0, 1)
    k = (keys @ w_k).reshape(n_k, heads, head_dim).transpose(0, 1)
    v = (values @ w_v).reshape(n_k, heads, head_dim).transpose(0, 1)

    scores = q @ k.transpose(-1, -2) / math.sqrt(head_dim)
    attn = torch.softmax(scores, dim=-1)
    mixed = (attn @ v).transpose(0, 1).reshape(n_q, d)
    out = feed_forward(mixed, weights)

    if return_attention:
        return out, attn
    return out
