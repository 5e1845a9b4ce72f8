"""Knowledge-driven text prompts, geometry-driven visual prompts and the class head."""

from typing import List, Optional, Sequence, Tuple

import torch
import torch.nn.functional as F

from ..numerics.attention import mhca
from ..numerics.ops import cosine_matrix, softmax
from ..pointcloud.base import PointSet
from .encoders import encode_point_set
from .lora import apply_lora
from .state import ModelState


def gen_text_prompt(state: ModelState) -> torch.Tensor:
    """P_t: the shared query attends over the knowledge embeddings (L_q x d)."""
    return mhca(state.query, state.knowledge, state.knowledge, state.cfg.heads, state.text_attention_weights())


def gen_visual_prompt(state: ModelState, i3d: torch.Tensor) -> torch.Tensor:
    """P_v: the shared query attends over geometric tokens, then T_proj maps to token width (L_q x d_tok)."""
    attended = mhca(state.query, i3d, i3d, state.cfg.heads, state.visual_attention_weights())
    return F.linear(attended, state.t_proj_w, state.t_proj_b)


def class_embedding_matrix(state: ModelState, text_prompt: Optional[torch.Tensor]) -> torch.Tensor:
    """
    Effective unit-norm class embeddings.

    The mean text-prompt row is added to every class embedding, the sum goes through
    the LoRA-adapted text projection and rows are normalised.

    Args:
        state: Model state
        text_prompt: P_t, or None when text prompting is disabled

    Returns:
        K x d matrix
    """
    rows = state.class_embeddings
    if text_prompt is not None:
        rows = rows + text_prompt.mean(dim=0)
    weight = apply_lora(state.text_base, state.text_a, state.text_b, state.cfg.lora_scale)
    return F.normalize(F.linear(rows, weight), dim=-1, eps=1e-8)


def class_probs(
    v: torch.Tensor,
    state: ModelState,
    classes: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    """
    Class probabilities ``softmax(cos(v, T_k) / tau)``.

    Args:
        v: (..., d) embeddings
        state: Model state
        classes: Class embedding matrix; defaults to the prompt-conditioned
            ``class_embedding_matrix`` of the state

    Returns:
        (..., K) probabilities
    """
    if classes is None:
        classes = class_embedding_matrix(state, gen_text_prompt(state) if state.use_text_prompt else None)
    return softmax(cosine_matrix(v, classes), state.temperature)


def cloud_prompts(state: ModelState, clouds: Sequence[PointSet]) -> Tuple[List[torch.Tensor], Optional[torch.Tensor]]:
    """
    Geometric tokens and visual prompts of a batch of clouds.

    Args:
        state: Model state
        clouds: Normalised samples

    Returns:
        (I_3D per cloud, B x L_q x d_tok prompts or None when visual prompting is off)
    """
    tokens = [encode_point_set(ps, state) for ps in clouds]
    if not state.use_visual_prompt:
        return tokens, None
    return tokens, torch.stack([gen_visual_prompt(state, i3d) for i3d in tokens])
