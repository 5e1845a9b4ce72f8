"""All trainable and frozen tensors of the encoder stack."""

import copy
import math
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Tuple

import numpy as np
import torch
from torch import nn

from ..common.config import ModelSettings, Variant
from ..common.errors import ParameterError, ShapeError
from ..common.seeding import Stream, make_rng
from ..numerics.ops import DTYPE

if TYPE_CHECKING:
    from ..alignment.prototypes import Prototypes

# Parameters trained under every variant; the LoRA pairs are added per variant.
SHARED_TRAINABLE = (
    "class_embeddings",
    "point_w1",
    "point_b1",
    "point_w2",
    "point_b2",
    "query",
    "w_q",
    "w_k_text",
    "w_v_text",
    "ffn_text_w1",
    "ffn_text_b1",
    "ffn_text_w2",
    "ffn_text_b2",
    "w_k_vis",
    "w_v_vis",
    "ffn_vis_w1",
    "ffn_vis_b1",
    "ffn_vis_w2",
    "ffn_vis_b2",
    "t_proj_w",
    "t_proj_b",
    "log_tau",
)
TEXT_LORA = ("text_a", "text_b")
VIEW_LORA = ("patch_a", "patch_b", "head_a", "head_b")

VARIANT_LORA: Dict[str, Tuple[str, ...]] = {
    "T": TEXT_LORA,
    "V": VIEW_LORA,
    "B": TEXT_LORA + VIEW_LORA,
}

FROZEN_BUFFERS = ("knowledge", "patch_base", "patch_bias", "pos", "head_base", "head_bias", "text_base")


class ModelState(nn.Module):
    """
    Encoder stack state.

    Frozen tensors live in buffers and never receive gradients: the random base
    patch projection, positional table and pooling head, the identity text
    projection and the knowledge embeddings. Everything else is a parameter;
    which LoRA pairs train is chosen by the variant.
    """

    def __init__(self, cfg: ModelSettings, class_names: Sequence[str], knowledge: np.ndarray) -> None:
        """
        Initialize model state.

        Args:
            cfg: Model settings (dimensions, rank, temperature, init seed)
            class_names: Class names in label order
            knowledge: K x d_k knowledge embeddings, one row per class
        """
        super().__init__()
        knowledge = np.asarray(knowledge, dtype=np.float64)
        if knowledge.ndim != 2 or knowledge.shape[0] != len(class_names) or knowledge.shape[0] == 0:
            raise ShapeError(f"knowledge must be K x d with K={len(class_names)}, got {knowledge.shape}")
        if cfg.image_size % cfg.patch_size != 0:
            raise ParameterError(f"patch_size {cfg.patch_size} does not divide image_size {cfg.image_size}")
        if cfg.embed_dim % cfg.heads != 0:
            raise ParameterError(f"embed_dim {cfg.embed_dim} not divisible by heads {cfg.heads}")

        self.cfg = cfg
        self.class_names = list(class_names)
        self.source_prototypes: Optional["Prototypes"] = None

        d, t, hidden, r = cfg.embed_dim, cfg.token_dim, cfg.point_hidden, cfg.lora_rank
        d_know = knowledge.shape[1]
        d_ffn = max(1, d // 2)
        patch_dim = cfg.patch_size * cfg.patch_size
        n_patches = (cfg.image_size // cfg.patch_size) ** 2
        rng = make_rng(cfg.init_seed, Stream.INIT)

        def uniform(shape: Tuple[int, ...], fan_in: int) -> torch.Tensor:
            bound = 1.0 / math.sqrt(fan_in)
            return torch.from_numpy(rng.uniform(-bound, bound, size=shape)).to(DTYPE)

        def param(shape: Tuple[int, ...], fan_in: int) -> nn.Parameter:
            return nn.Parameter(uniform(shape, fan_in))

        self.register_buffer("knowledge", torch.from_numpy(knowledge).to(DTYPE))
        self.register_buffer("patch_base", uniform((t, patch_dim), patch_dim))
        self.register_buffer("patch_bias", uniform((t,), patch_dim))
        self.register_buffer("pos", uniform((n_patches, t), t))
        self.register_buffer("head_base", uniform((d, t), t))
        self.register_buffer("head_bias", uniform((d,), t))
        self.register_buffer("text_base", torch.eye(d, dtype=DTYPE))

        self.patch_a = param((r, patch_dim), patch_dim)
        self.patch_b = nn.Parameter(torch.zeros(t, r, dtype=DTYPE))
        self.head_a = param((r, t), t)
        self.head_b = nn.Parameter(torch.zeros(d, r, dtype=DTYPE))
        self.text_a = param((r, d), d)
        self.text_b = nn.Parameter(torch.zeros(d, r, dtype=DTYPE))

        self.point_w1 = param((hidden, 3), 3)
        self.point_b1 = param((hidden,), 3)
        self.point_w2 = param((t, hidden), hidden)
        self.point_b2 = param((t,), hidden)

        self.query = param((cfg.query_length, d), d)
        self.w_q = param((d, d), d)
        self.w_k_text = param((d_know, d), d_know)
        self.w_v_text = param((d_know, d), d_know)
        self.ffn_text_w1 = param((d_ffn, d), d)
        self.ffn_text_b1 = param((d_ffn,), d)
        self.ffn_text_w2 = param((d, d_ffn), d_ffn)
        self.ffn_text_b2 = param((d,), d_ffn)
        self.w_k_vis = param((t, d), t)
        self.w_v_vis = param((t, d), t)
        self.ffn_vis_w1 = param((d_ffn, d), d)
        self.ffn_vis_b1 = param((d_ffn,), d)
        self.ffn_vis_w2 = param((d, d_ffn), d_ffn)
        self.ffn_vis_b2 = param((d,), d_ffn)
        self.t_proj_w = param((t, d), d)
        self.t_proj_b = param((t,), d)

        self.class_embeddings = param((len(class_names), d), d)
        self.log_tau = nn.Parameter(torch.tensor(math.log(cfg.temperature), dtype=DTYPE))
        self.renormalize_class_embeddings()

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    @property
    def temperature(self) -> torch.Tensor:
        return torch.exp(self.log_tau)

    @property
    def use_text_prompt(self) -> bool:
        """P_t is active unless the mode is ``visual`` or ``none``."""
        return self.cfg.prompt_mode in ("full", "text")

    @property
    def use_visual_prompt(self) -> bool:
        """P_v is active unless the mode is ``text`` or ``none``."""
        return self.cfg.prompt_mode in ("full", "visual")

    def text_attention_weights(self) -> Dict[str, torch.Tensor]:
        return {
            "w_q": self.w_q,
            "w_k": self.w_k_text,
            "w_v": self.w_v_text,
            "ffn_w1": self.ffn_text_w1,
            "ffn_b1": self.ffn_text_b1,
            "ffn_w2": self.ffn_text_w2,
            "ffn_b2": self.ffn_text_b2,
        }

    def visual_attention_weights(self) -> Dict[str, torch.Tensor]:
        return {
            "w_q": self.w_q,
            "w_k": self.w_k_vis,
            "w_v": self.w_v_vis,
            "ffn_w1": self.ffn_vis_w1,
            "ffn_b1": self.ffn_vis_b1,
            "ffn_w2": self.ffn_vis_w2,
            "ffn_b2": self.ffn_vis_b2,
        }

    def trainable_names(self, variant: Variant) -> List[str]:
        """Parameter names updated under a variant."""
        if variant not in VARIANT_LORA:
            raise ParameterError(f"unknown variant {variant!r}, expected one of T, V, B")
        return list(SHARED_TRAINABLE) + list(VARIANT_LORA[variant])

    def trainable_parameters(self, variant: Variant) -> Dict[str, nn.Parameter]:
        params = dict(self.named_parameters())
        return {name: params[name] for name in self.trainable_names(variant)}

    def renormalize_class_embeddings(self) -> None:
        """Project class embedding rows back onto the unit sphere."""
        with torch.no_grad():
            norms = torch.linalg.vector_norm(self.class_embeddings, dim=1, keepdim=True)
            self.class_embeddings.div_(torch.clamp(norms, min=1e-12))

    def clone(self) -> "ModelState":
        return copy.deepcopy(self)
