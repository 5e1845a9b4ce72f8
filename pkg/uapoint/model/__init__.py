"""Encoder stack: LoRA-adapted view encoder, point encoder, prompts and class head."""

from .checkpoint import load_checkpoint, save_checkpoint
from .encoders import encode_point_set, encode_view, encode_views, pool_view_tokens
from .knowledge import (
    BaseKnowledgeSource,
    FileKnowledgeSource,
    HashedKnowledgeSource,
    get_knowledge_source,
    write_knowledge_file,
)
from .lora import apply_lora
from .prompts import class_embedding_matrix, class_probs, cloud_prompts, gen_text_prompt, gen_visual_prompt
from .state import ModelState

__all__ = [
    "BaseKnowledgeSource",
    "FileKnowledgeSource",
    "HashedKnowledgeSource",
    "ModelState",
    "apply_lora",
    "class_embedding_matrix",
    "class_probs",
    "cloud_prompts",
    "encode_point_set",
    "encode_view",
    "encode_views",
    "gen_text_prompt",
    "gen_visual_prompt",
    "get_knowledge_source",
    "load_checkpoint",
    "pool_view_tokens",
    "save_checkpoint",
    "write_knowledge_file",
]
