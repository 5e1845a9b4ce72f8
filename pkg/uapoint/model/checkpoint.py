"""CKPT1 checkpoint files.

Layout (little-endian): magic ``CKPT1``, u32 version, u32 metadata length, UTF-8
JSON metadata, u32 section count, then per section a u16 name length, the name,
u32 rows, u32 cols and rows*cols f32 values in row-major order.
"""

import json
import struct
from pathlib import Path
from typing import Any, Dict, Tuple

import numpy as np
import torch

from ..common.config import ModelSettings
from ..common.errors import ConfigurationError
from ..common.logging import get_logger
from ..numerics.ops import DTYPE
from .state import ModelState

logger = get_logger(__name__)

MAGIC = b"CKPT1"
VERSION = 1


def _as_matrix(t: torch.Tensor) -> np.ndarray:
    arr = t.detach().cpu().numpy()
    if arr.ndim == 0:
        return arr.reshape(1, 1)
    if arr.ndim == 1:
        return arr.reshape(1, -1)
    return arr


def save_checkpoint(state: ModelState, path: str | Path, variant: str) -> None:
    """
    Write every parameter and buffer of a model state.

    Cached source prototypes, when present, are stored as extra sections.

    Args:
        state: Model state
        path: Output file
        variant: Trained LoRA variant recorded in the metadata
    """
    tensors: Dict[str, torch.Tensor] = dict(state.named_parameters())
    tensors.update(dict(state.named_buffers()))
    protos = state.source_prototypes
    if protos is not None:
        tensors["proto_vectors"] = protos.vectors
        tensors["proto_weights"] = protos.total_weight

    shapes = {name: list(t.shape) for name, t in tensors.items()}
    metadata = {
        "model": state.cfg.model_dump(),
        "class_names": state.class_names,
        "variant": variant,
        "shapes": shapes,
    }
    meta_bytes = json.dumps(metadata, sort_keys=True).encode("utf-8")

    chunks = [MAGIC, struct.pack("<II", VERSION, len(meta_bytes)), meta_bytes, struct.pack("<I", len(tensors))]
    for name in sorted(tensors):
        matrix = _as_matrix(tensors[name])
        encoded = name.encode("utf-8")
        chunks.append(struct.pack("<H", len(encoded)) + encoded)
        chunks.append(struct.pack("<II", *matrix.shape))
        chunks.append(matrix.astype("<f4").tobytes(order="C"))
    Path(path).write_bytes(b"".join(chunks))
    logger.info("Saved checkpoint", path=str(path), sections=len(tensors))


def _read(raw: bytes, offset: int, fmt: str) -> Tuple[Tuple[Any, ...], int]:
    size = struct.calcsize(fmt)
    if offset + size > len(raw):
        raise ConfigurationError("checkpoint is truncated")
    return struct.unpack_from(fmt, raw, offset), offset + size


def load_checkpoint(path: str | Path) -> Tuple[ModelState, str]:
    """
    Read a checkpoint back into a model state.

    Args:
        path: Checkpoint file

    Returns:
        (state, variant)
    """
    from ..alignment.prototypes import Prototypes

    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"checkpoint not found: {path}")
    raw = path.read_bytes()
    if raw[: len(MAGIC)] != MAGIC:
        raise ConfigurationError(f"{path} is not a CKPT1 checkpoint")

    (version, meta_len), offset = _read(raw, len(MAGIC), "<II")
    if version != VERSION:
        raise ConfigurationError(f"unsupported checkpoint version {version}")
    try:
        metadata = json.loads(raw[offset : offset + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"corrupt checkpoint metadata: {e}") from e
    offset += meta_len
    (count,), offset = _read(raw, offset, "<I")

    sections: Dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,), offset = _read(raw, offset, "<H")
        name = raw[offset : offset + name_len].decode("utf-8")
        offset += name_len
        (rows, cols), offset = _read(raw, offset, "<II")
        size = 4 * rows * cols
        if offset + size > len(raw):
            raise ConfigurationError("checkpoint is truncated")
        sections[name] = np.frombuffer(raw, dtype="<f4", count=rows * cols, offset=offset).reshape(rows, cols)
        offset += size

    shapes: Dict[str, list] = metadata["shapes"]
    if "knowledge" not in sections:
        raise ConfigurationError("checkpoint has no knowledge section")
    state = ModelState(ModelSettings(**metadata["model"]), metadata["class_names"], sections["knowledge"])

    targets: Dict[str, torch.Tensor] = dict(state.named_parameters())
    targets.update(dict(state.named_buffers()))
    with torch.no_grad():
        for name, tensor in targets.items():
            if name not in sections:
                raise ConfigurationError(f"checkpoint is missing section {name}")
            value = torch.from_numpy(sections[name].astype(np.float64)).reshape(shapes[name])
            if value.shape != tensor.shape:
                raise ConfigurationError(f"section {name} has shape {tuple(value.shape)}, expected {tuple(tensor.shape)}")
            tensor.copy_(value.to(DTYPE))

    if "proto_vectors" in sections:
        weights = torch.from_numpy(sections["proto_weights"].astype(np.float64)).reshape(-1)
        vectors = torch.from_numpy(sections["proto_vectors"].astype(np.float64))
        state.source_prototypes = Prototypes(vectors, weights)

    logger.info("Loaded checkpoint", path=str(path), variant=metadata["variant"])
    return state, metadata["variant"]
