"""Per-class knowledge embeddings: the EMB1 file format and a hashed fallback."""

import hashlib
import json
from abc import ABC, abstractmethod
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from ..common.errors import ConfigurationError
from ..common.logging import get_logger
from ..common.seeding import Stream, make_rng

logger = get_logger(__name__)

MAGIC = b"EMB1"


class BaseKnowledgeSource(ABC):
    """Abstract base class for knowledge-embedding providers."""

    @abstractmethod
    def load(self, class_names: Sequence[str]) -> np.ndarray:
        """
        Knowledge embeddings for the given classes.

        Args:
            class_names: Class names in label order

        Returns:
            K x d float64 matrix, row k for class k
        """
        pass


def sidecar_path(path: str | Path) -> Path:
    """JSON file listing the class name of every row."""
    return Path(path).with_suffix(".json")


def write_knowledge_file(path: str | Path, class_names: Sequence[str], matrix: np.ndarray) -> None:
    """Write an EMB1 file (little-endian u32 K, u32 d, K*d f32) and its name sidecar."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != len(class_names):
        raise ConfigurationError("knowledge matrix must have one row per class name")
    k, d = matrix.shape
    payload = MAGIC + np.array([k, d], dtype="<u4").tobytes() + matrix.astype("<f4").tobytes(order="C")
    Path(path).write_bytes(payload)
    sidecar_path(path).write_text(json.dumps(list(class_names)) + "\n", encoding="utf-8")


class FileKnowledgeSource(BaseKnowledgeSource):
    """Knowledge embeddings read from an EMB1 file."""

    def __init__(self, path: str | Path) -> None:
        """Initialize file source."""
        self.path = Path(path)

    def load(self, class_names: Sequence[str]) -> np.ndarray:
        """Read the file and reorder rows to ``class_names``."""
        names_path = sidecar_path(self.path)
        if not self.path.exists() or not names_path.exists():
            raise ConfigurationError(f"knowledge file or its sidecar is missing: {self.path}")

        raw = self.path.read_bytes()
        if len(raw) < 12 or raw[:4] != MAGIC:
            raise ConfigurationError(f"{self.path} is not an EMB1 file")
        k, d = (int(v) for v in np.frombuffer(raw, dtype="<u4", count=2, offset=4))
        if len(raw) != 12 + 4 * k * d:
            raise ConfigurationError(f"{self.path} is truncated: expected {k}x{d} values")
        matrix = np.frombuffer(raw, dtype="<f4", count=k * d, offset=12).reshape(k, d).astype(np.float64)

        try:
            names: List[str] = json.loads(names_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"corrupt knowledge sidecar {names_path}: {e}") from e
        if len(names) != k:
            raise ConfigurationError(f"sidecar lists {len(names)} names for {k} rows")

        index = {name: i for i, name in enumerate(names)}
        missing = [name for name in class_names if name not in index]
        if missing:
            raise ConfigurationError(f"knowledge file has no row for: {', '.join(missing)}")
        if not np.isfinite(matrix).all():
            raise ConfigurationError(f"{self.path} contains non-finite values")

        logger.info("Loaded knowledge embeddings", path=str(self.path), classes=len(class_names), dim=d)
        return matrix[[index[name] for name in class_names]]


class HashedKnowledgeSource(BaseKnowledgeSource):
    """Fallback: one fixed pseudo-random unit vector per class name."""

    def __init__(self, dim: int) -> None:
        """Initialize hashed source."""
        self.dim = dim

    def _vector(self, name: str) -> np.ndarray:
        digest = hashlib.md5(name.encode("utf-8")).hexdigest()
        rng = make_rng(int(digest[:16], 16), Stream.KNOWLEDGE)
        v = rng.standard_normal(self.dim)
        return v / np.linalg.norm(v)

    def load(self, class_names: Sequence[str]) -> np.ndarray:
        """Hash every class name into its vector."""
        return np.stack([self._vector(name) for name in class_names])


def get_knowledge_source(path: Optional[str | Path], dim: int) -> BaseKnowledgeSource:
    """File source when a path is given, otherwise the hashed fallback."""
    if path:
        return FileKnowledgeSource(path)
    logger.info("Using hashed knowledge embeddings (no knowledge file configured)", dim=dim)
    return HashedKnowledgeSource(dim)
