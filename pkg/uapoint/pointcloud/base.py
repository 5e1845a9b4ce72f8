"""Point set container and the guarded accessor for hidden target labels."""

import threading
from contextlib import contextmanager
from typing import Iterator, Optional

import numpy as np

from ..common.errors import EmptyInputError, NonFiniteInputError, PreconditionError, ShapeError

_lock = threading.Lock()
_section_depth = 0
_section_reads = 0


@contextmanager
def training_section() -> Iterator[None]:
    """Mark code that must never see target labels; reveals inside it are counted."""
    global _section_depth
    with _lock:
        _section_depth += 1
    try:
        yield
    finally:
        with _lock:
            _section_depth -= 1


def hidden_label_reads() -> int:
    """Hidden labels revealed inside training sections since the process started."""
    return _section_reads


class PointSet:
    """One 3D object sample."""

    def __init__(
        self,
        points: np.ndarray,
        label: Optional[int] = None,
        hidden_label: Optional[int] = None,
    ) -> None:
        """
        Initialize point set.

        Args:
            points: N x 3 coordinates, N >= 1, all finite
            label: Visible class index (source samples)
            hidden_label: Class index only reachable through ``reveal_label``
        """
        pts = np.array(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ShapeError(f"points must be N x 3, got shape {pts.shape}")
        if pts.shape[0] == 0:
            raise EmptyInputError("point set has no points")
        if not np.isfinite(pts).all():
            raise NonFiniteInputError("point set contains non-finite coordinates")
        pts.setflags(write=False)
        self.points = pts
        self.label = label
        self._hidden_label = hidden_label

    def __len__(self) -> int:
        return self.points.shape[0]

    def __repr__(self) -> str:
        hidden = "yes" if self._hidden_label is not None else "no"
        return f"PointSet(n={len(self)}, label={self.label}, hidden={hidden})"

    @property
    def has_hidden_label(self) -> bool:
        return self._hidden_label is not None

    def reveal_label(self) -> int:
        """Return the hidden label (evaluation only); counted when inside a training section."""
        global _section_reads
        if self._hidden_label is None:
            raise PreconditionError("point set carries no hidden label")
        with _lock:
            if _section_depth > 0:
                _section_reads += 1
        return self._hidden_label

    def with_points(self, points: np.ndarray) -> "PointSet":
        """Copy with new coordinates and the same (visible and hidden) labels."""
        return PointSet(points, label=self.label, hidden_label=self._hidden_label)

    def hide_label(self) -> "PointSet":
        """Copy whose visible label moves behind the counted accessor."""
        return PointSet(self.points, label=None, hidden_label=self.label)
