"""Reading and writing ``xyz`` samples and dataset manifests."""

import math
import re
from pathlib import Path
from typing import List, Tuple

import numpy as np
from pydantic import ValidationError

from ..common.errors import DatasetError, EmptyInputError, ParseError
from ..common.logging import get_logger
from ..common.models import Domain, Manifest
from .base import PointSet

logger = get_logger(__name__)

_LABEL_HEADER = re.compile(r"^#\s*label\s+(\S+)\s*$")


def parse_xyz(text: str) -> PointSet:
    """Parse ``xyz`` text: optional ``# label <int>`` header, then one triple per line."""
    label = None
    rows: List[Tuple[float, float, float]] = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            match = _LABEL_HEADER.match(line)
            if match:
                try:
                    label = int(match.group(1))
                except ValueError:
                    raise ParseError(f"invalid label {match.group(1)!r}", line=lineno) from None
            continue
        fields = line.split()
        if len(fields) != 3:
            raise ParseError(f"expected 3 coordinates, got {len(fields)}", line=lineno)
        try:
            xyz = tuple(float(f) for f in fields)
        except ValueError:
            raise ParseError(f"invalid coordinate in {line!r}", line=lineno) from None
        if not all(math.isfinite(c) for c in xyz):
            raise ParseError(f"non-finite coordinate in {line!r}", line=lineno)
        rows.append(xyz)  # type: ignore[arg-type]

    if not rows:
        raise EmptyInputError("xyz input contains no points")
    return PointSet(np.array(rows, dtype=np.float64), label=label)


def load_pointset(path: str | Path) -> PointSet:
    """Load one sample from an ``xyz`` file."""
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"sample file not found: {path}")
    return parse_xyz(path.read_text(encoding="utf-8"))


def save_pointset(ps: PointSet, path: str | Path) -> None:
    """Write a sample losslessly; only visible labels are written."""
    lines = []
    if ps.label is not None:
        lines.append(f"# label {ps.label}")
    lines.extend(" ".join(f"{c:.17g}" for c in row) for row in ps.points)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_manifest(manifest: Manifest, path: str | Path) -> None:
    """Write the dataset manifest as indented JSON."""
    Path(path).write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8", newline="\n")


def read_manifest(path: str | Path) -> Manifest:
    """Read and validate a dataset manifest."""
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"manifest not found: {path}")
    try:
        return Manifest.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise DatasetError(f"malformed manifest {path}: {e}") from e


def load_dataset(manifest_path: str | Path) -> Tuple[Manifest, List[PointSet], List[PointSet]]:
    """
    Load every sample listed in a manifest.

    Sample paths are resolved relative to the manifest. Target samples get their
    manifest label as a hidden label.

    Args:
        manifest_path: Path to the manifest JSON

    Returns:
        (manifest, source samples, target samples)
    """
    manifest_path = Path(manifest_path)
    manifest = read_manifest(manifest_path)
    root = manifest_path.parent
    k = len(manifest.classes)

    source: List[PointSet] = []
    target: List[PointSet] = []
    for entry in manifest.samples:
        ps = load_pointset(root / entry.path)
        if entry.domain == Domain.SOURCE:
            label = entry.label if entry.label is not None else ps.label
            if label is None or not 0 <= label < k:
                raise DatasetError(f"source sample {entry.path} has no valid label")
            source.append(PointSet(ps.points, label=label))
        else:
            if entry.label is not None or ps.label is not None:
                raise DatasetError(f"target sample {entry.path} exposes a label")
            if entry.hidden_label is not None and not 0 <= entry.hidden_label < k:
                raise DatasetError(f"target sample {entry.path} has an out-of-range hidden label")
            target.append(PointSet(ps.points, hidden_label=entry.hidden_label))

    logger.info("Loaded dataset", manifest=str(manifest_path), source=len(source), target=len(target))
    return manifest, source, target
