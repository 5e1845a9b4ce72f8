"""Point-cloud samples, primitives, domain shift and dataset files."""

from .base import PointSet, hidden_label_reads, training_section
from .benchmark import generate_benchmark, normalize_unit_sphere
from .io import load_dataset, load_pointset, parse_xyz, read_manifest, save_pointset, write_manifest
from .shapes import SHAPES, BaseShape, get_shapes
from .shift import apply_shift

__all__ = [
    "SHAPES",
    "BaseShape",
    "PointSet",
    "apply_shift",
    "generate_benchmark",
    "get_shapes",
    "hidden_label_reads",
    "load_dataset",
    "load_pointset",
    "normalize_unit_sphere",
    "parse_xyz",
    "read_manifest",
    "save_pointset",
    "training_section",
    "write_manifest",
]
