"""Normalisation and the seeded synthetic source/target benchmark."""

from concurrent.futures import ThreadPoolExecutor
from typing import List, Tuple

import numpy as np

from ..common.errors import ParameterError
from ..common.logging import get_logger
from ..common.models import ShiftSpec
from ..common.seeding import Stream, make_rng
from .base import PointSet
from .shapes import get_shapes
from .shift import MIN_POINTS, apply_shift

logger = get_logger(__name__)


def normalize_unit_sphere(ps: PointSet) -> PointSet:
    """Centre on the centroid and scale the farthest point to radius 1."""
    centred = ps.points - ps.points.mean(axis=0)
    radius = float(np.linalg.norm(centred, axis=1).max())
    if radius == 0.0:
        return ps.with_points(np.zeros_like(centred))
    return ps.with_points(centred / radius)


def generate_benchmark(
    classes: int,
    samples_per_class: int,
    points_per_sample: int,
    shift: ShiftSpec,
    seed: int,
    threads: int = 1,
) -> Tuple[List[PointSet], List[PointSet]]:
    """
    Generate paired source and target datasets.

    Sample ``i`` of both domains draws its clean surface from the same sub-seed; the
    target copy is then shifted with its own sub-seed and re-normalised. Target labels
    are hidden.

    Args:
        classes: Number of classes K (2..10)
        samples_per_class: Samples per class and domain
        points_per_sample: Points per clean sample
        shift: Target-domain shift
        seed: User seed
        threads: Worker threads (output does not depend on it)

    Returns:
        (source, target) lists ordered by class then sample index
    """
    shapes = get_shapes(classes)
    if samples_per_class < 1:
        raise ParameterError(f"samples_per_class must be >= 1, got {samples_per_class}")
    if points_per_sample < MIN_POINTS:
        raise ParameterError(f"points_per_sample must be >= {MIN_POINTS}, got {points_per_sample}")

    def build(index: int) -> Tuple[PointSet, PointSet]:
        label = index // samples_per_class
        rng = make_rng(seed, Stream.SAMPLE, index)
        clean = normalize_unit_sphere(PointSet(shapes[label].sample(points_per_sample, rng), label=label))
        if shift.is_identity:
            return clean, clean.hide_label()
        shifted = normalize_unit_sphere(apply_shift(clean, shift, seed, index))
        return clean, shifted.hide_label()

    total = classes * samples_per_class
    with ThreadPoolExecutor(max_workers=threads) as pool:
        pairs = list(pool.map(build, range(total)))

    logger.info(
        "Generated benchmark",
        classes=classes,
        samples_per_class=samples_per_class,
        points=points_per_sample,
        shifted=not shift.is_identity,
    )
    return [s for s, _ in pairs], [t for _, t in pairs]
