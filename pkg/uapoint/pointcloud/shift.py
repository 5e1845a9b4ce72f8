"""Synthetic domain shift: rotate, jitter, drop, occlude."""

import math

import numpy as np
from scipy.spatial.transform import Rotation

from ..common.errors import DegenerateShiftError
from ..common.models import ShiftSpec
from ..common.seeding import Stream, make_rng
from .base import PointSet

MIN_POINTS = 8


def apply_shift(ps: PointSet, shift: ShiftSpec, seed: int, index: int = 0) -> PointSet:
    """
    Apply a domain shift to one sample.

    Args:
        ps: Input sample
        shift: Shift description
        seed: User seed
        index: Sample index, selects the per-sample random stream

    Returns:
        Shifted sample with the same labels
    """
    if shift.is_identity:
        return ps

    rng = make_rng(seed, Stream.SHIFT, index)
    points = np.array(ps.points)

    if shift.rotation_angle != 0.0:
        axis = np.asarray(shift.rotation_axis, dtype=np.float64)
        rotvec = axis / np.linalg.norm(axis) * shift.rotation_angle
        points = Rotation.from_rotvec(rotvec).apply(points)

    if shift.jitter_sigma > 0.0:
        points = points + rng.normal(0.0, shift.jitter_sigma, size=points.shape)

    if shift.dropout_ratio > 0.0:
        n_drop = math.floor(shift.dropout_ratio * len(points))
        if n_drop:
            dropped = rng.choice(len(points), size=n_drop, replace=False)
            keep = np.ones(len(points), dtype=bool)
            keep[dropped] = False
            points = points[keep]

    if shift.occlusion is not None:
        normal = np.asarray(shift.occlusion.normal, dtype=np.float64)
        points = points[points @ normal >= shift.occlusion.offset]

    if len(points) < MIN_POINTS:
        raise DegenerateShiftError(f"shift left {len(points)} points, need at least {MIN_POINTS}")
    return ps.with_points(points)
