"""Fixed camera rig around the unit sphere."""

import math
from typing import List

import numpy as np

from ..common.errors import FrustumError, ParameterError
from ..common.models import Camera

RING_ELEVATION = math.radians(30.0)


def camera_rig(
    m_views: int,
    distance: float,
    fov_degrees: float = 60.0,
    image_size: int = 32,
) -> List[Camera]:
    """
    Build the camera poses.

    For ``m_views >= 3``: ``m_views - 2`` ring cameras at 30 degrees elevation with
    equal azimuth spacing, then one top and one bottom camera. Fewer views use the
    ring only.

    Args:
        m_views: Number of cameras M
        distance: Distance of every camera from the origin (> 1)
        fov_degrees: Vertical field of view
        image_size: Height and width in pixels

    Returns:
        Cameras in rig order: ring by increasing azimuth, top, bottom
    """
    if m_views < 1:
        raise ParameterError(f"m_views must be >= 1, got {m_views}")
    if distance <= 1.0:
        raise FrustumError(f"camera distance {distance} puts the camera inside the unit sphere")

    fov = math.radians(fov_degrees)
    ring = m_views - 2 if m_views >= 3 else m_views
    spacing = 2.0 * math.pi / ring
    cameras = []
    for k in range(ring):
        az = k * spacing
        position = (
            distance * math.cos(RING_ELEVATION) * math.cos(az),
            distance * math.cos(RING_ELEVATION) * math.sin(az),
            distance * math.sin(RING_ELEVATION),
        )
        cameras.append(Camera(position=position, vertical_fov=fov, height=image_size, width=image_size))

    if m_views >= 3:
        for z in (distance, -distance):
            cameras.append(
                Camera(position=(0.0, 0.0, z), up=(0.0, 1.0, 0.0), vertical_fov=fov, height=image_size, width=image_size)
            )
    return cameras


def camera_basis(cam: Camera) -> np.ndarray:
    """Rows: right, up, forward unit vectors of the camera frame."""
    position = np.asarray(cam.position, dtype=np.float64)
    forward = np.asarray(cam.look_at, dtype=np.float64) - position
    forward /= np.linalg.norm(forward)
    right = np.cross(forward, np.asarray(cam.up, dtype=np.float64))
    right /= np.linalg.norm(right)
    up = np.cross(right, forward)
    return np.stack([right, up, forward])
