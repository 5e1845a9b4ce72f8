"""Scatter depth maps: nearest point per pixel, nearer is brighter."""

import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from PIL import Image

from ..common.errors import ParameterError, ShapeError
from ..common.models import Camera
from ..common.seeding import Stream, make_rng
from ..pointcloud.base import PointSet
from .camera import camera_basis

MIN_DEPTH_VALUE = 1e-3


class DepthMap:
    """H x W depth image, 0 is background and values grow towards the camera."""

    def __init__(self, pixels: np.ndarray) -> None:
        """
        Initialize depth map.

        Args:
            pixels: H x W array with values in [0, 1]
        """
        pixels = np.asarray(pixels, dtype=np.float64)
        if pixels.ndim != 2:
            raise ShapeError(f"depth map must be 2-D, got shape {pixels.shape}")
        self.pixels = pixels

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape  # type: ignore[return-value]

    def nonzero_count(self) -> int:
        return int(np.count_nonzero(self.pixels))

    def to_pgm(self, path: str | Path) -> None:
        """Write a binary PGM (P5, maxval 255)."""
        grey = np.floor(255.0 * np.clip(self.pixels, 0.0, 1.0) + 0.5).astype(np.uint8)
        Image.fromarray(grey).save(Path(path), format="PPM")


class ViewSet:
    """The M depth maps of one cloud and the cameras that produced them."""

    def __init__(self, views: Sequence[DepthMap], cameras: Sequence[Camera], corrupted: Sequence[int] = ()) -> None:
        if len(views) != len(cameras) or not views:
            raise ShapeError(f"view set needs matching non-empty views and cameras, got {len(views)}/{len(cameras)}")
        self.views = list(views)
        self.cameras = list(cameras)
        self.corrupted = tuple(corrupted)

    def __len__(self) -> int:
        return len(self.views)

    def as_array(self) -> np.ndarray:
        """M x H x W stack of pixel arrays."""
        return np.stack([v.pixels for v in self.views])


def project_view(ps: PointSet, cam: Camera) -> DepthMap:
    """
    Render one scatter depth map.

    Points behind the camera or outside the image are skipped. Pixel indices round
    half-up; per pixel the point with the smallest depth wins.

    Args:
        ps: Sample normalised to the unit sphere
        cam: Camera

    Returns:
        Depth map with values ``1 - (z - near) / (far - near)`` clamped to [1e-3, 1]
    """
    position = np.asarray(cam.position, dtype=np.float64)
    distance = float(np.linalg.norm(np.asarray(cam.look_at, dtype=np.float64) - position))
    near, far = distance - 1.0, distance + 1.0

    local = (ps.points - position) @ camera_basis(cam).T
    x, y, z = local[:, 0], local[:, 1], local[:, 2]
    front = z > 0.0
    x, y, z = x[front], y[front], z[front]

    h, w = cam.height, cam.width
    focal = (h / 2.0) / math.tan(cam.vertical_fov / 2.0)
    col = np.floor(w / 2.0 + focal * x / z + 0.5).astype(np.int64)
    row = np.floor(h / 2.0 - focal * y / z + 0.5).astype(np.int64)
    inside = (col >= 0) & (col < w) & (row >= 0) & (row < h)
    col, row, z = col[inside], row[inside], z[inside]

    zbuffer = np.full(h * w, np.inf)
    np.minimum.at(zbuffer, row * w + col, z)
    hit = np.isfinite(zbuffer)

    pixels = np.zeros(h * w)
    pixels[hit] = np.clip(1.0 - (zbuffer[hit] - near) / (far - near), MIN_DEPTH_VALUE, 1.0)
    return DepthMap(pixels.reshape(h, w))


def project_all(ps: PointSet, cams: Sequence[Camera], threads: int = 1) -> ViewSet:
    """Render every camera of the rig; views are independent."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            views = list(pool.map(lambda cam: project_view(ps, cam), cams))
    else:
        views = [project_view(ps, cam) for cam in cams]
    return ViewSet(views, cams)


def corrupt_views(vs: ViewSet, fraction: float, seed: int, index: int = 0) -> ViewSet:
    """
    Blank ``floor(fraction * M)`` views of a view set to pure background.

    Args:
        vs: View set to corrupt
        fraction: Fraction of views to blank, in [0, 1]
        seed: User seed
        index: Sample index, selects the per-sample random stream

    Returns:
        New view set recording the blanked indices in ``corrupted``
    """
    if not 0.0 <= fraction <= 1.0:
        raise ParameterError(f"corruption fraction must be in [0, 1], got {fraction}")
    count = math.floor(fraction * len(vs))
    if count == 0:
        return vs
    rng = make_rng(seed, Stream.CORRUPT, index)
    chosen: List[int] = sorted(int(i) for i in rng.choice(len(vs), size=count, replace=False))
    views: List[Optional[DepthMap]] = list(vs.views)
    for i in chosen:
        views[i] = DepthMap(np.zeros_like(vs.views[i].pixels))
    return ViewSet(views, vs.cameras, corrupted=chosen)  # type: ignore[arg-type]


def render_dataset(clouds: Sequence[PointSet], cams: Sequence[Camera], threads: int = 1) -> np.ndarray:
    """N x M x H x W depth maps of a dataset, rendered once and cached by the caller."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            stacks = list(pool.map(lambda ps: project_all(ps, cams).as_array(), clouds))
    else:
        stacks = [project_all(ps, cams).as_array() for ps in clouds]
    return np.stack(stacks)
