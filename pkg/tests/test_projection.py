"""Tests for projection module."""

import math

import numpy as np
import pytest
from PIL import Image

from uapoint.common.errors import FrustumError, ParameterError
from uapoint.common.models import Camera
from uapoint.pointcloud import PointSet
from uapoint.projection import DepthMap, camera_rig, corrupt_views, project_all, project_view, render_dataset

from .helpers import TINY_IMAGE


def top_camera(size: int = 32) -> Camera:
    return Camera(position=(0.0, 0.0, 2.0), up=(0.0, 1.0, 0.0), height=size, width=size)


class TestCameraRig:
    """Test camera placement."""

    def test_six_views(self):
        """Test M=6 gives four ring cameras then top and bottom."""
        cams = camera_rig(6, 2.0)
        assert len(cams) == 6
        for cam in cams[:4]:
            assert cam.position[2] == pytest.approx(2.0 * math.sin(math.radians(30.0)))
        assert cams[4].position == pytest.approx((0.0, 0.0, 2.0))
        assert cams[5].position == pytest.approx((0.0, 0.0, -2.0))
        for cam in cams:
            assert math.dist(cam.position, (0.0, 0.0, 0.0)) == pytest.approx(2.0)

    def test_ring_only(self):
        """Test fewer than three views use the ring only."""
        assert len(camera_rig(1, 2.0)) == 1
        assert all(cam.position[2] > 0 for cam in camera_rig(2, 2.0))

    def test_inside_sphere(self):
        """Test a camera distance of 1 is rejected."""
        with pytest.raises(FrustumError):
            camera_rig(4, 1.0)
        with pytest.raises(ParameterError):
            camera_rig(0, 2.0)


class TestProjectView:
    """Test scatter depth rendering."""

    def test_origin_point(self):
        """Test a point at the origin lands at the centre pixel with value 0.5."""
        depth = project_view(PointSet(np.zeros((1, 3))), top_camera())
        assert depth.shape == (32, 32)
        assert depth.pixels[16, 16] == pytest.approx(0.5)
        assert depth.nonzero_count() == 1

    def test_nearest_wins(self):
        """Test the point closest to the camera sets the pixel."""
        ps = PointSet(np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 0.5]]))
        assert project_view(ps, top_camera()).pixels[16, 16] == pytest.approx(0.75)

    def test_behind_camera(self):
        """Test points behind the camera leave an empty map."""
        depth = project_view(PointSet(np.array([[0.0, 0.0, 3.0]])), top_camera())
        assert depth.nonzero_count() == 0

    def test_order_invariant(self, tiny_benchmark):
        """Test permuting the points gives the identical map."""
        ps = tiny_benchmark[0][0]
        perm = np.random.default_rng(0).permutation(len(ps))
        for cam in camera_rig(4, 2.0):
            a = project_view(ps, cam).pixels
            b = project_view(PointSet(ps.points[perm]), cam).pixels
            assert np.array_equal(a, b)

    def test_value_range(self, tiny_benchmark):
        """Test foreground values lie in [1e-3, 1]."""
        for cam in camera_rig(6, 2.0):
            pixels = project_view(tiny_benchmark[0][5], cam).pixels
            foreground = pixels[pixels > 0]
            assert foreground.size > 0
            assert foreground.min() >= 1e-3
            assert foreground.max() <= 1.0


class TestViews:
    """Test view sets and dataset rendering."""

    def test_render_dataset_shape(self, tiny_benchmark):
        """Test the N x M x H x W layout and thread invariance."""
        source = tiny_benchmark[0][:3]
        cams = camera_rig(3, 2.0, image_size=TINY_IMAGE)
        one = render_dataset(source, cams)
        many = render_dataset(source, cams, threads=3)
        assert one.shape == (3, 3, TINY_IMAGE, TINY_IMAGE)
        assert np.array_equal(one, many)

    def test_corrupt_views(self, tiny_benchmark):
        """Test corruption blanks floor(fraction * M) recorded views."""
        vs = project_all(tiny_benchmark[0][0], camera_rig(4, 2.0))
        out = corrupt_views(vs, 0.5, seed=0)
        assert len(out.corrupted) == 2
        for i in range(4):
            assert (out.views[i].nonzero_count() == 0) == (i in out.corrupted)
        assert corrupt_views(vs, 0.0, seed=0) is vs
        with pytest.raises(ParameterError):
            corrupt_views(vs, 1.5, seed=0)

    def test_pgm(self, tmp_path):
        """Test depth maps are written as binary PGM."""
        path = tmp_path / "v.pgm"
        DepthMap(np.tile(np.array([[0.0], [0.5], [1.0], [0.25]]), (2, 8))).to_pgm(path)
        assert path.read_bytes()[:2] == b"P5"
        grey = np.asarray(Image.open(path))
        assert grey[0, 0] == 0
        assert grey[1, 0] == 128
        assert grey[2, 0] == 255
