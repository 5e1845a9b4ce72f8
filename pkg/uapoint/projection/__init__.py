"""Multi-view perspective projection of point sets into depth maps."""

from .camera import camera_basis, camera_rig
from .render import DepthMap, ViewSet, corrupt_views, project_all, project_view, render_dataset

__all__ = ["DepthMap", "ViewSet", "camera_basis", "camera_rig", "corrupt_views", "project_all", "project_view", "render_dataset"]
