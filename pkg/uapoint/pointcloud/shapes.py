"""Analytic primitive surfaces used as synthetic object classes."""

from abc import ABC, abstractmethod
from typing import List, Sequence, Tuple

import numpy as np

from ..common.errors import ParameterError

Box = Tuple[Tuple[float, float, float], Tuple[float, float, float]]


class BaseShape(ABC):
    """Abstract base class for primitive surfaces."""

    def __init__(self, name: str) -> None:
        """Initialize the shape."""
        self.name = name

    @abstractmethod
    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """
        Sample points uniformly on the surface.

        Args:
            n: Number of points
            rng: Generator to draw from

        Returns:
            n x 3 array of coordinates
        """
        pass


def _sample_triangles(triangles: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """Area-weighted uniform sampling over a triangle soup (T x 3 x 3)."""
    edges1 = triangles[:, 1] - triangles[:, 0]
    edges2 = triangles[:, 2] - triangles[:, 0]
    areas = 0.5 * np.linalg.norm(np.cross(edges1, edges2), axis=1)
    face = rng.choice(len(triangles), size=n, p=areas / areas.sum())
    u = rng.random(n)
    v = rng.random(n)
    flip = u + v > 1.0
    u[flip], v[flip] = 1.0 - u[flip], 1.0 - v[flip]
    return triangles[face, 0] + u[:, None] * edges1[face] + v[:, None] * edges2[face]


def _box_triangles(lo: Sequence[float], hi: Sequence[float]) -> np.ndarray:
    x0, y0, z0 = lo
    x1, y1, z1 = hi
    corners = np.array(
        [[x, y, z] for x in (x0, x1) for y in (y0, y1) for z in (z0, z1)],
        dtype=np.float64,
    )
    # corner index = 4*ix + 2*iy + iz
    quads = [(0, 1, 3, 2), (4, 5, 7, 6), (0, 1, 5, 4), (2, 3, 7, 6), (0, 2, 6, 4), (1, 3, 7, 5)]
    tris = []
    for a, b, c, d in quads:
        tris.append(corners[[a, b, c]])
        tris.append(corners[[a, c, d]])
    return np.stack(tris)


def _strictly_inside(points: np.ndarray, box: Box) -> np.ndarray:
    lo, hi = np.asarray(box[0]), np.asarray(box[1])
    return np.all((points > lo) & (points < hi), axis=1)


def _sample_box_union(boxes: Sequence[Box], n: int, rng: np.random.Generator) -> np.ndarray:
    """Surface of a union of axis-aligned boxes: box faces minus parts buried in another box."""
    triangles = np.concatenate([_box_triangles(lo, hi) for lo, hi in boxes])
    owner = np.repeat(np.arange(len(boxes)), 12)
    chunks: List[np.ndarray] = []
    have = 0
    while have < n:
        batch = n - have + 16
        edges1 = triangles[:, 1] - triangles[:, 0]
        edges2 = triangles[:, 2] - triangles[:, 0]
        areas = 0.5 * np.linalg.norm(np.cross(edges1, edges2), axis=1)
        face = rng.choice(len(triangles), size=batch, p=areas / areas.sum())
        u = rng.random(batch)
        v = rng.random(batch)
        flip = u + v > 1.0
        u[flip], v[flip] = 1.0 - u[flip], 1.0 - v[flip]
        pts = triangles[face, 0] + u[:, None] * edges1[face] + v[:, None] * edges2[face]
        keep = np.ones(batch, dtype=bool)
        for i, box in enumerate(boxes):
            keep &= ~(_strictly_inside(pts, box) & (owner[face] != i))
        chunks.append(pts[keep])
        have += int(keep.sum())
    return np.concatenate(chunks)[:n]


class Sphere(BaseShape):
    def __init__(self) -> None:
        super().__init__("sphere")

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        g = rng.standard_normal((n, 3))
        return g / np.linalg.norm(g, axis=1, keepdims=True)


class Cube(BaseShape):
    def __init__(self) -> None:
        super().__init__("cube")

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return _sample_box_union([((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0))], n, rng)


class Cylinder(BaseShape):
    """Closed cylinder along z, radius 0.5, height 2."""

    def __init__(self, radius: float = 0.5, half_height: float = 1.0) -> None:
        super().__init__("cylinder")
        self.radius = radius
        self.half_height = half_height

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        r, h = self.radius, self.half_height
        side = 2.0 * np.pi * r * 2.0 * h
        cap = np.pi * r * r
        part = rng.choice(3, size=n, p=np.array([side, cap, cap]) / (side + 2.0 * cap))
        theta = rng.uniform(0.0, 2.0 * np.pi, n)
        radial = np.where(part == 0, r, r * np.sqrt(rng.random(n)))
        z = np.select([part == 0, part == 1], [rng.uniform(-h, h, n), np.full(n, h)], -h)
        return np.column_stack([radial * np.cos(theta), radial * np.sin(theta), z])


class Cone(BaseShape):
    """Closed cone with apex on +z."""

    def __init__(self, radius: float = 0.8, height: float = 1.6) -> None:
        super().__init__("cone")
        self.radius = radius
        self.height = height

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        r, h = self.radius, self.height
        lateral = np.pi * r * np.hypot(r, h)
        base = np.pi * r * r
        on_side = rng.random(n) < lateral / (lateral + base)
        theta = rng.uniform(0.0, 2.0 * np.pi, n)
        t = np.sqrt(rng.random(n))
        radial = r * t
        z = np.where(on_side, h / 2.0 - h * t, -h / 2.0)
        return np.column_stack([radial * np.cos(theta), radial * np.sin(theta), z])


class Torus(BaseShape):
    """Torus around z, sampled uniformly by rejection on the tube angle."""

    def __init__(self, major: float = 0.7, minor: float = 0.25) -> None:
        super().__init__("torus")
        self.major = major
        self.minor = minor

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        big, small = self.major, self.minor
        chunks: List[np.ndarray] = []
        have = 0
        while have < n:
            batch = 2 * (n - have) + 16
            theta = rng.uniform(0.0, 2.0 * np.pi, batch)
            phi = rng.uniform(0.0, 2.0 * np.pi, batch)
            accept = rng.random(batch) < (big + small * np.cos(phi)) / (big + small)
            theta, phi = theta[accept], phi[accept]
            ring = big + small * np.cos(phi)
            chunks.append(np.column_stack([ring * np.cos(theta), ring * np.sin(theta), small * np.sin(phi)]))
            have += int(accept.sum())
        return np.concatenate(chunks)[:n]


class Pyramid(BaseShape):
    """Square pyramid with apex on +z."""

    def __init__(self) -> None:
        super().__init__("pyramid")
        apex = np.array([0.0, 0.0, 1.0])
        base = np.array([[-1.0, -1.0, -0.5], [1.0, -1.0, -0.5], [1.0, 1.0, -0.5], [-1.0, 1.0, -0.5]])
        tris = [np.stack([base[i], base[(i + 1) % 4], apex]) for i in range(4)]
        tris += [np.stack([base[0], base[1], base[2]]), np.stack([base[0], base[2], base[3]])]
        self.triangles = np.stack(tris)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return _sample_triangles(self.triangles, n, rng)


class Plane(BaseShape):
    """Flat square sheet in the xy plane."""

    def __init__(self) -> None:
        super().__init__("plane")

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        uv = rng.uniform(-1.0, 1.0, (n, 2))
        return np.column_stack([uv, np.zeros(n)])


class Helix(BaseShape):
    """Thin tube wound two turns around z."""

    def __init__(self, radius: float = 0.6, turns: float = 2.0, tube: float = 0.06) -> None:
        super().__init__("helix")
        self.radius = radius
        self.turns = turns
        self.tube = tube

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        t = rng.random(n)
        angle = 2.0 * np.pi * self.turns * t
        centre = np.column_stack([self.radius * np.cos(angle), self.radius * np.sin(angle), 2.0 * t - 1.0])
        tangent = np.column_stack(
            [
                -self.radius * 2.0 * np.pi * self.turns * np.sin(angle),
                self.radius * 2.0 * np.pi * self.turns * np.cos(angle),
                np.full(n, 2.0),
            ]
        )
        tangent /= np.linalg.norm(tangent, axis=1, keepdims=True)
        normal = np.column_stack([np.cos(angle), np.sin(angle), np.zeros(n)])
        binormal = np.cross(tangent, normal)
        psi = rng.uniform(0.0, 2.0 * np.pi, n)
        return centre + self.tube * (np.cos(psi)[:, None] * normal + np.sin(psi)[:, None] * binormal)


class Cross(BaseShape):
    """Two crossed square bars in the xy plane."""

    def __init__(self) -> None:
        super().__init__("cross")
        self.boxes: List[Box] = [
            ((-1.0, -0.2, -0.2), (1.0, 0.2, 0.2)),
            ((-0.2, -1.0, -0.2), (0.2, 1.0, 0.2)),
        ]

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return _sample_box_union(self.boxes, n, rng)


class LBracket(BaseShape):
    """L-shaped bracket of two bars meeting at a corner."""

    def __init__(self) -> None:
        super().__init__("l_bracket")
        self.boxes: List[Box] = [
            ((-1.0, -1.0, -0.3), (1.0, -0.6, 0.3)),
            ((-1.0, -1.0, -0.3), (-0.6, 1.0, 0.3)),
        ]

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return _sample_box_union(self.boxes, n, rng)


SHAPES: List[BaseShape] = [
    Sphere(),
    Cube(),
    Cylinder(),
    Cone(),
    Torus(),
    Pyramid(),
    Plane(),
    Helix(),
    Cross(),
    LBracket(),
]


def get_shapes(classes: int) -> List[BaseShape]:
    """First ``classes`` primitives in registry order."""
    if not 2 <= classes <= len(SHAPES):
        raise ParameterError(f"classes must be in [2, {len(SHAPES)}], got {classes}")
    return SHAPES[:classes]
