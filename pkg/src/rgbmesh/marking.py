"""Element marking strategies: circle curve intersection and point location."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Mesh, signed_areas
from .quality import locate_points


@dataclass(frozen=True)
class Circle:
    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))


def _segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = b - a
    den = np.maximum((d * d).sum(axis=1), np.finfo(float).tiny)
    t = np.clip(((p - a) * d).sum(axis=1) / den, 0.0, 1.0)
    foot = a + t[:, None] * d
    return np.hypot(*(p - foot).T)


def mark_circle(mesh: Mesh, circle: Circle, min_area: float | None = None) -> np.ndarray:
    """Elements whose closed triangle meets the circle curve.

    An element is marked iff its distance to the center is at most the
    radius and its farthest vertex is at least the radius away.  Elements
    with area below ``min_area`` are never marked.
    """
    c = np.asarray(circle.center)
    tri = mesh.coordinates[mesh.elements]
    center = np.broadcast_to(c, (mesh.n_elements, 2))
    dmin = np.minimum.reduce([_segment_distance(center, tri[:, k], tri[:, (k + 1) % 3]) for k in range(3)])
    inside = locate_points(mesh.coordinates, mesh.elements, c[None, :])[0]
    dmin = np.where(inside, 0.0, dmin)
    dmax = np.hypot(*(tri - c).transpose(2, 0, 1)).max(axis=1)
    hit = (dmin <= circle.radius) & (circle.radius <= dmax)
    if min_area is not None:
        hit &= signed_areas(mesh.coordinates, mesh.elements) >= min_area
    return np.flatnonzero(hit)


def point_to_element(mesh: Mesh, points, chunk: int = 256) -> np.ndarray:
    """Sorted ids of all closed elements containing at least one of the points."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    hit = np.zeros(mesh.n_elements, dtype=bool)
    for s in range(0, len(pts), chunk):
        hit |= locate_points(mesh.coordinates, mesh.elements, pts[s:s + chunk]).any(axis=0)
    return np.flatnonzero(hit)
