"""Planar primitives and ray/segment/polyline intersection.

All types are immutable values and all operations are pure functions.
Intersections are computed on the infinite forward axis of a ray (not
clipped to the measured endpoint), because the predicted range of a ray is
defined independently of its measured range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from ._kernels import first_hits

PARAM_EPS = 1e-12


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class Point2:
    """A point in the map frame, in meters."""

    x: float
    y: float

    def __post_init__(self):
        _require_finite("Point2 coordinate", self.x, self.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class Ray:
    """A single laser measurement: start point, measured endpoint, max-range flag.

    The measured radius is the distance from start to endpoint and must be
    positive. Max-range rays carry the endpoint at the sensor's range limit
    but represent "nothing was hit".
    """

    start: Point2
    endpoint: Point2
    max_range: bool = False

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError("ray start and endpoint must be distinct")

    @property
    def radius(self) -> float:
        return math.hypot(self.endpoint.x - self.start.x, self.endpoint.y - self.start.y)

    @property
    def direction(self) -> tuple[float, float]:
        r = self.radius
        return ((self.endpoint.x - self.start.x) / r, (self.endpoint.y - self.start.y) / r)


class Polyline:
    """An ordered chain of at least two pairwise-distinct vertices.

    A closed polyline is a polygon and needs at least three vertices; its
    last vertex connects back to the first.
    """

    __slots__ = ("vertices", "closed")

    def __init__(self, vertices, closed: bool = False):
        v = np.asarray(vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ValueError("vertices must be an (n, 2) array-like")
        if not np.all(np.isfinite(v)):
            raise ValueError("vertices must be finite")
        n = v.shape[0]
        if closed and n < 3:
            raise ValueError("a closed polyline needs at least 3 vertices")
        if not closed and n < 2:
            raise ValueError("a polyline needs at least 2 vertices")
        diffs = np.diff(v, axis=0)
        if np.any(np.all(diffs == 0.0, axis=1)):
            raise ValueError("consecutive vertices must be distinct")
        if closed and np.all(v[-1] == v[0]):
            raise ValueError("consecutive vertices must be distinct (wrap-around)")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "closed", closed)

    def __setattr__(self, name, value):
        raise AttributeError("Polyline is immutable")

    @property
    def vertex_count(self) -> int:
        return self.vertices.shape[0]

    @property
    def segment_count(self) -> int:
        return self.vertex_count if self.closed else self.vertex_count - 1

    def segments(self) -> np.ndarray:
        """Segments as an (m, 4) array of [px, py, qx, qy] rows."""
        v = self.vertices
        if self.closed:
            q = np.roll(v, -1, axis=0)
            return np.hstack([v, q])
        return np.hstack([v[:-1], v[1:]])

    def __repr__(self):
        kind = "closed" if self.closed else "open"
        return f"Polyline({self.vertex_count} vertices, {kind})"


class PolylineMap:
    """A set of vertex-disjoint polylines representing the environment."""

    __slots__ = ("polylines", "_segs", "_seg_source")

    def __init__(self, polylines: Sequence[Polyline] = ()):
        object.__setattr__(self, "polylines", tuple(polylines))
        object.__setattr__(self, "_segs", None)
        object.__setattr__(self, "_seg_source", None)

    def __setattr__(self, name, value):
        raise AttributeError("PolylineMap is immutable")

    @property
    def polyline_count(self) -> int:
        return len(self.polylines)

    @property
    def vertex_count(self) -> int:
        return sum(p.vertex_count for p in self.polylines)

    @property
    def is_empty(self) -> bool:
        return not self.polylines

    def vertices(self) -> np.ndarray:
        """All vertices stacked in polyline-major order, shape (J, 2)."""
        if not self.polylines:
            return np.empty((0, 2))
        return np.vstack([p.vertices for p in self.polylines])

    def vertex_location(self, j: int) -> np.ndarray:
        """Vertex j in the polyline-major enumeration."""
        for p in self.polylines:
            if j < p.vertex_count:
                return p.vertices[j]
            j -= p.vertex_count
        raise IndexError("vertex index out of range")

    def segments(self) -> np.ndarray:
        """All segments stacked, shape (S, 4). Cached."""
        if self._segs is None:
            if self.polylines:
                segs = np.vstack([p.segments() for p in self.polylines])
            else:
                segs = np.empty((0, 4))
            segs.setflags(write=False)
            object.__setattr__(self, "_segs", segs)
        return self._segs

    def __iter__(self) -> Iterator[Polyline]:
        return iter(self.polylines)

    def __repr__(self):
        return f"PolylineMap({self.polyline_count} polylines, {self.vertex_count} vertices)"


def ray_segment_intersection(ray: Ray, p: Point2, q: Point2) -> float | None:
    """Forward intersection parameter of a ray's axis with segment [p, q].

    The parameter is measured in meters from the ray start along the unit
    ray direction; the whole forward axis is considered, not only the part
    up to the measured endpoint. Returns None when there is no intersection.
    A collinear overlap reports the smallest nonnegative overlap parameter,
    and hits at segment endpoints count (closed segments).
    """
    ox, oy = ray.start.x, ray.start.y
    ux, uy = ray.direction
    px, py, qx, qy = p.x, p.y, q.x, q.y

    ex = qx - px
    ey = qy - py
    seg_len = math.sqrt(ex * ex + ey * ey)
    relx = px - ox
    rely = py - oy
    denom = ux * ey - uy * ex
    num_t = relx * ey - rely * ex
    num_s = relx * uy - rely * ux

    if abs(denom) <= PARAM_EPS * seg_len:
        if abs(num_s) <= PARAM_EPS * (1.0 + abs(relx) + abs(rely)):
            tp = relx * ux + rely * uy
            tq = tp + (ex * ux + ey * uy)
            lo, hi = (tp, tq) if tp <= tq else (tq, tp)
            if hi >= -PARAM_EPS:
                return max(lo, 0.0)
        return None

    t = num_t / denom
    s = num_s / denom
    if t >= -PARAM_EPS and -PARAM_EPS <= s <= 1.0 + PARAM_EPS:
        return max(t, 0.0)
    return None


def first_intersection_distance(ray: Ray, pmap: PolylineMap) -> float | None:
    """Distance from the ray start to its first intersection with the map.

    This is the predicted range of the ray given the map; None when the
    ray's forward axis does not intersect any segment.
    """
    segs = pmap.segments()
    if segs.shape[0] == 0:
        return None
    ox = np.array([ray.start.x])
    oy = np.array([ray.start.y])
    ux, uy = ray.direction
    t, idx = first_hits(ox, oy, np.array([ux]), np.array([uy]), segs)
    if idx[0] < 0:
        return None
    return float(t[0])


def residual(ray: Ray, pmap: PolylineMap) -> float | None:
    """Measured range minus predicted range, along the ray axis.

    None when the ray does not intersect the map.
    """
    t = first_intersection_distance(ray, pmap)
    if t is None:
        return None
    return ray.radius - t
