"""Scan container: an ordered set of laser rays with array-backed storage.

Rays are stored as flat NumPy arrays so that the ray-casting kernels can
consume them directly; the per-ray view is available through indexing.
"""

from __future__ import annotations

from typing import Iterator, Sequence

import numpy as np

from .geometry import Point2, Ray


class Scan:
    """Rays ordered by bearing, with optional full-revolution closure.

    origins, endpoints: (K, 2) float64
    max_range: (K,) bool, True for rays that hit nothing in sensor range
    full_revolution: whether the last ray is angularly adjacent to the first
    sensor_max_range: the sensor's range limit, if known (meters)
    """

    __slots__ = ("origins", "endpoints", "max_range", "full_revolution",
                 "sensor_max_range", "_radii", "_dirs")

    def __init__(self, origins, endpoints, max_range=None,
                 full_revolution: bool = False,
                 sensor_max_range: float | None = None):
        o = np.ascontiguousarray(origins, dtype=np.float64)
        e = np.ascontiguousarray(endpoints, dtype=np.float64)
        if o.shape != e.shape or o.ndim != 2 or o.shape[1] != 2:
            raise ValueError("origins and endpoints must both be (K, 2)")
        k = o.shape[0]
        if max_range is None:
            m = np.zeros(k, dtype=bool)
        else:
            m = np.ascontiguousarray(max_range, dtype=bool)
            if m.shape != (k,):
                raise ValueError("max_range must be (K,)")
        if not (np.all(np.isfinite(o)) and np.all(np.isfinite(e))):
            raise ValueError("ray coordinates must be finite")
        radii = np.hypot(e[:, 0] - o[:, 0], e[:, 1] - o[:, 1])
        if np.any(radii <= 0.0):
            raise ValueError("every ray needs a positive measured radius")
        for a in (o, e, m):
            a.setflags(write=False)
        self.origins = o
        self.endpoints = e
        self.max_range = m
        self.full_revolution = full_revolution
        self.sensor_max_range = sensor_max_range
        self._radii = radii
        self._dirs = (e - o) / radii[:, None]

    @classmethod
    def from_rays(cls, rays: Sequence[Ray], full_revolution: bool = False,
                  sensor_max_range: float | None = None) -> "Scan":
        o = np.array([[r.start.x, r.start.y] for r in rays], dtype=np.float64).reshape(-1, 2)
        e = np.array([[r.endpoint.x, r.endpoint.y] for r in rays], dtype=np.float64).reshape(-1, 2)
        m = np.array([r.max_range for r in rays], dtype=bool)
        return cls(o, e, m, full_revolution, sensor_max_range)

    @classmethod
    def from_polar(cls, origin, bearings, ranges, max_range=None,
                   full_revolution: bool = False,
                   sensor_max_range: float | None = None) -> "Scan":
        """Build a scan from one sensor position and per-ray bearing/range."""
        b = np.asarray(bearings, dtype=np.float64)
        r = np.asarray(ranges, dtype=np.float64)
        ox, oy = float(origin[0]), float(origin[1])
        o = np.tile([ox, oy], (b.shape[0], 1))
        e = o + np.column_stack([r * np.cos(b), r * np.sin(b)])
        return cls(o, e, max_range, full_revolution, sensor_max_range)

    @property
    def radii(self) -> np.ndarray:
        return self._radii

    @property
    def directions(self) -> np.ndarray:
        return self._dirs

    @property
    def reflected(self) -> np.ndarray:
        """Mask of rays that actually hit something (not max-range)."""
        return ~self.max_range

    @property
    def bearings(self) -> np.ndarray:
        return np.arctan2(self._dirs[:, 1], self._dirs[:, 0])

    def __len__(self) -> int:
        return self.origins.shape[0]

    def __getitem__(self, k: int) -> Ray:
        return Ray(Point2(*self.origins[k]), Point2(*self.endpoints[k]),
                   bool(self.max_range[k]))

    def rays(self) -> Iterator[Ray]:
        for k in range(len(self)):
            yield self[k]

    def __repr__(self):
        return (f"Scan({len(self)} rays, {int(self.max_range.sum())} max-range, "
                f"full_revolution={self.full_revolution})")
