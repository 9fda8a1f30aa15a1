"""Ground-truth polygon generation and noisy scan synthesis.

Simulated environments are random polygons that are star-shaped about the
sensor origin, so every ray sees the boundary exactly once. Scans are drawn
by perturbing the nominal ray bearings with Gaussian noise, intersecting the
noisy rays with the polygon, and adding Gaussian noise to the resulting
radii.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _star
from .scan import Scan

PROTOCOL_VERTEX_COUNTS = (3, 4, 5, 6, 12, 36, 180)

# additive radial noise can produce non-physical ranges; clip at 1 cm
MIN_RANGE = 0.01


@dataclass(frozen=True)
class SimConfig:
    """Parameters of the simulation protocol.

    n_vertices is restricted to the benchmark family; use star_polygon
    directly for other shapes. Angles get a minimum separation of
    min_gap_fraction * (2 pi / n) and radii are drawn uniformly from
    [radius_min, radius_max].
    """

    n_vertices: int
    ray_count: int = 360
    sigma_angle_deg: float = 0.2
    sigma_r: float = 0.03
    radius_min: float = 2.0
    radius_max: float = 10.0
    min_gap_fraction: float = 0.5

    def __post_init__(self):
        if self.n_vertices not in PROTOCOL_VERTEX_COUNTS:
            raise ValueError(f"n_vertices must be one of {PROTOCOL_VERTEX_COUNTS}")
        if self.ray_count < 3:
            raise ValueError("ray_count must be at least 3")
        if self.sigma_angle_deg < 0 or self.sigma_r < 0:
            raise ValueError("noise standard deviations must be nonnegative")
        if not (0 < self.radius_min <= self.radius_max):
            raise ValueError("need 0 < radius_min <= radius_max")


class GroundTruthPolygon:
    """A simple polygon star-shaped about the sensor origin."""

    __slots__ = ("vertices", "angles", "radii")

    def __init__(self, vertices: np.ndarray):
        v = np.asarray(vertices, dtype=np.float64)
        ang = np.arctan2(v[:, 1], v[:, 0]) % _star.TWO_PI
        if np.any(np.diff(ang) <= 0):
            raise ValueError("vertices must be sorted by bearing about the origin")
        rad = np.hypot(v[:, 0], v[:, 1])
        if np.any(rad <= 0):
            raise ValueError("vertices must not coincide with the origin")
        if not _star.is_simple_star(ang):
            raise ValueError("polygon is not star-shaped about the origin")
        v.setflags(write=False)
        self.vertices = v
        self.angles = ang
        self.radii = rad

    @property
    def vertex_count(self) -> int:
        return self.vertices.shape[0]

    def boundary_radius(self, theta) -> np.ndarray:
        """Distance from the origin to the boundary at bearing theta."""
        return _star.radius_at(self.angles, self.radii, theta)

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Vectorized membership test (boundary counts as inside)."""
        p = np.asarray(points, dtype=np.float64)
        r = np.hypot(p[:, 0], p[:, 1])
        th = np.arctan2(p[:, 1], p[:, 0])
        return r <= self.boundary_radius(th)

    def area(self) -> float:
        return _star.polygon_area(self.vertices)


def star_polygon(n: int, rng: np.random.Generator,
                 radius_range: tuple[float, float] = (2.0, 10.0),
                 min_gap_fraction: float = 0.5) -> GroundTruthPolygon:
    """Random star-shaped polygon about the origin with n vertices.

    Angular gaps are drawn as scaled exponential spacings on top of the
    minimum gap, which enforces the separation exactly; draws where some gap
    reaches pi (the origin would fall outside) are rejected.
    """
    if n < 3:
        raise ValueError("a polygon needs at least 3 vertices")
    min_gap = min_gap_fraction * _star.TWO_PI / n
    slack = _star.TWO_PI - n * min_gap
    if slack < 0:
        raise ValueError("minimum angular gap is infeasible for this n")
    while True:
        spacing = rng.exponential(size=n)
        gaps = min_gap + spacing * (slack / spacing.sum())
        if np.max(gaps) < np.pi:
            break
    start = rng.uniform(0.0, _star.TWO_PI)
    angles = np.sort((start + np.cumsum(gaps)) % _star.TWO_PI)
    radii = rng.uniform(radius_range[0], radius_range[1], size=n)
    v = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
    return GroundTruthPolygon(v)


def random_polygon(config: SimConfig, rng: np.random.Generator) -> GroundTruthPolygon:
    """Random ground-truth polygon per the simulation config."""
    return star_polygon(config.n_vertices, rng,
                        (config.radius_min, config.radius_max),
                        config.min_gap_fraction)


def simulate_scan(polygon: GroundTruthPolygon, config: SimConfig,
                  rng: np.random.Generator) -> Scan:
    """One noisy full-revolution scan of the polygon from the origin.

    Bearings are the nominal uniform spacing plus angular noise; each ray's
    true radius is its boundary intersection along the noisy bearing; the
    measured radius adds radial noise (clipped below at MIN_RANGE). Rays are
    returned sorted by bearing.
    """
    k = config.ray_count
    nominal = np.arange(k) * (_star.TWO_PI / k)
    bearings = nominal + rng.normal(0.0, math.radians(config.sigma_angle_deg), size=k)
    r_true = polygon.boundary_radius(bearings)
    r_meas = np.maximum(r_true + rng.normal(0.0, config.sigma_r, size=k), MIN_RANGE)
    order = np.argsort(np.mod(bearings, _star.TWO_PI), kind="stable")
    return Scan.from_polar((0.0, 0.0), np.mod(bearings, _star.TWO_PI)[order],
                           r_meas[order], full_revolution=True,
                           sensor_max_range=2.0 * config.radius_max)
