"""Gaussian radial sensor model and scan-level log-likelihood.

A ray's measured radius is modeled as normally distributed around the
predicted radius (the distance to the first map intersection along the ray
axis), with angular noise neglected. The scan likelihood is the product of
the per-ray densities, assuming independent rays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import first_hits
from .geometry import PolylineMap, Ray, residual
from .scan import Scan


class NoIntersectionError(ValueError):
    """A ray's axis does not intersect the map, so its density is undefined."""


class NoiseModel:
    """Per-ray radial variance. Subclass for radius- or device-dependent noise."""

    constant_variance = False

    def variance_for(self, k: int) -> float:
        raise NotImplementedError

    def variances(self, count: int) -> np.ndarray:
        return np.array([self.variance_for(k) for k in range(count)])


@dataclass(frozen=True)
class ConstantNoise(NoiseModel):
    """Same radial variance for every ray (the usual case; with constant
    variance, likelihood-ratio comparisons between maps do not depend on it)."""

    variance: float = 1.0
    constant_variance = True

    def __post_init__(self):
        if not (self.variance > 0.0 and math.isfinite(self.variance)):
            raise ValueError("variance must be positive and finite")

    def variance_for(self, k: int) -> float:
        return self.variance

    def variances(self, count: int) -> np.ndarray:
        return np.full(count, self.variance)


def ray_log_likelihood(ray: Ray, pmap: PolylineMap, noise: NoiseModel,
                       k: int = 0) -> float:
    """Log-density of one reflected ray's measured radius given the map.

    Raises NoIntersectionError when the ray misses the map; the caller
    decides the policy (see scan_log_likelihood). k is the ray index used to
    look up its variance.
    """
    if ray.max_range:
        raise ValueError("max-range rays carry no radial measurement")
    d = residual(ray, pmap)
    if d is None:
        raise NoIntersectionError("ray does not intersect the map")
    var = noise.variance_for(k)
    return -0.5 * math.log(2.0 * math.pi * var) - d * d / (2.0 * var)


def scan_log_likelihood(scan: Scan, pmap: PolylineMap, noise: NoiseModel,
                        miss_policy: str = "skip",
                        miss_distance: float = 0.5) -> float:
    """Sum of per-ray log-likelihoods over the reflected rays of a scan.

    Max-range rays contribute zero. Rays whose axis misses the map are
    handled per miss_policy: "skip" drops them (default), "penalty" scores
    them as if their residual were miss_distance.
    """
    if miss_policy not in ("skip", "penalty"):
        raise ValueError(f"unknown miss policy {miss_policy!r}")
    k = len(scan)
    if k == 0:
        return 0.0
    segs = pmap.segments()
    refl = scan.reflected
    if segs.shape[0] == 0:
        t = np.full(k, np.inf)
    else:
        t, _ = first_hits(scan.origins[:, 0], scan.origins[:, 1],
                          scan.directions[:, 0], scan.directions[:, 1], segs)
    var = noise.variances(k)
    hit = refl & np.isfinite(t)
    d = scan.radii[hit] - t[hit]
    total = float(np.sum(-0.5 * np.log(2.0 * np.pi * var[hit])
                         - d * d / (2.0 * var[hit])))
    if miss_policy == "penalty":
        missed = refl & ~np.isfinite(t)
        total += float(np.sum(-0.5 * np.log(2.0 * np.pi * var[missed])
                              - miss_distance ** 2 / (2.0 * var[missed])))
    return total
