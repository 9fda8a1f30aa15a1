"""Evaluation metrics: along-ray RMSE, explained-ray fraction f, area error a.

RMSE is the root mean square of the along-ray residuals over the reflected
rays that intersect the map; rays without an intersection are captured by f
instead (the fraction of reflected rays whose axis hits the map). The area
error a compares the polygon formed by polar-sorting the estimated vertices
about the sensor with the ground-truth polygon:

    a = (area(union) - area(intersection)) / area(estimate)

Both polygons are star-shaped about the sensor (the truth by construction,
the estimate by the polar sort), so union and intersection follow the
pointwise max/min of the two boundary radius functions. Between event
angles (all vertex bearings plus boundary crossings) each envelope is a
straight chord, which makes the areas exact shoelace sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import _star
from ._kernels import first_hits
from .geometry import PolylineMap
from .scan import Scan
from .simulator import GroundTruthPolygon


class NoIntersectingRaysError(ValueError):
    """RMSE is undefined: no reflected ray intersects the map."""


class DegenerateEstimateError(ValueError):
    """The polar-sorted estimate polygon has (near-)zero area."""


@dataclass
class EvalReport:
    """Per-scan evaluation result of one method at one vertex budget."""

    method: str
    j_target: int
    scan_id: str
    rmse: float
    f_value: float
    a_value: float | None
    vertex_count: int
    wall_time: float
    a_flagged: bool = False

    CSV_HEADER = "method,J,scan_id,rmse_m,f,a,time_s,vertices"

    def csv_row(self) -> str:
        a = "" if self.a_value is None else f"{self.a_value:.9g}"
        return (f"{self.method},{self.j_target},{self.scan_id},"
                f"{self.rmse:.9g},{self.f_value:.9g},{a},"
                f"{self.wall_time:.6g},{self.vertex_count}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "method": self.method,
            "J": self.j_target,
            "scan_id": self.scan_id,
            "rmse_m": self.rmse,
            "f": self.f_value,
            "a": self.a_value,
            "time_s": self.wall_time,
            "vertices": self.vertex_count,
            "a_flagged": self.a_flagged,
        }


def _hit_distances(scan: Scan, pmap: PolylineMap) -> np.ndarray:
    segs = pmap.segments()
    if segs.shape[0] == 0:
        return np.full(len(scan), np.inf)
    t, _ = first_hits(scan.origins[:, 0], scan.origins[:, 1],
                      scan.directions[:, 0], scan.directions[:, 1], segs)
    return t


def rmse(scan: Scan, pmap: PolylineMap) -> float:
    """Root mean square along-ray residual over intersecting reflected rays."""
    t = _hit_distances(scan, pmap)
    good = scan.reflected & np.isfinite(t)
    if not np.any(good):
        raise NoIntersectingRaysError("no reflected ray intersects the map")
    d = scan.radii[good] - t[good]
    return float(np.sqrt(np.mean(d * d)))


def f_value(scan: Scan, pmap: PolylineMap) -> float:
    """Fraction of reflected rays whose axis intersects the map."""
    refl = scan.reflected
    n = int(refl.sum())
    if n == 0:
        raise ValueError("scan has no reflected rays")
    t = _hit_distances(scan, pmap)
    return float(np.count_nonzero(refl & np.isfinite(t))) / n


def _estimate_polar(vertices: np.ndarray, sensor) -> tuple[np.ndarray, np.ndarray, bool]:
    """Polar-sorted (angles, radii) of the estimate, with a quality flag.

    flagged=True when the sorted vertices do not define a proper radius
    function (duplicate bearings or an angular gap of at least pi); the
    construction still proceeds on the sorted order.
    """
    ang, rad, _ = _star.polar_sort(vertices, sensor)
    flagged = not _star.is_simple_star(ang)
    if np.any(rad <= 0):
        raise DegenerateEstimateError("an estimate vertex coincides with the sensor")
    # merge duplicate bearings, keeping the farther vertex
    keep_ang: list[float] = []
    keep_rad: list[float] = []
    for a, r in zip(ang, rad):
        if keep_ang and a - keep_ang[-1] <= 1e-12:
            keep_rad[-1] = max(keep_rad[-1], r)
        else:
            keep_ang.append(a)
            keep_rad.append(r)
    if len(keep_ang) > 1 and (keep_ang[0] + _star.TWO_PI) - keep_ang[-1] <= 1e-12:
        keep_rad[0] = max(keep_rad[0], keep_rad.pop())
        keep_ang.pop()
    return np.array(keep_ang), np.array(keep_rad), flagged


def _crossings(ang_a, rad_a, ang_b, rad_b, events):
    """Bearings where the two radius functions cross, within event wedges."""
    ca_a, cb_a = _star.inverse_radius_coeffs(ang_a, rad_a)
    ca_b, cb_b = _star.inverse_radius_coeffs(ang_b, rad_b)
    out = []
    m = events.shape[0]
    for i in range(m):
        lo = events[i]
        hi = events[(i + 1) % m] + (_star.TWO_PI if i + 1 == m else 0.0)
        if hi - lo <= 1e-14:
            continue
        mid = 0.5 * (lo + hi)
        ia = _star.wedge_index(ang_a, mid)[()]
        ib = _star.wedge_index(ang_b, mid)[()]
        da = ca_a[ia] - ca_b[ib]
        db = cb_a[ia] - cb_b[ib]
        # 1/rho_a - 1/rho_b = da cos(theta) + db sin(theta): at most one root
        # in a wedge narrower than pi
        if da == 0.0 and db == 0.0:
            continue
        root = math.atan2(-da, db)
        for cand in (root, root + math.pi, root - math.pi, root + _star.TWO_PI):
            if lo + 1e-14 < cand < hi - 1e-14:
                out.append(cand % _star.TWO_PI)
    return np.array(sorted(out))


def a_value(estimated: PolylineMap | np.ndarray, truth: GroundTruthPolygon,
            sensor=(0.0, 0.0)) -> float:
    """Relative symmetric-difference area between estimate and ground truth.

    The estimate's vertices are polar-sorted about the sensor into one
    polygon. Raises DegenerateEstimateError when that polygon has no area.
    Use a_value_report to also get the degeneracy flag for ill-ordered
    estimates.
    """
    val, _ = a_value_report(estimated, truth, sensor)
    return val


def a_value_report(estimated: PolylineMap | np.ndarray, truth: GroundTruthPolygon,
                   sensor=(0.0, 0.0)) -> tuple[float, bool]:
    """(a_value, flagged); flagged marks estimates without a clean polar order."""
    if isinstance(estimated, PolylineMap):
        if estimated.is_empty:
            raise DegenerateEstimateError("empty estimated map")
        verts = estimated.vertices()
    else:
        verts = np.asarray(estimated, dtype=np.float64)
    if verts.shape[0] < 3:
        raise DegenerateEstimateError("estimate has fewer than 3 vertices")
    sensor = np.asarray(sensor, dtype=np.float64)

    ang_e, rad_e, flagged = _estimate_polar(verts, sensor)
    if ang_e.shape[0] < 3:
        raise DegenerateEstimateError("estimate collapses to fewer than 3 bearings")
    rel_t = truth.vertices - sensor[None, :]
    ang_t = np.mod(np.arctan2(rel_t[:, 1], rel_t[:, 0]), _star.TWO_PI)
    rad_t = np.hypot(rel_t[:, 0], rel_t[:, 1])
    order = np.argsort(ang_t, kind="stable")
    ang_t, rad_t = ang_t[order], rad_t[order]

    events = np.unique(np.concatenate([ang_e, ang_t]))
    cross = _crossings(ang_t, rad_t, ang_e, rad_e, events)
    events = np.unique(np.concatenate([events, cross]))

    rho_t = _star.radius_at(ang_t, rad_t, events)
    rho_e = _star.radius_at(ang_e, rad_e, events)
    lo = np.minimum(rho_t, rho_e)
    hi = np.maximum(rho_t, rho_e)

    def envelope_area(rho):
        pts = np.column_stack([rho * np.cos(events), rho * np.sin(events)])
        return _star.polygon_area(pts)

    inter = envelope_area(lo)
    union = envelope_area(hi)
    area_e = envelope_area(rho_e)
    if area_e <= 1e-15:
        raise DegenerateEstimateError("estimate polygon has zero area")
    return (union - inter) / area_e, flagged


def summarize(values: np.ndarray) -> tuple[float, float]:
    """Mean and standard error of a metric over scans."""
    v = np.asarray(values, dtype=np.float64)
    mean = float(np.mean(v))
    if v.shape[0] < 2:
        return mean, 0.0
    return mean, float(np.std(v, ddof=1) / math.sqrt(v.shape[0]))
