"""Helpers for polygons that are star-shaped about a reference point.

The boundary of such a polygon is a single-valued radius function of the
bearing. Along one edge from polar point (theta1, r1) to (theta2, r2) the
inverse radius is linear in (cos theta, sin theta):

    1 / rho(theta) = a * cos(theta) + b * sin(theta)

which makes exact wedge lookups, crossings of two boundaries, and area
integrals cheap. Used by the scan simulator and the area-error metric.
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi


def polar_sort(points: np.ndarray, center) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Angles (sorted, in [0, 2pi)), radii, and sort order of points about center."""
    rel = np.asarray(points, dtype=np.float64) - np.asarray(center, dtype=np.float64)
    ang = np.mod(np.arctan2(rel[:, 1], rel[:, 0]), TWO_PI)
    rad = np.hypot(rel[:, 0], rel[:, 1])
    order = np.argsort(ang, kind="stable")
    return ang[order], rad[order], order


def inverse_radius_coeffs(angles: np.ndarray, radii: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-edge coefficients (a, b) with 1/rho = a cos + b sin on each wedge.

    Edge i spans [angles[i], angles[i+1 mod n]). Requires radii > 0 and no
    two consecutive angles equal modulo pi (a degenerate wedge).
    """
    a1 = angles
    a2 = np.roll(angles, -1)
    r1 = radii
    r2 = np.roll(radii, -1)
    # solve [cos a1, sin a1; cos a2, sin a2] [a, b]' = [1/r1, 1/r2]'
    det = np.cos(a1) * np.sin(a2) - np.sin(a1) * np.cos(a2)  # sin(a2 - a1)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = (np.sin(a2) / r1 - np.sin(a1) / r2) / det
        b = (np.cos(a1) / r2 - np.cos(a2) / r1) / det
    return a, b


def wedge_index(angles: np.ndarray, theta) -> np.ndarray:
    """Index of the wedge [angles[i], angles[i+1]) containing each theta."""
    th = np.mod(np.asarray(theta, dtype=np.float64), TWO_PI)
    idx = np.searchsorted(angles, th, side="right") - 1
    # anything before the first vertex angle falls in the wrap-around wedge
    return np.where(idx < 0, angles.shape[0] - 1, idx)


def radius_at(angles: np.ndarray, radii: np.ndarray, theta) -> np.ndarray:
    """Boundary radius of the star polygon at each bearing theta."""
    a, b = inverse_radius_coeffs(angles, radii)
    idx = wedge_index(angles, theta)
    th = np.asarray(theta, dtype=np.float64)
    inv = a[idx] * np.cos(th) + b[idx] * np.sin(th)
    return 1.0 / inv


def polygon_area(points: np.ndarray) -> float:
    """Shoelace area (absolute) of a polygon given as an (n, 2) vertex array."""
    x = points[:, 0]
    y = points[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def is_simple_star(angles: np.ndarray, eps: float = 1e-12) -> bool:
    """Whether an angle-sorted vertex list yields a well-defined radius function.

    True when all vertex bearings are distinct and every angular gap is
    below pi, in which case connecting the vertices in bearing order gives a
    simple polygon star-shaped about the center.
    """
    gaps = np.diff(np.concatenate([angles, [angles[0] + TWO_PI]]))
    return bool(np.all(gaps > eps) and np.all(gaps < np.pi))
