"""Pure-NumPy ray-casting kernels (fallback backend).

Rays are given as origins and unit direction vectors; hit parameters are
therefore distances in meters. Segments are closed: a hit at an endpoint
counts, with a parametric tolerance PARAM_EPS. A collinear ray/segment
overlap reports the smallest nonnegative overlap parameter.

The compiled backend in _raycast.pyx mirrors the arithmetic of this module
operation for operation, so both produce bit-identical results.
"""

from __future__ import annotations

import numpy as np

PARAM_EPS = 1e-12


def first_hits(ox, oy, ux, uy, segs):
    """First forward intersection of each ray with any of the segments.

    ox, oy, ux, uy: (K,) float64 ray origins and unit directions.
    segs: (S, 4) float64 segments as [px, py, qx, qy] rows.

    Returns (t, idx) where t is (K,) hit distances (inf where the ray hits
    nothing) and idx is (K,) int64 indices of the first hit segment (-1 where
    the ray hits nothing). Ties in t go to the lower segment index.
    """
    K = ox.shape[0]
    if K == 0 or segs.shape[0] == 0:
        return np.full(K, np.inf), np.full(K, -1, dtype=np.int64)

    px, py, qx, qy = segs[:, 0], segs[:, 1], segs[:, 2], segs[:, 3]
    ex = qx - px
    ey = qy - py
    seg_len = np.sqrt(ex * ex + ey * ey)

    relx = px[None, :] - ox[:, None]          # (K, S)
    rely = py[None, :] - oy[:, None]
    denom = ux[:, None] * ey[None, :] - uy[:, None] * ex[None, :]
    num_t = relx * ey[None, :] - rely * ex[None, :]
    num_s = relx * uy[:, None] - rely * ux[:, None]

    parallel = np.abs(denom) <= PARAM_EPS * seg_len[None, :]
    safe = np.where(parallel, 1.0, denom)
    t = num_t / safe
    s = num_s / safe
    hit = (~parallel) & (t >= -PARAM_EPS) & (s >= -PARAM_EPS) & (s <= 1.0 + PARAM_EPS)
    tmat = np.where(hit, np.maximum(t, 0.0), np.inf)

    # Collinear overlap: project both segment ends onto the ray axis and take
    # the smallest nonnegative parameter of the overlap with [0, inf).
    collinear = parallel & (
        np.abs(num_s) <= PARAM_EPS * (1.0 + np.abs(relx) + np.abs(rely))
    )
    if np.any(collinear):
        tp = relx * ux[:, None] + rely * uy[:, None]
        tq = tp + (ex * ux[:, None] + ey * uy[:, None])
        lo = np.minimum(tp, tq)
        hi = np.maximum(tp, tq)
        coll_hit = collinear & (hi >= -PARAM_EPS)
        tmat = np.where(coll_hit, np.maximum(lo, 0.0), tmat)

    idx = np.argmin(tmat, axis=1)
    tmin = tmat[np.arange(K), idx]
    idx = np.where(np.isfinite(tmin), idx, -1).astype(np.int64)
    return tmin, idx


def segment_hits(ox, oy, ux, uy, p0x, p0y, p1x, p1y):
    """Forward hit distance of each ray against one segment (inf = miss)."""
    seg = np.array([[p0x, p0y, p1x, p1y]], dtype=np.float64)
    t, _ = first_hits(ox, oy, ux, uy, seg)
    return t
