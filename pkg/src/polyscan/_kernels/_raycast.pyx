# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled ray-casting kernels.

Same contract and same arithmetic as _raycast_np; see that module for the
semantics of hits, endpoint tolerance, and collinear overlaps.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fabs, sqrt

cnp.import_array()

cdef double PARAM_EPS = 1e-12


cdef inline double _seg_hit(double ox, double oy, double ux, double uy,
                            double px, double py, double qx, double qy) nogil:
    """Forward hit parameter of one ray against one segment, INFINITY on miss."""
    cdef double ex = qx - px
    cdef double ey = qy - py
    cdef double seg_len = sqrt(ex * ex + ey * ey)
    cdef double relx = px - ox
    cdef double rely = py - oy
    cdef double denom = ux * ey - uy * ex
    cdef double num_t = relx * ey - rely * ex
    cdef double num_s = relx * uy - rely * ux
    cdef double t, s, tp, tq, lo, hi

    if fabs(denom) <= PARAM_EPS * seg_len:
        # parallel; check collinearity, then overlap with [0, inf)
        if fabs(num_s) <= PARAM_EPS * (1.0 + fabs(relx) + fabs(rely)):
            tp = relx * ux + rely * uy
            tq = tp + (ex * ux + ey * uy)
            if tp <= tq:
                lo = tp
                hi = tq
            else:
                lo = tq
                hi = tp
            if hi >= -PARAM_EPS:
                return lo if lo > 0.0 else 0.0
        return INFINITY

    t = num_t / denom
    s = num_s / denom
    if t >= -PARAM_EPS and s >= -PARAM_EPS and s <= 1.0 + PARAM_EPS:
        return t if t > 0.0 else 0.0
    return INFINITY


def first_hits(cnp.ndarray[cnp.float64_t, ndim=1] ox,
               cnp.ndarray[cnp.float64_t, ndim=1] oy,
               cnp.ndarray[cnp.float64_t, ndim=1] ux,
               cnp.ndarray[cnp.float64_t, ndim=1] uy,
               cnp.ndarray[cnp.float64_t, ndim=2] segs):
    """First forward intersection of each ray with any of the segments.

    Returns (t, idx); t is inf and idx is -1 where a ray hits nothing.
    Ties in t go to the lower segment index.
    """
    cdef Py_ssize_t K = ox.shape[0]
    cdef Py_ssize_t S = segs.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tmin = np.full(K, np.inf)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] idx = np.full(K, -1, dtype=np.int64)
    cdef Py_ssize_t k, i
    cdef double best, cand

    if K == 0 or S == 0:
        return tmin, idx

    with nogil:
        for k in range(K):
            best = INFINITY
            for i in range(S):
                cand = _seg_hit(ox[k], oy[k], ux[k], uy[k],
                                segs[i, 0], segs[i, 1], segs[i, 2], segs[i, 3])
                if cand < best:
                    best = cand
                    idx[k] = i
            tmin[k] = best
    return tmin, idx


def segment_hits(cnp.ndarray[cnp.float64_t, ndim=1] ox,
                 cnp.ndarray[cnp.float64_t, ndim=1] oy,
                 cnp.ndarray[cnp.float64_t, ndim=1] ux,
                 cnp.ndarray[cnp.float64_t, ndim=1] uy,
                 double p0x, double p0y, double p1x, double p1y):
    """Forward hit distance of each ray against one segment (inf = miss)."""
    cdef Py_ssize_t K = ox.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] t = np.empty(K)
    cdef Py_ssize_t k
    with nogil:
        for k in range(K):
            t[k] = _seg_hit(ox[k], oy[k], ux[k], uy[k], p0x, p0y, p1x, p1y)
    return t
