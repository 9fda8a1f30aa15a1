"""The three comparison simplifiers: Visvalingam (VVL), iterative endpoint
fit (IEF), and split-and-merge (SAM).

VVL simplifies the endpoint-connected initial map top-down by repeatedly
removing the vertex whose triangle with its two neighbors has the least
area; per polyline the full removal sequence is precomputed, then the
sequences are merged globally by cost. Once an open polyline is down to a
single segment, removing it costs nothing, so solitary straight walls are
the first to go.

IEF builds polylines bottom-up per endpoint cluster: connect the first and
last point, then repeatedly insert the point with the globally largest
perpendicular distance from its segment's line until the vertex budget is
reached. SAM differs only in that after every split each segment is
replaced by the total-least-squares line fit of its assigned points,
re-cropped to the projections of its extreme points; its output segments
are therefore disconnected, and its budget counts their endpoints.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

from .geometry import Polyline, PolylineMap
from .scan import Scan

_DEDUPE_EPS = 1e-12


# ---------------------------------------------------------------------------
# Visvalingam


def _triangle_area(a, b, c) -> float:
    return 0.5 * abs((c[0] - a[0]) * (b[1] - a[1]) - (c[1] - a[1]) * (b[0] - a[0]))


def _vvl_schedule(poly: Polyline) -> list[tuple[float, list[int]]]:
    """Removal schedule [(cost, local vertex indices), ...] of one polyline.

    Open polylines vanish entirely: after all interior removals the final
    two vertices leave together at zero cost. Closed polylines stop at three
    vertices.
    """
    n = poly.vertex_count
    closed = poly.closed
    # plain lists: the loop is scalar-heavy and dominates VVL's runtime
    xs = poly.vertices[:, 0].tolist()
    ys = poly.vertices[:, 1].tolist()
    prev = list(range(-1, n - 1))
    nxt = list(range(1, n + 1))
    if closed:
        prev[0] = n - 1
        nxt[n - 1] = 0
    alive = [True] * n
    size = n

    def area(i: int) -> float:
        p, q = prev[i], nxt[i]
        return 0.5 * abs((xs[q] - xs[p]) * (ys[i] - ys[p])
                         - (ys[q] - ys[p]) * (xs[i] - xs[p]))

    version = [0] * n
    heap = []
    for i in range(n):
        if closed or 0 < i < n - 1:
            heap.append((area(i), i, 0))
    heapq.heapify(heap)

    schedule: list[tuple[float, list[int]]] = []
    floor = 3 if closed else 2
    while size > floor and heap:
        a, i, ver = heapq.heappop(heap)
        if not alive[i] or ver != version[i]:
            continue
        schedule.append((a, [i]))
        alive[i] = False
        size -= 1
        p, q = prev[i], nxt[i]
        nxt[p] = q
        prev[q] = p
        # recompute the two neighbors when they are interior vertices
        for j in (p, q):
            if not alive[j] or (not closed and (j == 0 or j == n - 1)):
                continue
            version[j] += 1
            heapq.heappush(heap, (area(j), j, version[j]))
    if not closed:
        remaining = [i for i in range(n) if alive[i]]
        schedule.append((0.0, remaining))
    return schedule


def visvalingam(initial: PolylineMap, j_max: int) -> PolylineMap:
    """Simplify an initial map to at most j_max vertices by least-area removal.

    Costs compete globally across polylines; within one polyline removals
    follow its own least-area order. When exactly one removal is left and
    the cheapest candidate is a whole remaining segment (two vertices), a
    single-vertex removal elsewhere is preferred to land on the budget
    exactly.
    """
    schedules = [_vvl_schedule(p) for p in initial.polylines]
    heads = [0] * len(schedules)
    removed: list[set[int]] = [set() for _ in schedules]
    total = initial.vertex_count

    while total > j_max:
        need = total - j_max
        fitting = [(sched[heads[pi]][0], pi) for pi, sched in enumerate(schedules)
                   if heads[pi] < len(sched) and len(sched[heads[pi]][1]) <= need]
        if fitting:
            _, pi = min(fitting)
        else:
            # only oversized steps remain; take the cheapest and land just
            # under the budget
            any_heads = [(sched[heads[pi]][0], pi) for pi, sched in enumerate(schedules)
                         if heads[pi] < len(sched)]
            if not any_heads:
                break
            _, pi = min(any_heads)
        _, verts = schedules[pi][heads[pi]]
        removed[pi].update(verts)
        total -= len(verts)
        heads[pi] += 1

    polylines = []
    for pi, p in enumerate(initial.polylines):
        keep = [i for i in range(p.vertex_count) if i not in removed[pi]]
        if len(keep) < 2:
            continue
        polylines.append(Polyline(p.vertices[keep], closed=p.closed))
    return PolylineMap(polylines)


# ---------------------------------------------------------------------------
# shared clustering for the bottom-up methods


def endpoint_clusters(scan: Scan, l_max: float,
                      r_max: float | None = None) -> list[np.ndarray]:
    """Ordered endpoint runs of reflected rays, split at gaps above l_max.

    Max-range readings are removed first; for full-revolution scans the
    first and last run join across the wrap-around when their gap allows.
    Consecutive duplicate points are dropped. Runs keep scan order.
    """
    valid = scan.reflected.copy()
    if r_max is not None:
        valid &= scan.radii <= r_max
    idx = np.nonzero(valid)[0]
    if idx.size == 0:
        return []
    pts = scan.endpoints[idx]
    gaps = np.hypot(*(np.diff(pts, axis=0).T))
    breaks = np.nonzero(gaps > l_max)[0]
    pieces = np.split(np.arange(idx.size), breaks + 1)
    if (scan.full_revolution and len(pieces) > 1 and bool(valid[0]) and bool(valid[-1])
            and np.hypot(*(pts[0] - pts[-1])) <= l_max):
        pieces[0] = np.concatenate([pieces[-1], pieces[0]])
        pieces.pop()
    clusters = []
    for piece in pieces:
        run = pts[piece]
        step = np.hypot(*np.diff(run, axis=0).T)
        keep = np.concatenate([[True], step > _DEDUPE_EPS])
        run = run[keep]
        if run.shape[0] >= 2:
            clusters.append(run)
    return clusters


def _line_distances(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Perpendicular distances of points from the infinite line through a, b."""
    d = b - a
    nrm = math.hypot(d[0], d[1])
    if nrm <= _DEDUPE_EPS:
        return np.hypot(points[:, 0] - a[0], points[:, 1] - a[1])
    return np.abs((points[:, 0] - a[0]) * d[1] - (points[:, 1] - a[1]) * d[0]) / nrm


def _segment_distances(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distances of points from the closed segment [a, b]."""
    d = b - a
    nrm2 = float(d[0] * d[0] + d[1] * d[1])
    if nrm2 <= _DEDUPE_EPS ** 2:
        return np.hypot(points[:, 0] - a[0], points[:, 1] - a[1])
    t = ((points[:, 0] - a[0]) * d[0] + (points[:, 1] - a[1]) * d[1]) / nrm2
    t = np.clip(t, 0.0, 1.0)
    cx = a[0] + t * d[0]
    cy = a[1] + t * d[1]
    return np.hypot(points[:, 0] - cx, points[:, 1] - cy)


def _select_clusters(clusters: list[np.ndarray], j_max: int) -> list[np.ndarray]:
    """Largest clusters first until the two-vertex-per-cluster floor fits."""
    if 2 * len(clusters) <= j_max:
        return clusters
    order = sorted(range(len(clusters)), key=lambda i: -clusters[i].shape[0])
    chosen = sorted(order[: j_max // 2])
    return [clusters[i] for i in chosen]


def ief(clusters: list[np.ndarray], j_max: int) -> PolylineMap:
    """Iterative endpoint fit in budget mode over pre-split point clusters.

    Each cluster starts as the segment between its first and last point;
    the point with the globally largest perpendicular line distance is
    inserted until the total vertex count reaches j_max (or every point
    lies exactly on its segment's line).
    """
    clusters = [c for c in clusters if c.shape[0] >= 2]
    if not clusters or j_max < 2:
        return PolylineMap([])
    clusters = _select_clusters(clusters, j_max)
    breaks = [[0, c.shape[0] - 1] for c in clusters]

    total = sum(len(b) for b in breaks)
    while total < j_max:
        best = None
        for ci, b in enumerate(breaks):
            pts = clusters[ci]
            for lo, hi in zip(b[:-1], b[1:]):
                if hi - lo < 2:
                    continue
                dist = _line_distances(pts[lo + 1:hi], pts[lo], pts[hi])
                k = int(np.argmax(dist))
                if dist[k] > 0 and (best is None or dist[k] > best[0]):
                    best = (float(dist[k]), ci, lo + 1 + k)
        if best is None:
            break
        _, ci, k = best
        b = breaks[ci]
        b.insert(int(np.searchsorted(b, k)), k)
        total += 1
    return PolylineMap([Polyline(clusters[ci][b], closed=False)
                        for ci, b in enumerate(breaks)])


def _tls_segment(points: np.ndarray) -> np.ndarray | None:
    """Total-least-squares line fit cropped to the extreme projections.

    Returns [x0, y0, x1, y1] or None when the fit is degenerate (all points
    coincident).
    """
    c = points.mean(axis=0)
    m = points - c
    cov = m.T @ m
    w, vec = np.linalg.eigh(cov)
    if w[-1] <= 1e-24:
        return None
    u = vec[:, -1]
    s = m @ u
    lo, hi = float(s.min()), float(s.max())
    if hi - lo <= _DEDUPE_EPS:
        return None
    p0 = c + lo * u
    p1 = c + hi * u
    return np.array([p0[0], p0[1], p1[0], p1[1]])


def sam(clusters: list[np.ndarray], j_max: int) -> PolylineMap:
    """Split-and-merge in budget mode: IEF splitting plus per-iteration fits.

    The split structure and its vertex budget are exactly IEF's, but after
    every split each current segment is replaced by the total-least-squares
    fit of its assigned points, cropped to the extreme projections, and the
    split selection measures distances against the fitted segments. The
    returned map consists of the fitted segments, which do not share
    endpoints; its vertex count is therefore about twice the budget of the
    underlying split structure.
    """
    clusters = [c for c in clusters if c.shape[0] >= 2]
    if not clusters or j_max < 2:
        return PolylineMap([])
    clusters = _select_clusters(clusters, j_max)
    breaks = [[0, c.shape[0] - 1] for c in clusters]
    fits: dict[tuple[int, int, int], np.ndarray] = {}

    def refit_all():
        segments = []
        for ci, b in enumerate(breaks):
            pts = clusters[ci]
            for lo, hi in zip(b[:-1], b[1:]):
                seg = _tls_segment(pts[lo:hi + 1])
                key = (ci, lo, hi)
                if seg is None:
                    # degenerate fit: keep the previous segment
                    seg = fits.get(key)
                    if seg is None:
                        seg = np.array([pts[lo][0], pts[lo][1], pts[hi][0], pts[hi][1]])
                fits[key] = seg
                segments.append((ci, lo, hi, seg))
        return segments

    total = sum(len(b) for b in breaks)
    while True:
        segments = refit_all()
        if total >= j_max:
            break
        best = None
        for ci, lo, hi, seg in segments:
            if hi - lo < 2:
                continue
            pts = clusters[ci][lo + 1:hi]
            dist = _segment_distances(pts, seg[:2], seg[2:])
            k = int(np.argmax(dist))
            if dist[k] > 0 and (best is None or dist[k] > best[0]):
                best = (float(dist[k]), ci, lo + 1 + k)
        if best is None:
            break
        _, ci, k = best
        b = breaks[ci]
        b.insert(int(np.searchsorted(b, k)), k)
        total += 1

    segments = refit_all()
    return PolylineMap([Polyline([seg[:2], seg[2:]], closed=False)
                        for _, _, _, seg in segments])
