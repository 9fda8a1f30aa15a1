"""Greedy maximum-likelihood polyline extraction.

The initial map connects every pair of neighboring scan endpoints that are
both in range and close enough together; the greedy loop then repeatedly
removes the vertex whose removal costs the least measurement-probability
error, until the stopping rule holds.

Vertex removal errors compare variance-weighted squared residuals before
and after the removal, over exactly the rays whose residuals can change:
the rays whose first hit lies on a segment incident to the vertex, plus the
rays that intersect the replacement chord. A ray that stops intersecting
the map (or that never intersected it) enters the sums with the placeholder
residual d_rm, which makes the restricted sum equal to the full-scan
difference and controls how eagerly the algorithm crops line ends.
"""

from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ._kernels import first_hits, segment_hits
from .geometry import Polyline, PolylineMap
from .scan import Scan
from .sensor_model import ConstantNoise, NoiseModel

logger = logging.getLogger(__name__)

_DEDUPE_EPS = 1e-12


class InvalidRemovalError(ValueError):
    """Removing this vertex would leave its polyline invalid."""


@dataclass(frozen=True)
class ExtractionConfig:
    """Knobs of the extraction step.

    r_max: endpoints measured beyond this radius never become vertices.
    l_max: maximum endpoint gap that still gets connected.
    j_max: vertex budget of the result.
    d_rm: placeholder residual for rays whose intersection vanishes.
    stop_rmse: alternative stopping rule; when set, vertices are removed
        while the scan RMSE stays at or below this threshold and j_max is
        ignored.
    """

    r_max: float
    l_max: float = 1.0
    j_max: int = 10
    d_rm: float = 0.5
    stop_rmse: float | None = None

    def __post_init__(self):
        if not self.r_max > 0:
            raise ValueError("r_max must be positive")
        if not self.l_max > 0:
            raise ValueError("l_max must be positive")
        if self.j_max < 2:
            raise ValueError("j_max must be at least 2")
        if not self.d_rm > 0:
            raise ValueError("d_rm must be positive")
        if self.stop_rmse is not None and not self.stop_rmse > 0:
            raise ValueError("stop_rmse must be positive")


def _connected_runs(valid: np.ndarray, gaps_ok: np.ndarray, full_revolution: bool):
    """Chains of endpoint indices joined by valid consecutive connections.

    gaps_ok[k] refers to the pair (k, k+1); for full-revolution scans the
    last entry refers to the wrap-around pair (K-1, 0). Returns (runs,
    closed): closed is True when every pair connects and the chain is the
    whole revolution.
    """
    k = valid.shape[0]
    if k < 3:
        full_revolution = False
    connect = valid & np.roll(valid, -1) & gaps_ok
    if not full_revolution:
        connect[k - 1] = False
    if k >= 3 and bool(connect.all()):
        return [list(range(k))], True
    runs = []
    starts = np.nonzero(connect & ~np.roll(connect, 1))[0]
    connect_list = connect.tolist()
    for s in starts:
        chain = [int(s)]
        i = int(s)
        while connect_list[i]:
            i = (i + 1) % k
            chain.append(i)
        runs.append(chain)
    return runs, False


def _dedupe_chain(points: np.ndarray, chain: list[int], closed: bool) -> list[int]:
    pts = points[chain]
    gaps = np.hypot(*np.diff(pts, axis=0).T)
    out = [chain[0]] + [idx for idx, g in zip(chain[1:], gaps) if g > _DEDUPE_EPS]
    if closed and len(out) > 1 and np.hypot(*(points[out[-1]] - points[out[0]])) <= _DEDUPE_EPS:
        out.pop()
    return out


def _initial_chains(scan: Scan, r_max: float, l_max: float):
    """(chains, closed) of endpoint indices for the initial map."""
    pts = scan.endpoints
    valid = scan.reflected & (scan.radii <= r_max)
    if valid.sum() < 2:
        return [], False
    nxt = np.roll(pts, -1, axis=0)
    gaps = np.hypot(nxt[:, 0] - pts[:, 0], nxt[:, 1] - pts[:, 1])
    runs, closed = _connected_runs(valid, gaps <= l_max, scan.full_revolution)
    chains = []
    for run in runs:
        chain = _dedupe_chain(pts, run, closed)
        if len(chain) >= (3 if closed else 2):
            chains.append(chain)
        elif closed and len(chain) == 2:
            chains.append(chain)
            closed = False
    return chains, closed


def build_initial_map(scan: Scan, r_max: float, l_max: float) -> PolylineMap:
    """Connect neighboring endpoints into the endpoint-connected initial map.

    Consecutive endpoints are joined when both rays are reflected within
    r_max and the gap is at most l_max. When every pair of a full-revolution
    scan connects (including the wrap-around pair), the result is a single
    closed polygon; otherwise it is a set of open polylines. Scans with
    fewer than two usable endpoints give an empty map.
    """
    chains, closed = _initial_chains(scan, r_max, l_max)
    pts = scan.endpoints
    return PolylineMap([Polyline(pts[chain], closed=closed) for chain in chains])


class _State:
    """Mutable working map: linked vertices plus per-ray first-hit bookkeeping."""

    def __init__(self, scan: Scan, variances: np.ndarray,
                 chains: list[tuple[list[int], bool]], coords: np.ndarray):
        self.scan = scan
        self.var = variances
        n = sum(len(c) for c, _ in chains)
        self.coords = np.empty((n, 2))
        self.prev = np.full(n, -1, dtype=np.int64)
        self.nxt = np.full(n, -1, dtype=np.int64)
        self.alive = np.ones(n, dtype=bool)
        self.pid = np.empty(n, dtype=np.int64)
        self.psize: dict[int, int] = {}
        self.pclosed: dict[int, bool] = {}
        self.J = n
        base = 0
        for p, (chain, closed) in enumerate(chains):
            m = len(chain)
            ids = range(base, base + m)
            self.coords[base:base + m] = coords[chain]
            self.pid[base:base + m] = p
            self.psize[p] = m
            self.pclosed[p] = closed
            for a, b in zip(ids, list(ids)[1:]):
                self.nxt[a] = b
                self.prev[b] = a
            if closed:
                self.nxt[base + m - 1] = base
                self.prev[base] = base + m - 1
            base += m
        k = len(scan)
        self.hit_t = np.full(k, np.inf)
        self.hit_seg = np.full(k, -1, dtype=np.int64)
        self.rays_on: list[set[int]] = [set() for _ in range(n)]
        self._refl_rows = np.nonzero(scan.reflected)[0]
        self._assign_all()

    # -- segment bookkeeping ------------------------------------------------

    def _seg_leads(self, exclude: tuple[int, ...] = ()) -> np.ndarray:
        leads = np.nonzero(self.alive & (self.nxt >= 0))[0]
        if exclude:
            leads = leads[~np.isin(leads, exclude)]
        return leads

    def _segments(self, exclude: tuple[int, ...] = (),
                  chord: tuple[int, int] | None = None):
        """(segs, leads): current segments minus excluded leads, plus chord.

        The chord (p, n) is the replacement segment created by an interior
        removal; after the removal it is led by p, so it carries lead id p.
        """
        leads = self._seg_leads(exclude)
        segs = np.hstack([self.coords[leads], self.coords[self.nxt[leads]]])
        if chord is not None:
            p, n = chord
            row = np.concatenate([self.coords[p], self.coords[n]])[None, :]
            segs = np.vstack([segs, row]) if segs.size else row
            leads = np.concatenate([leads, [p]])
        return segs, leads

    def _assign_all(self):
        rows = self._refl_rows
        segs, leads = self._segments()
        for s in self.rays_on:
            s.clear()
        self.hit_t.fill(np.inf)
        self.hit_seg.fill(-1)
        if rows.size == 0 or segs.shape[0] == 0:
            return
        o = self.scan.origins[rows]
        u = self.scan.directions[rows]
        t, idx = first_hits(o[:, 0], o[:, 1], u[:, 0], u[:, 1], segs)
        hit = idx >= 0
        self.hit_t[rows] = t
        self.hit_seg[rows[hit]] = leads[idx[hit]]
        for k in rows[hit]:
            self.rays_on[self.hit_seg[k]].add(int(k))

    def current_rmse(self) -> float:
        rows = self._refl_rows
        t = self.hit_t[rows]
        good = np.isfinite(t)
        if not np.any(good):
            return math.inf
        d = self.scan.radii[rows][good] - t[good]
        return float(np.sqrt(np.mean(d * d)))

    # -- removal planning ---------------------------------------------------

    def removal_plan(self, v: int):
        """Classify the removal of v: kind, removed segment leads, chord, partner."""
        if not self.alive[v]:
            raise InvalidRemovalError("vertex already removed")
        p, n = int(self.prev[v]), int(self.nxt[v])
        closed = self.pclosed[self.pid[v]]
        size = self.psize[self.pid[v]]
        if closed:
            if size <= 3:
                raise InvalidRemovalError("a 3-vertex closed polygon may not shrink")
            return "interior", (p, v), (p, n), -1
        if size == 2:
            lead = v if n >= 0 else p
            partner = n if n >= 0 else p
            return "pair", (lead,), None, partner
        if p < 0:
            return "head", (v,), None, -1
        if n < 0:
            return "tail", (p,), None, -1
        return "interior", (p, v), (p, n), -1

    def affected_rays(self, v: int) -> np.ndarray:
        """Sorted indices of the rays whose residual can change when v goes."""
        kind, removed, chord, _ = self.removal_plan(v)
        rays: set[int] = set()
        for lead in removed:
            rays |= self.rays_on[lead]
        if chord is not None:
            rows = self._refl_rows
            o = self.scan.origins[rows]
            u = self.scan.directions[rows]
            (px, py), (qx, qy) = self.coords[chord[0]], self.coords[chord[1]]
            tc = segment_hits(o[:, 0], o[:, 1], u[:, 0], u[:, 1], px, py, qx, qy)
            rays |= {int(k) for k in rows[np.isfinite(tc)]}
        return np.array(sorted(rays), dtype=np.int64)

    def removal_error(self, v: int, d_rm: float):
        """(error, plan payload) for removing v from the current map."""
        kind, removed, chord, partner = self.removal_plan(v)
        rows = self.affected_rays(v)
        if rows.size == 0:
            return 0.0, (kind, removed, chord, partner, rows,
                         np.empty(0), np.empty(0, dtype=np.int64))
        segs, leads = self._segments(exclude=removed, chord=chord)
        o = self.scan.origins[rows]
        u = self.scan.directions[rows]
        if segs.shape[0] == 0:
            t_new = np.full(rows.size, np.inf)
            lead_new = np.full(rows.size, -1, dtype=np.int64)
        else:
            t_new, idx = first_hits(o[:, 0], o[:, 1], u[:, 0], u[:, 1], segs)
            lead_new = np.where(idx >= 0, leads[np.maximum(idx, 0)], -1)
        r = self.scan.radii[rows]
        t_old = self.hit_t[rows]
        d_old = np.where(np.isfinite(t_old), r - t_old, d_rm)
        d_new = np.where(np.isfinite(t_new), r - t_new, d_rm)
        e = float(np.sum((d_new * d_new - d_old * d_old) / self.var[rows]))
        return e, (kind, removed, chord, partner, rows, t_new, lead_new)

    def apply(self, v: int, payload) -> set[int]:
        """Execute a removal; returns the alive vertices whose error changed."""
        kind, removed, chord, partner, rows, t_new, lead_new = payload
        p, n = int(self.prev[v]), int(self.nxt[v])
        pid = int(self.pid[v])
        affected: set[int] = set()
        if kind == "interior":
            self.alive[v] = False
            self.nxt[p] = n
            self.prev[n] = p
            self.psize[pid] -= 1
            self.J -= 1
            affected |= {p, n}
        elif kind == "head":
            self.alive[v] = False
            self.prev[n] = -1
            self.nxt[v] = -1
            self.psize[pid] -= 1
            self.J -= 1
            affected.add(n)
        elif kind == "tail":
            self.alive[v] = False
            self.nxt[p] = -1
            self.prev[v] = -1
            self.psize[pid] -= 1
            self.J -= 1
            affected.add(p)
        else:  # pair: the whole 2-vertex polyline goes
            self.alive[v] = False
            self.alive[partner] = False
            self.nxt[v] = self.nxt[partner] = -1
            self.prev[v] = self.prev[partner] = -1
            self.psize[pid] = 0
            self.J -= 2
        for lead in removed:
            self.rays_on[lead] = set()
        for j, k in enumerate(rows):
            k = int(k)
            old = int(self.hit_seg[k])
            if old >= 0 and self.alive[old] and self.nxt[old] >= 0:
                self.rays_on[old].discard(k)
                affected |= {old, int(self.nxt[old])}
            new = int(lead_new[j])
            self.hit_t[k] = t_new[j]
            self.hit_seg[k] = new
            if new >= 0:
                self.rays_on[new].add(k)
                affected |= {new, int(self.nxt[new])}
        return {a for a in affected if self.alive[a]}

    def snapshot(self):
        return (self.prev.copy(), self.nxt.copy(), self.alive.copy(),
                self.hit_t.copy(), self.hit_seg.copy(),
                [set(s) for s in self.rays_on],
                dict(self.psize), self.J)

    def restore(self, snap):
        (self.prev, self.nxt, self.alive, self.hit_t, self.hit_seg,
         self.rays_on, self.psize, self.J) = snap

    def enumeration(self) -> list[list[int]]:
        """Alive vertex ids chained per polyline, in to_map() order."""
        chains = []
        for pid in sorted(self.psize):
            if self.psize[pid] < 2:
                continue
            members = np.nonzero(self.alive & (self.pid == pid))[0]
            if members.size == 0:
                continue
            if self.pclosed[pid]:
                start = int(members.min())
            else:
                start = next(int(m) for m in members if self.prev[m] < 0)
            chain = [start]
            cur = start
            while True:
                cur = int(self.nxt[cur])
                if cur < 0 or cur == start:
                    break
                chain.append(cur)
            chains.append(chain)
        return chains

    def to_map(self) -> PolylineMap:
        return PolylineMap([
            Polyline(self.coords[chain], closed=self.pclosed[self.pid[chain[0]]])
            for chain in self.enumeration()
        ])


def _state_from_scan(scan: Scan, r_max: float, l_max: float,
                     noise: NoiseModel) -> _State:
    chains, closed = _initial_chains(scan, r_max, l_max)
    return _State(scan, noise.variances(len(scan)),
                  [(c, closed) for c in chains], scan.endpoints)


def _state_from_map(pmap: PolylineMap, scan: Scan, noise: NoiseModel) -> _State:
    coords = pmap.vertices()
    chains = []
    base = 0
    for p in pmap.polylines:
        chains.append((list(range(base, base + p.vertex_count)), p.closed))
        base += p.vertex_count
    return _State(scan, noise.variances(len(scan)), chains, coords)


def rays_affected(pmap: PolylineMap, j: int, scan: Scan) -> set[int]:
    """Indices of the rays whose residual can change when vertex j is removed.

    j indexes the polyline-major vertex enumeration of the map. The set
    contains the rays whose first map intersection lies on a segment
    incident to the vertex, plus the rays intersecting the replacement
    chord, so the removal-error sum is complete over changed residuals.
    """
    state = _state_from_map(pmap, scan, ConstantNoise(1.0))
    return {int(k) for k in state.affected_rays(j)}


def vertex_removal_error(pmap: PolylineMap, j: int, scan: Scan,
                         noise: NoiseModel | None = None,
                         d_rm: float = 0.5) -> float:
    """Measurement-probability error of removing vertex j from the map.

    Equals the change in the variance-weighted sum of squared residuals over
    the whole scan, with d_rm standing in for the residual of any ray that
    has no intersection on one side of the comparison. Raises
    InvalidRemovalError when the removal is not allowed (a 3-vertex closed
    polygon may not shrink).
    """
    noise = noise or ConstantNoise(1.0)
    state = _state_from_map(pmap, scan, noise)
    e, _ = state.removal_error(j, d_rm)
    return e


class _ErrorQueue:
    """Min-heap of removal errors with lazy invalidation.

    Entries carry the vertex version at push time; stale or dead entries are
    dropped on pop. Ties break on the vertex construction order, so the
    lowest vertex index wins.
    """

    def __init__(self, n: int):
        self.version = np.zeros(n, dtype=np.int64)
        self.heap: list = []

    def push(self, e: float, v: int, payload):
        heapq.heappush(self.heap, (e, v, self.version[v], payload))

    def invalidate(self, v: int):
        self.version[v] += 1

    def pop_valid(self, state: _State):
        while self.heap:
            e, v, ver, payload = heapq.heappop(self.heap)
            if not state.alive[v] or ver != self.version[v]:
                continue
            try:
                state.removal_plan(v)
            except InvalidRemovalError:
                continue
            return e, v, payload
        return None

    def errors(self, state: _State) -> dict[int, float]:
        """Current (freshest) queued error per alive vertex, for inspection."""
        best: dict[int, float] = {}
        for e, v, ver, _ in self.heap:
            if state.alive[v] and ver == self.version[v]:
                best[v] = e
        return best


def _refresh(queue: _ErrorQueue, state: _State, vertices: Iterable[int], d_rm: float):
    for v in sorted(set(vertices)):
        queue.invalidate(v)
        try:
            e, payload = state.removal_error(v, d_rm)
        except InvalidRemovalError:
            continue
        queue.push(e, v, payload)


def extract(scan: Scan, config: ExtractionConfig,
            noise: NoiseModel | None = None) -> PolylineMap:
    """Extract a polyline map from a scan by greedy vertex removal.

    Starting from the endpoint-connected initial map, repeatedly removes the
    vertex with the smallest removal error and updates the errors of the
    vertices it affected. Stops when the vertex count reaches config.j_max,
    or, when config.stop_rmse is set, right before a removal would push the
    scan RMSE above the threshold. If the budget is below the achievable
    minimum (a closed polygon cannot drop below three vertices), the minimal
    valid map is returned and a warning logged.
    """
    noise = noise or ConstantNoise(1.0)
    state = _state_from_scan(scan, config.r_max, config.l_max, noise)
    queue = _ErrorQueue(state.coords.shape[0])
    _refresh(queue, state, np.nonzero(state.alive)[0], config.d_rm)

    if config.stop_rmse is not None:
        if state.current_rmse() > config.stop_rmse:
            logger.warning("initial map already exceeds stop_rmse=%g", config.stop_rmse)
        while True:
            item = queue.pop_valid(state)
            if item is None:
                break
            _, v, payload = item
            snap = state.snapshot()
            affected = state.apply(v, payload)
            if state.current_rmse() > config.stop_rmse:
                state.restore(snap)
                break
            _refresh(queue, state, affected, config.d_rm)
        return state.to_map()

    while state.J > config.j_max:
        item = queue.pop_valid(state)
        if item is None:
            logger.warning("budget j_max=%d below the achievable minimum; "
                           "returning the minimal valid map (J=%d)",
                           config.j_max, state.J)
            break
        _, v, payload = item
        affected = state.apply(v, payload)
        _refresh(queue, state, affected, config.d_rm)
    return state.to_map()
