"""Direct-search refinement of vertex positions (the "+" step).

Moves the vertices of an extracted map to the positions that minimize the
variance-weighted sum of squared along-ray residuals. The objective is
discontinuous at ray/vertex crossings, so the search is derivative-free:
a Nelder-Mead simplex over all degrees of freedom, optionally followed by
block-coordinate sweeps over single vertices that reuse cached hits against
the non-incident segments (exact, and much cheaper per evaluation).

Interior vertices move freely in the plane. A vertex at the start or end of
an open polyline is constrained to the axis of the ray that generated it,
so it cannot drift into unobserved regions; the search dimension for a map
of J vertices in I open polylines is therefore 2(J - I), and 2J for a
single closed polygon.

Rays that the input map explained must stay explained (and unexplained rays
stay unexplained): candidates pay a miss penalty for each lost ray, and the
returned iterate is the best one whose explained-ray set matches the input.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ._kernels import first_hits, segment_hits
from .geometry import Polyline, PolylineMap
from .scan import Scan
from .sensor_model import ConstantNoise, NoiseModel

logger = logging.getLogger(__name__)

_DEGENERATE = 1e18          # objective value for self-degenerate candidates
_ENDPOINT_MATCH_TOL = 1e-6  # boundary vertices must sit on a scan endpoint


@dataclass(frozen=True)
class OptimizerOptions:
    """Direct-search settings.

    The joint simplex search uses standard Nelder-Mead coefficients
    (reflection 1, expansion 2, contraction 0.5, shrink 0.5) with an initial
    step of simplex_step per coordinate, and stops on a relative objective
    spread below f_rel_tol, a simplex diameter below x_tol, or after
    max_evals_per_dim * dimension evaluations. mode "block" skips the joint
    search and runs only the per-vertex sweeps (the cheap fallback for large
    vertex counts). Sweeps stop when one sweep improves the objective by
    less than polish_rel_tol of its value.
    """

    max_evals_per_dim: int = 200
    simplex_step: float = 0.05
    f_rel_tol: float = 1e-10
    x_tol: float = 1e-6
    miss_penalty_distance: float = 0.5
    mode: str = "joint"
    polish_sweeps: int = 200
    polish_rel_tol: float = 1e-3

    def __post_init__(self):
        if self.mode not in ("joint", "block"):
            raise ValueError("mode must be 'joint' or 'block'")
        for name in ("simplex_step", "f_rel_tol", "x_tol", "miss_penalty_distance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_evals_per_dim <= 0 or self.polish_sweeps < 0:
            raise ValueError("evaluation budgets must be positive")


class VertexParameterization:
    """Mapping between a map's free coordinates and a flat parameter vector.

    Boundary vertices of open polylines carry one parameter (offset along
    the generating ray's axis); all other vertices carry two (x, y).
    """

    def __init__(self, pmap: PolylineMap, scan: Scan):
        coords = pmap.vertices().copy()
        j = coords.shape[0]
        self.coords0 = coords
        self.poly_slices: list[tuple[int, int, bool]] = []
        base = 0
        for p in pmap.polylines:
            self.poly_slices.append((base, base + p.vertex_count, p.closed))
            base += p.vertex_count

        # segment index pairs (lead row, follow row) into the coords array
        seg_i: list[int] = []
        seg_j: list[int] = []
        for lo, hi, closed in self.poly_slices:
            for a in range(lo, hi - 1):
                seg_i.append(a)
                seg_j.append(a + 1)
            if closed:
                seg_i.append(hi - 1)
                seg_j.append(lo)
        self.seg_i = np.array(seg_i, dtype=np.intp)
        self.seg_j = np.array(seg_j, dtype=np.intp)

        # dof layout: per vertex row, either ("free",) or ("axis", a, u)
        endpoints = scan.endpoints
        self.axis_origin = np.zeros((j, 2))
        self.axis_dir = np.zeros((j, 2))
        self.is_axis = np.zeros(j, dtype=bool)
        for lo, hi, closed in self.poly_slices:
            if closed:
                continue
            for row in (lo, hi - 1):
                v = coords[row]
                d2 = np.sum((endpoints - v) ** 2, axis=1)
                k = int(np.argmin(d2))
                if d2[k] > _ENDPOINT_MATCH_TOL ** 2:
                    raise ValueError(
                        "boundary vertex does not coincide with any scan endpoint; "
                        "optimize() expects a map produced by extraction")
                self.is_axis[row] = True
                self.axis_origin[row] = scan.origins[k]
                self.axis_dir[row] = scan.directions[k]
        self.dimension = int(2 * j - np.count_nonzero(self.is_axis))

        # scatter indices for vectorized pack/unpack
        free_pos, axis_pos = [], []
        i = 0
        for row in range(j):
            if self.is_axis[row]:
                axis_pos.append(i)
                i += 1
            else:
                free_pos.append(i)
                i += 2
        self.free_rows = np.nonzero(~self.is_axis)[0]
        self.axis_rows = np.nonzero(self.is_axis)[0]
        self._free_pos = np.array(free_pos, dtype=np.intp)
        self._axis_pos = np.array(axis_pos, dtype=np.intp)

    def pack(self) -> np.ndarray:
        """Parameter vector of the reference coordinates."""
        x = np.empty(self.dimension)
        x[self._free_pos] = self.coords0[self.free_rows, 0]
        x[self._free_pos + 1] = self.coords0[self.free_rows, 1]
        rel = self.coords0[self.axis_rows] - self.axis_origin[self.axis_rows]
        x[self._axis_pos] = np.sum(rel * self.axis_dir[self.axis_rows], axis=1)
        return x

    def unpack(self, x: np.ndarray) -> np.ndarray:
        """Vertex coordinates (J, 2) for a parameter vector."""
        coords = np.empty_like(self.coords0)
        coords[self.free_rows, 0] = x[self._free_pos]
        coords[self.free_rows, 1] = x[self._free_pos + 1]
        coords[self.axis_rows] = (self.axis_origin[self.axis_rows]
                                  + x[self._axis_pos, None] * self.axis_dir[self.axis_rows])
        return coords

    def segments(self, coords: np.ndarray) -> np.ndarray:
        return np.hstack([coords[self.seg_i], coords[self.seg_j]])

    def dof_slices(self) -> list[tuple[int, int, int]]:
        """(vertex row, offset into x, dof count) for every vertex."""
        out = []
        i = 0
        for row in range(self.coords0.shape[0]):
            w = 1 if self.is_axis[row] else 2
            out.append((row, i, w))
            i += w
        return out

    def rebuild_map(self, coords: np.ndarray) -> PolylineMap:
        return PolylineMap([
            Polyline(coords[lo:hi], closed=closed)
            for lo, hi, closed in self.poly_slices
        ])


class _Objective:
    """Weighted squared-residual objective with explained-set tracking."""

    def __init__(self, param: VertexParameterization, scan: Scan,
                 noise: NoiseModel, miss_penalty_distance: float):
        self.param = param
        rows = np.nonzero(scan.reflected)[0]
        self.ox = scan.origins[rows, 0]
        self.oy = scan.origins[rows, 1]
        self.ux = scan.directions[rows, 0]
        self.uy = scan.directions[rows, 1]
        self.r = scan.radii[rows]
        self.inv_var = 1.0 / noise.variances(len(scan))[rows]
        self.penalty = miss_penalty_distance ** 2
        segs0 = param.segments(param.coords0)
        t0, _ = first_hits(self.ox, self.oy, self.ux, self.uy, segs0)
        self.explained0 = np.isfinite(t0)

    def _value_from_t(self, t: np.ndarray) -> tuple[float, bool]:
        hit = np.isfinite(t)
        d = self.r[hit] - t[hit]
        val = float(np.sum(d * d * self.inv_var[hit]))
        lost = self.explained0 & ~hit
        if np.any(lost):
            val += float(np.sum(self.penalty * self.inv_var[lost]))
        same_set = bool(np.array_equal(hit, self.explained0))
        return val, same_set

    def __call__(self, x: np.ndarray) -> tuple[float, bool]:
        coords = self.param.unpack(x)
        segs = self.param.segments(coords)
        dx = segs[:, 2] - segs[:, 0]
        dy = segs[:, 3] - segs[:, 1]
        if np.any(dx * dx + dy * dy < 1e-24):
            return _DEGENERATE, False
        t, _ = first_hits(self.ox, self.oy, self.ux, self.uy, segs)
        return self._value_from_t(t)


def objective(params: np.ndarray, parameterization: VertexParameterization,
              scan: Scan, noise: NoiseModel | None = None,
              miss_penalty_distance: float = 0.5) -> float:
    """Objective value of a parameter vector (see module docstring).

    Candidates with coincident consecutive vertices get a large finite
    penalty value, never a non-finite one.
    """
    noise = noise or ConstantNoise(1.0)
    f = _Objective(parameterization, scan, noise, miss_penalty_distance)
    if params.shape != (parameterization.dimension,):
        raise ValueError(f"expected {parameterization.dimension} parameters")
    return f(np.asarray(params, dtype=np.float64))[0]


def nelder_mead(f, x0: np.ndarray, step: float, max_evals: int,
                f_rel_tol: float, x_tol: float):
    """Minimize f over x with the Nelder-Mead simplex (standard coefficients).

    f returns (value, feasible); the best feasible point seen anywhere is
    tracked and returned alongside the simplex result:
    (x_best_feasible, f_best_feasible, n_evals, converged).
    """
    rho, chi, psi, sigma = 1.0, 2.0, 0.5, 0.5
    n = x0.shape[0]
    evals = 0
    best_x = None
    best_f = math.inf

    def call(x):
        nonlocal evals, best_x, best_f
        val, feasible = f(x)
        evals += 1
        if feasible and val < best_f:
            best_f = val
            best_x = x.copy()
        return val

    sim = np.tile(x0, (n + 1, 1))
    sim[1:] += step * np.eye(n)
    fvals = np.array([call(sim[i]) for i in range(n + 1)])

    converged = False
    while evals < max_evals:
        order = np.argsort(fvals, kind="stable")
        sim = sim[order]
        fvals = fvals[order]
        spread = fvals[-1] - fvals[0]
        if spread <= f_rel_tol * max(abs(fvals[0]), abs(fvals[-1])):
            converged = True
            break
        if np.max(np.abs(sim[1:] - sim[0])) <= x_tol:
            converged = True
            break

        xbar = np.mean(sim[:-1], axis=0)
        xw = sim[-1]
        xr = xbar + rho * (xbar - xw)
        fr = call(xr)
        if fr < fvals[0]:
            xe = xbar + rho * chi * (xbar - xw)
            fe = call(xe)
            if fe < fr:
                sim[-1], fvals[-1] = xe, fe
            else:
                sim[-1], fvals[-1] = xr, fr
        elif fr < fvals[-2]:
            sim[-1], fvals[-1] = xr, fr
        else:
            shrink = True
            if fr < fvals[-1]:
                xc = xbar + psi * rho * (xbar - xw)
                fc = call(xc)
                if fc <= fr:
                    sim[-1], fvals[-1] = xc, fc
                    shrink = False
            else:
                xcc = xbar - psi * (xbar - xw)
                fcc = call(xcc)
                if fcc < fvals[-1]:
                    sim[-1], fvals[-1] = xcc, fcc
                    shrink = False
            if shrink:
                sim[1:] = sim[0] + sigma * (sim[1:] - sim[0])
                fvals[1:] = [call(sim[i]) for i in range(1, n + 1)]

    return best_x, best_f, evals, converged


class _VertexPolisher:
    """Per-vertex refinement with cached hits against non-incident segments.

    For a single moving vertex only its incident segments change, so the
    first-hit distance is min(cached rest-hit, hit on the moving segments).
    This reproduces the full objective exactly at a fraction of the cost.
    """

    def __init__(self, obj: _Objective, opts: OptimizerOptions):
        self.obj = obj
        self.param = obj.param
        self.opts = opts

    def _incident(self, row: int) -> np.ndarray:
        p = self.param
        return np.nonzero((p.seg_i == row) | (p.seg_j == row))[0]

    def polish(self, x: np.ndarray, fx: float) -> tuple[np.ndarray, float]:
        obj = self.obj
        param = self.param
        opts = self.opts
        x = x.copy()
        dofs = param.dof_slices()
        incident = {row: self._incident(row) for row, _, _ in dofs}
        for sweep in range(opts.polish_sweeps):
            f_before = fx
            for row, off, width in dofs:
                coords = param.unpack(x)
                segs = param.segments(coords)
                inc = incident[row]
                rest = np.delete(segs, inc, axis=0)
                if rest.shape[0]:
                    t_rest, _ = first_hits(obj.ox, obj.oy, obj.ux, obj.uy, rest)
                else:
                    t_rest = np.full(obj.ox.shape[0], np.inf)
                other = {param.seg_i[s] if param.seg_j[s] == row else param.seg_j[s]
                         for s in inc}
                neighbors = coords[sorted(other)]

                def sub(xi):
                    if param.is_axis[row]:
                        v = param.axis_origin[row] + xi[0] * param.axis_dir[row]
                    else:
                        v = xi
                    if np.any(np.sum((neighbors - v) ** 2, axis=1) < 1e-24):
                        return _DEGENERATE, False
                    t = t_rest
                    for s in inc:
                        a = v if param.seg_i[s] == row else coords[param.seg_i[s]]
                        b = v if param.seg_j[s] == row else coords[param.seg_j[s]]
                        ts = segment_hits(obj.ox, obj.oy, obj.ux, obj.uy,
                                          a[0], a[1], b[0], b[1])
                        t = np.minimum(t, ts)
                    return obj._value_from_t(t)

                xi0 = x[off:off + width].copy()
                step = max(1e-9, min(opts.simplex_step,
                                     0.2 * math.sqrt(max(fx, 1e-30))))
                xb, fb, _, _ = nelder_mead(sub, xi0, step,
                                           max_evals=80 * width,
                                           f_rel_tol=1e-13, x_tol=1e-12)
                if xb is not None and fb < fx:
                    x[off:off + width] = xb
                    fx = fb
            if f_before - fx <= opts.polish_rel_tol * max(fx, 1e-300):
                break
        return x, fx


def optimize(pmap: PolylineMap, scan: Scan, noise: NoiseModel | None = None,
             opts: OptimizerOptions | None = None) -> PolylineMap:
    """Refine vertex positions of an extracted map against a scan.

    Returns a map with identical topology whose objective is at most the
    input's, with every open-polyline boundary vertex still on its
    generating ray's axis and the explained-ray set unchanged. When the
    simplex search stops on the evaluation budget rather than a tolerance,
    the best iterate found so far is used and a debug message logged.
    """
    noise = noise or ConstantNoise(1.0)
    opts = opts or OptimizerOptions()
    if pmap.is_empty:
        return pmap
    param = VertexParameterization(pmap, scan)
    obj = _Objective(param, scan, noise, opts.miss_penalty_distance)
    x0 = param.pack()
    f0, same = obj(x0)
    if not same:  # cannot happen: explained0 is defined by x0 itself
        raise AssertionError("inconsistent reference hit set")
    best_x, best_f = x0, f0

    if opts.mode == "joint" and param.dimension > 0:
        max_evals = opts.max_evals_per_dim * param.dimension
        xb, fb, evals, converged = nelder_mead(
            obj, x0, opts.simplex_step, max_evals, opts.f_rel_tol, opts.x_tol)
        if not converged:
            logger.debug("simplex search hit the evaluation budget (%d evals); "
                         "keeping the best iterate", evals)
        if xb is not None and fb < best_f:
            best_x, best_f = xb, fb

    if opts.polish_sweeps > 0:
        best_x, best_f = _VertexPolisher(obj, opts).polish(best_x, best_f)

    if best_f > f0:
        best_x, best_f = x0, f0
    return param.rebuild_map(param.unpack(best_x))
