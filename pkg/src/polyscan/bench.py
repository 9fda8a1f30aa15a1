"""Benchmark harness: run methods over a scan corpus and tabulate metrics.

Each (method, J, scan) cell runs the extraction pipeline alone under the
timer (no I/O) and scores the result: along-ray RMSE, explained-ray
fraction f, area error a when ground truth is available, wall time, and
the output vertex count. Rows are ordered by (method, J, scan) regardless
of worker completion order; the PLE_THREADS environment variable caps the
worker pool.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baselines import endpoint_clusters, ief, sam, visvalingam
from .extraction import ExtractionConfig, build_initial_map, extract
from .geometry import PolylineMap
from .metrics import (DegenerateEstimateError, EvalReport,
                      NoIntersectingRaysError, a_value_report, f_value,
                      rmse, summarize)
from .optimization import optimize
from .scan import Scan
from .simulator import GroundTruthPolygon

METHODS = ("ple", "ple+", "vvl", "ief", "sam")
DEFAULT_J_VALUES = (10, 20, 30, 40, 50)


@dataclass(frozen=True)
class BenchItem:
    """One corpus entry: a scan plus optional ground truth."""

    scan_id: str
    scan: Scan
    truth: GroundTruthPolygon | None = None


def run_method(method: str, scan: Scan, j: int, l_max: float = 1.0,
               d_rm: float = 0.5, r_max: float | None = None) -> PolylineMap:
    """Run one extraction method at one vertex budget."""
    if r_max is None:
        r_max = scan.sensor_max_range or math.inf
    if method == "ple":
        return extract(scan, ExtractionConfig(r_max=r_max, l_max=l_max,
                                              j_max=j, d_rm=d_rm))
    if method == "ple+":
        pmap = extract(scan, ExtractionConfig(r_max=r_max, l_max=l_max,
                                              j_max=j, d_rm=d_rm))
        return optimize(pmap, scan)
    if method == "vvl":
        return visvalingam(build_initial_map(scan, r_max, l_max), j)
    if method == "ief":
        return ief(endpoint_clusters(scan, l_max, r_max), j)
    if method == "sam":
        return sam(endpoint_clusters(scan, l_max, r_max), j)
    raise ValueError(f"unknown method {method!r}")


def evaluate(method: str, j: int, item: BenchItem, pmap: PolylineMap,
             wall_time: float) -> EvalReport:
    try:
        r = rmse(item.scan, pmap)
    except NoIntersectingRaysError:
        r = math.nan
    f = f_value(item.scan, pmap)
    a = None
    flagged = False
    if item.truth is not None:
        try:
            a, flagged = a_value_report(pmap, item.truth)
        except DegenerateEstimateError:
            a, flagged = None, True
    return EvalReport(method=method, j_target=j, scan_id=item.scan_id,
                      rmse=r, f_value=f, a_value=a,
                      vertex_count=pmap.vertex_count, wall_time=wall_time,
                      a_flagged=flagged)


def _bench_cell(args) -> EvalReport:
    (method, j, scan_id, origins, endpoints, max_range, full_rev, smax,
     truth_vertices, l_max, d_rm, r_max) = args
    scan = Scan(origins, endpoints, max_range, full_rev, smax)
    truth = GroundTruthPolygon(truth_vertices) if truth_vertices is not None else None
    item = BenchItem(scan_id, scan, truth)
    t0 = time.perf_counter()
    pmap = run_method(method, scan, j, l_max, d_rm, r_max)
    elapsed = time.perf_counter() - t0
    return evaluate(method, j, item, pmap, elapsed)


def _worker_count(requested: int | None) -> int:
    n = requested or os.cpu_count() or 1
    cap = os.environ.get("PLE_THREADS")
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def run_bench(items: list[BenchItem], methods=METHODS,
              j_values=DEFAULT_J_VALUES, l_max: float = 1.0,
              d_rm: float = 0.5, r_max: float | None = None,
              workers: int | None = None) -> list[EvalReport]:
    """All (method, J, scan) evaluations, in deterministic row order."""
    tasks = []
    for method in methods:
        for j in j_values:
            for item in items:
                truth_v = item.truth.vertices if item.truth is not None else None
                tasks.append((method, j, item.scan_id,
                              item.scan.origins, item.scan.endpoints,
                              item.scan.max_range, item.scan.full_revolution,
                              item.scan.sensor_max_range, truth_v,
                              l_max, d_rm, r_max))
    n_workers = _worker_count(workers)
    if n_workers <= 1 or len(tasks) <= 1:
        return [_bench_cell(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(_bench_cell, tasks, chunksize=4))


def write_csv(reports: list[EvalReport], fh) -> None:
    fh.write(EvalReport.CSV_HEADER + "\n")
    for rep in reports:
        fh.write(rep.csv_row() + "\n")


def summary_table(reports: list[EvalReport]) -> str:
    """Per-(method, J) means with standard errors, as a printable table."""
    groups: dict[tuple[str, int], list[EvalReport]] = {}
    for rep in reports:
        groups.setdefault((rep.method, rep.j_target), []).append(rep)
    have_a = any(r.a_value is not None for r in reports)
    head = f"{'method':8s} {'J':>4s} {'rmse_m':>18s} {'f':>14s}"
    if have_a:
        head += f" {'a':>18s}"
    head += f" {'time_s':>12s} {'n':>4s}"
    lines = [head]
    for (method, j) in sorted(groups):
        reps = groups[(method, j)]
        rs = np.array([r.rmse for r in reps])
        rs = rs[~np.isnan(rs)]
        r_mean, r_se = summarize(rs) if rs.size else (math.nan, math.nan)
        f_mean, f_se = summarize([r.f_value for r in reps])
        t_mean, _ = summarize([r.wall_time for r in reps])
        row = (f"{method:8s} {j:4d} {r_mean:11.4f}±{r_se:6.4f} "
               f"{f_mean:8.3f}±{f_se:5.3f}")
        if have_a:
            avals = [r.a_value for r in reps if r.a_value is not None]
            if avals:
                a_mean, a_se = summarize(avals)
                row += f" {a_mean:11.4f}±{a_se:6.4f}"
            else:
                row += f" {'-':>18s}"
        row += f" {t_mean:12.4f} {len(reps):4d}"
        lines.append(row)
    return "\n".join(lines)
