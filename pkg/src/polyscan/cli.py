"""Command-line interface: extract, simulate, bench, convert.

Exit codes: 0 success, 1 usage error, 2 input-format error.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import scan_io
from .bench import (DEFAULT_J_VALUES, METHODS, BenchItem, run_bench,
                    run_method, summary_table, write_csv)
from .geometry import Polyline, PolylineMap
from .metrics import EvalReport
from .scan import Scan
from .simulator import (PROTOCOL_VERTEX_COUNTS, SimConfig, random_polygon,
                        GroundTruthPolygon, simulate_scan)
from .svg import render_svg

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FORMAT = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="polyscan",
                     description="Maximum-likelihood polyline maps from 2-D laser scans")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ext = sub.add_parser("extract", help="extract a polyline map from one scan")
    p_ext.add_argument("input", help="scan file (scan JSON or CARMEN log)")
    p_ext.add_argument("--format", choices=("auto", "json", "carmen"), default="auto")
    p_ext.add_argument("--method", choices=METHODS, default="ple+")
    p_ext.add_argument("--max-vertices", type=int, default=10, metavar="J")
    p_ext.add_argument("--lmax", type=float, default=1.0,
                       help="maximum endpoint connection gap in meters")
    p_ext.add_argument("--drm", type=float, default=0.5,
                       help="placeholder residual for vanished intersections")
    p_ext.add_argument("--rmax", type=float, default=None,
                       help="radius cutoff; default: sensor max range from input")
    p_ext.add_argument("--stop-rmse", type=float, default=None,
                       help="stop PLE at this RMSE instead of a vertex budget")
    p_ext.add_argument("--scan-index", type=int, default=0,
                       help="which record of a CARMEN log to use")
    p_ext.add_argument("--svg", default=None, help="also render an SVG here")
    p_ext.add_argument("--seed", type=int, default=0, help="reserved; all methods are deterministic")
    p_ext.add_argument("-o", "--output", default=None, help="map JSON path (default: stdout)")

    p_sim = sub.add_parser("simulate", help="generate ground-truth polygons and noisy scans")
    p_sim.add_argument("--polygon-vertices", type=int, default=6,
                       choices=PROTOCOL_VERTEX_COUNTS)
    p_sim.add_argument("--count", type=int, default=1)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--sigma-r", type=float, default=0.03)
    p_sim.add_argument("--sigma-angle-deg", type=float, default=0.2)
    p_sim.add_argument("--rays", type=int, default=360)
    p_sim.add_argument("--out-dir", default=".")

    p_bench = sub.add_parser("bench", help="evaluate methods over a scan corpus")
    p_bench.add_argument("corpus", help="directory of scan_*.json (+ truth_*.json) files")
    p_bench.add_argument("--methods", default=",".join(METHODS),
                         help="comma-separated subset of " + ",".join(METHODS))
    p_bench.add_argument("--j-values", default=",".join(map(str, DEFAULT_J_VALUES)),
                         help="comma-separated vertex budgets")
    p_bench.add_argument("--lmax", type=float, default=1.0)
    p_bench.add_argument("--drm", type=float, default=0.5)
    p_bench.add_argument("--rmax", type=float, default=None)
    p_bench.add_argument("--workers", type=int, default=None,
                         help="worker processes (PLE_THREADS caps this)")
    p_bench.add_argument("--csv", default=None, help="write per-scan rows here")

    p_conv = sub.add_parser("convert", help="convert a CARMEN log to scan JSON files")
    p_conv.add_argument("input", help="CARMEN log file")
    p_conv.add_argument("--out-dir", default=".")
    p_conv.add_argument("--max-range", type=float, default=80.0)
    p_conv.add_argument("--fov-deg", type=float, default=180.0)
    p_conv.add_argument("--limit", type=int, default=None,
                        help="convert at most this many records")
    return parser


def _load_scan(args) -> Scan:
    path = Path(args.input)
    fmt = args.format
    if fmt == "auto":
        fmt = "json" if path.suffix.lower() == ".json" else "carmen"
    if fmt == "json":
        return scan_io.read_scan(path)
    scans = scan_io.read_carmen_log(path, max_range=args.rmax or 80.0)
    if not scans:
        raise scan_io.ScanFormatError("no FLASER records in the log")
    if not 0 <= args.scan_index < len(scans):
        raise scan_io.ScanFormatError(
            f"scan index {args.scan_index} out of range (log has {len(scans)} records)")
    return scans[args.scan_index]


def _cmd_extract(args) -> int:
    scan = _load_scan(args)
    if args.stop_rmse is not None and args.method != "ple":
        raise _UsageError("--stop-rmse applies to --method ple only")
    if args.method == "ple" and args.stop_rmse is not None:
        from .extraction import ExtractionConfig, extract
        r_max = args.rmax if args.rmax is not None else (scan.sensor_max_range or math.inf)
        pmap = extract(scan, ExtractionConfig(r_max=r_max, l_max=args.lmax,
                                              j_max=2, d_rm=args.drm,
                                              stop_rmse=args.stop_rmse))
    else:
        pmap = run_method(args.method, scan, args.max_vertices,
                          l_max=args.lmax, d_rm=args.drm, r_max=args.rmax)
    doc = scan_io.map_to_dict(pmap)
    if args.output:
        scan_io.write_map(pmap, args.output)
    else:
        import json
        json.dump(doc, sys.stdout, indent=1)
        sys.stdout.write("\n")
    if args.svg:
        render_svg(scan, pmap, args.svg, ray_step=2)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    cfg = SimConfig(n_vertices=args.polygon_vertices, ray_count=args.rays,
                    sigma_angle_deg=args.sigma_angle_deg, sigma_r=args.sigma_r)
    width = max(3, len(str(max(args.count - 1, 0))))
    for i in range(args.count):
        polygon = random_polygon(cfg, rng)
        scan = simulate_scan(polygon, cfg, rng)
        tag = str(i).zfill(width)
        scan_io.write_scan(scan, out / f"scan_{tag}.json")
        truth = PolylineMap([Polyline(polygon.vertices, closed=True)])
        scan_io.write_map(truth, out / f"truth_{tag}.json")
    print(f"wrote {args.count} scan/truth pairs to {out}")
    return EXIT_OK


def _load_corpus(corpus_dir: Path) -> list[BenchItem]:
    items = []
    missing_truth = 0
    for scan_path in sorted(corpus_dir.glob("*.json")):
        name = scan_path.name
        if name.startswith("truth"):
            continue
        try:
            scan = scan_io.read_scan(scan_path)
        except scan_io.ScanFormatError:
            continue
        truth = None
        m = re.match(r"scan(.*)\.json$", name)
        if m:
            truth_path = corpus_dir / f"truth{m.group(1)}.json"
            if truth_path.exists():
                tmap = scan_io.read_map(truth_path)
                if tmap.polyline_count == 1 and tmap.polylines[0].closed:
                    truth = GroundTruthPolygon(tmap.polylines[0].vertices)
            else:
                missing_truth += 1
        items.append(BenchItem(scan_path.stem, scan, truth))
    if missing_truth:
        print(f"note: {missing_truth} scan(s) without ground truth; "
              "their a column is omitted", file=sys.stderr)
    return items


def _cmd_bench(args) -> int:
    corpus_dir = Path(args.corpus)
    if not corpus_dir.is_dir():
        raise scan_io.ScanFormatError(f"{corpus_dir} is not a directory")
    items = _load_corpus(corpus_dir)
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    for m in methods:
        if m not in METHODS:
            raise _UsageError(f"unknown method {m!r}")
    try:
        j_values = tuple(int(j) for j in args.j_values.split(","))
    except ValueError as exc:
        raise _UsageError(f"bad --j-values: {exc}")
    reports = run_bench(items, methods=methods, j_values=j_values,
                        l_max=args.lmax, d_rm=args.drm, r_max=args.rmax,
                        workers=args.workers)
    if args.csv:
        with open(args.csv, "w") as fh:
            write_csv(reports, fh)
    print(summary_table(reports))
    return EXIT_OK


def _cmd_convert(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scans = scan_io.read_carmen_log(args.input, max_range=args.max_range,
                                    fov=math.radians(args.fov_deg))
    if args.limit is not None:
        scans = scans[:args.limit]
    width = max(3, len(str(max(len(scans) - 1, 0))))
    for i, scan in enumerate(scans):
        scan_io.write_scan(scan, out / f"scan_{str(i).zfill(width)}.json")
    print(f"converted {len(scans)} scans to {out}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "extract":
            return _cmd_extract(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "convert":
            return _cmd_convert(args)
        raise _UsageError(f"unknown command {args.command!r}")
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (scan_io.ScanFormatError, scan_io.CarmenFormatError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except FileNotFoundError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
