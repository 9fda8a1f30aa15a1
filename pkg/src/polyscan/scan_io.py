"""File formats: scan JSON, polyline-map JSON, CSV rows, CARMEN log import.

The native scan format is a JSON document:

    {
      "format": "scan/1",
      "sensor": {"x": 0.0, "y": 0.0, "heading": 0.0, "max_range": 80.0},
      "full_revolution": true,
      "rays": [{"bearing": 0.01, "range": 4.57, "max_range": false}, ...]
    }

Bearings are absolute world bearings in radians, sorted ascending; ranges
are in meters and positive. The map format is:

    {"format": "polyline-map/1",
     "polylines": [{"closed": false, "vertices": [[x, y], ...]}, ...]}

CARMEN logs are imported from their FLASER records:

    FLASER n r_1 ... r_n x y theta odom_x odom_y odom_theta ...

with n range readings spread uniformly over the field of view (pi for the
classic 180-degree scanners), centered on the recorded laser heading.
Readings at or beyond the given max range are flagged as max-range rays.
"""

from __future__ import annotations

import json
import logging
import math
from typing import IO, Iterator

import numpy as np

from .geometry import Polyline, PolylineMap
from .scan import Scan

logger = logging.getLogger(__name__)

SCAN_FORMAT = "scan/1"
MAP_FORMAT = "polyline-map/1"


class ScanFormatError(ValueError):
    """The document is not a valid scan or map file."""


class CarmenFormatError(ValueError):
    """The CARMEN stream is unreadable at a given line."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def scan_to_dict(scan: Scan) -> dict:
    bearings = scan.bearings
    # keep bearings continuous (monotone) rather than wrapped to (-pi, pi]
    unwrapped = np.unwrap(bearings)
    origin = scan.origins[0]
    if not np.all(scan.origins == origin[None, :]):
        raise ScanFormatError("scan file format requires a single sensor position")
    heading = 0.5 * (unwrapped[0] + unwrapped[-1])
    return {
        "format": SCAN_FORMAT,
        "sensor": {
            "x": float(origin[0]),
            "y": float(origin[1]),
            "heading": float(heading),
            "max_range": scan.sensor_max_range,
        },
        "full_revolution": bool(scan.full_revolution),
        "rays": [
            {"bearing": float(b), "range": float(r), "max_range": bool(m)}
            for b, r, m in zip(unwrapped, scan.radii, scan.max_range)
        ],
    }


def scan_from_dict(doc: dict) -> Scan:
    try:
        if doc.get("format") != SCAN_FORMAT:
            raise ScanFormatError(f"expected format {SCAN_FORMAT!r}")
        sensor = doc["sensor"]
        rays = doc["rays"]
        bearings = np.array([r["bearing"] for r in rays], dtype=np.float64)
        ranges = np.array([r["range"] for r in rays], dtype=np.float64)
        flags = np.array([bool(r.get("max_range", False)) for r in rays])
    except (KeyError, TypeError) as exc:
        raise ScanFormatError(f"malformed scan document: {exc}") from exc
    if np.any(np.diff(bearings) < 0):
        raise ScanFormatError("rays must be sorted by bearing")
    if np.any(ranges <= 0):
        raise ScanFormatError("ranges must be positive")
    return Scan.from_polar((sensor["x"], sensor["y"]), bearings, ranges, flags,
                           full_revolution=bool(doc.get("full_revolution", False)),
                           sensor_max_range=sensor.get("max_range"))


def write_scan(scan: Scan, path) -> None:
    with open(path, "w") as fh:
        json.dump(scan_to_dict(scan), fh, indent=1)
        fh.write("\n")


def read_scan(path) -> Scan:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScanFormatError(f"invalid JSON: {exc}") from exc
    return scan_from_dict(doc)


def map_to_dict(pmap: PolylineMap) -> dict:
    return {
        "format": MAP_FORMAT,
        "polylines": [
            {"closed": bool(p.closed), "vertices": p.vertices.tolist()}
            for p in pmap.polylines
        ],
    }


def map_from_dict(doc: dict) -> PolylineMap:
    try:
        if doc.get("format") != MAP_FORMAT:
            raise ScanFormatError(f"expected format {MAP_FORMAT!r}")
        polylines = [Polyline(p["vertices"], closed=bool(p.get("closed", False)))
                     for p in doc["polylines"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ScanFormatError(f"malformed map document: {exc}") from exc
    return PolylineMap(polylines)


def write_map(pmap: PolylineMap, path) -> None:
    with open(path, "w") as fh:
        json.dump(map_to_dict(pmap), fh, indent=1)
        fh.write("\n")


def read_map(path) -> PolylineMap:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScanFormatError(f"invalid JSON: {exc}") from exc
    return map_from_dict(doc)


def parse_carmen_log(stream: IO[str], max_range: float = 80.0,
                     fov: float = math.pi) -> Iterator[Scan]:
    """Scans from the FLASER records of a CARMEN log stream.

    Rays are spread uniformly over fov radians centered on the recorded
    laser heading; readings at or beyond max_range (or non-positive) are
    flagged max-range. Malformed records are skipped with a logged warning;
    an unreadable stream raises CarmenFormatError with the line number.
    """
    line_no = 0
    while True:
        line_no += 1
        try:
            line = stream.readline()
        except (OSError, UnicodeDecodeError) as exc:
            raise CarmenFormatError(line_no, str(exc)) from exc
        if not line:
            return
        tokens = line.split()
        if not tokens or tokens[0] != "FLASER":
            continue
        try:
            n = int(tokens[1])
            if n < 2 or len(tokens) < 2 + n + 3:
                raise ValueError(f"expected {n} readings plus a laser pose")
            ranges = np.array([float(t) for t in tokens[2:2 + n]])
            x, y, theta = (float(tokens[2 + n]), float(tokens[3 + n]),
                           float(tokens[4 + n]))
        except ValueError as exc:
            logger.warning("skipping malformed FLASER record at line %d: %s",
                           line_no, exc)
            continue
        flags = (ranges >= max_range) | (ranges <= 0.0)
        ranges = np.where(flags, max_range, ranges)
        bearings = theta - fov / 2.0 + np.arange(n) * (fov / (n - 1))
        yield Scan.from_polar((x, y), bearings, ranges, flags,
                              full_revolution=False, sensor_max_range=max_range)


def read_carmen_log(path, max_range: float = 80.0,
                    fov: float = math.pi) -> list[Scan]:
    with open(path) as fh:
        return list(parse_carmen_log(fh, max_range=max_range, fov=fov))
