"""SVG rendering of scans and extracted maps (rays red, map blue)."""

from __future__ import annotations

import numpy as np

from .geometry import PolylineMap
from .scan import Scan


def render_svg(scan: Scan, pmap: PolylineMap | None, path,
               width: float = 800.0, ray_step: int = 1) -> None:
    """Write an SVG overlaying the scan and, optionally, a polyline map.

    Reflected rays are thin red lines with dots at their endpoints,
    max-range rays are gray, and map polylines are drawn in blue on top.
    ray_step draws every ray_step-th ray only.
    """
    pts = [scan.origins, scan.endpoints]
    if pmap is not None and not pmap.is_empty:
        pts.append(pmap.vertices())
    allpts = np.vstack(pts)
    lo = allpts.min(axis=0)
    hi = allpts.max(axis=0)
    span = np.maximum(hi - lo, 1e-6)
    margin = 0.05 * float(span.max())
    lo -= margin
    hi += margin
    span = hi - lo
    scale = width / span[0]
    height = span[1] * scale

    def sx(x):
        return (x - lo[0]) * scale

    def sy(y):
        # svg y axis points down
        return height - (y - lo[1]) * scale

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
           f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">',
           f'<rect width="100%" height="100%" fill="white"/>']
    dot = max(1.5, 0.003 * width)
    for k in range(0, len(scan), max(1, ray_step)):
        ox, oy = scan.origins[k]
        ex, ey = scan.endpoints[k]
        color = "#bbbbbb" if scan.max_range[k] else "#dd4444"
        out.append(f'<line x1="{sx(ox):.2f}" y1="{sy(oy):.2f}" '
                   f'x2="{sx(ex):.2f}" y2="{sy(ey):.2f}" '
                   f'stroke="{color}" stroke-width="0.5"/>')
        if not scan.max_range[k]:
            out.append(f'<circle cx="{sx(ex):.2f}" cy="{sy(ey):.2f}" '
                       f'r="{dot * 0.6:.2f}" fill="#dd4444"/>')
    if pmap is not None:
        for poly in pmap:
            v = poly.vertices
            coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in v)
            tag = "polygon" if poly.closed else "polyline"
            out.append(f'<{tag} points="{coords}" fill="none" '
                       f'stroke="#2255cc" stroke-width="2"/>')
            for x, y in v:
                out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" '
                           f'r="{dot:.2f}" fill="#2255cc"/>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
