"""Regenerate data/sample_office.log, a small CARMEN-style log.

The scene is a 10 x 6 m room with a cabinet protruding from the top wall
and a 1 m doorway in the right wall; rays through the doorway leave the
sensor range and show up as max-range readings. Five FLASER records share
the same pose with independent radial noise; a comment, an ODOM line, and
one malformed FLASER record exercise the parser's skip path.
"""

import sys
from pathlib import Path

import numpy as np

from polyscan._kernels import first_hits

MAX_RANGE = 8.19
POSE = (5.0, 2.0, np.pi / 2)
N_RAYS = 361
SIGMA_R = 0.01

WALLS = np.array([
    # room boundary, counterclockwise, with a doorway gap in the right wall
    [10.0, 3.0, 10.0, 6.0],
    [10.0, 6.0, 0.0, 6.0],
    [0.0, 6.0, 0.0, 0.0],
    [0.0, 0.0, 10.0, 0.0],
    [10.0, 0.0, 10.0, 2.0],
    # cabinet against the top wall
    [4.0, 6.0, 4.0, 5.0],
    [4.0, 5.0, 6.0, 5.0],
    [6.0, 5.0, 6.0, 6.0],
])


def main(out_path: str) -> None:
    rng = np.random.default_rng(20240917)
    x, y, theta = POSE
    bearings = theta - np.pi / 2 + np.arange(N_RAYS) * (np.pi / (N_RAYS - 1))
    ox = np.full(N_RAYS, x)
    oy = np.full(N_RAYS, y)
    ux = np.cos(bearings)
    uy = np.sin(bearings)
    t, idx = first_hits(ox, oy, ux, uy, WALLS)

    lines = [
        "# sample office log (synthetic, CARMEN format)",
        "PARAM laser_max_range 8.19",
    ]
    ts = 100.0
    for rec in range(5):
        r = t + rng.normal(0.0, SIGMA_R, N_RAYS)
        r = np.where(np.isfinite(t) & (r < MAX_RANGE), np.maximum(r, 0.05), MAX_RANGE)
        readings = " ".join(f"{v:.3f}" for v in r)
        lines.append(f"FLASER {N_RAYS} {readings} {x:.6f} {y:.6f} {theta:.6f} "
                     f"{x:.6f} {y:.6f} {theta:.6f} {ts:.6f} sample {ts:.6f}")
        lines.append(f"ODOM {x:.6f} {y:.6f} {theta:.6f} 0 0 0 {ts:.6f} sample {ts:.6f}")
        ts += 0.2
    # a malformed record: declared count does not match the token count
    lines.append("FLASER 10 1.0 2.0 3.0")
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {out} ({len(lines)} lines)")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/sample_office.log")
