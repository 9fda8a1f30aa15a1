"""Compare the compiled ray-casting kernel against the pure-NumPy fallback.

Times the raw first-hit kernel and a representative end-to-end pipeline
(extract + optimize on a simulated scan) under both backends, and checks
that their results agree bit for bit.

Run:  python benchmarks/compare_backends.py
"""

import time

import numpy as np

from polyscan._kernels import _raycast_np

try:
    from polyscan._kernels import _raycast
except ImportError:
    _raycast = None


def bench_kernel(impl, ox, oy, ux, uy, segs, repeats=50):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        impl.first_hits(ox, oy, ux, uy, segs)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_pipeline(backend_env: str, repeats: int = 3) -> float:
    # subprocess so the import-time backend selection takes effect
    import subprocess
    import sys
    code = (
        "import time, numpy as np\n"
        "from polyscan.simulator import SimConfig, random_polygon, simulate_scan\n"
        "from polyscan.extraction import ExtractionConfig, extract\n"
        "from polyscan.optimization import optimize\n"
        "from polyscan._kernels import BACKEND\n"
        "cfg = SimConfig(n_vertices=12)\n"
        "rng = np.random.default_rng(1)\n"
        "poly = random_polygon(cfg, rng)\n"
        "scan = simulate_scan(poly, cfg, rng)\n"
        "t0 = time.perf_counter()\n"
        "m = extract(scan, ExtractionConfig(r_max=20.0, l_max=1.0, j_max=20))\n"
        "optimize(m, scan)\n"
        "print(BACKEND, time.perf_counter() - t0)\n"
    )
    best = float("inf")
    for _ in range(repeats):
        out = subprocess.run([sys.executable, "-c", code],
                             env={**__import__("os").environ,
                                  "POLYSCAN_PURE_PYTHON": backend_env},
                             capture_output=True, text=True, check=True)
        backend, elapsed = out.stdout.split()
        best = min(best, float(elapsed))
    return best


def main():
    rng = np.random.default_rng(0)
    K, S = 360, 50
    ox, oy = rng.normal(size=K), rng.normal(size=K)
    ang = rng.uniform(0, 2 * np.pi, K)
    ux, uy = np.cos(ang), np.sin(ang)
    segs = rng.normal(scale=5, size=(S, 4))

    t_np = bench_kernel(_raycast_np, ox, oy, ux, uy, segs)
    print(f"first_hits ({K} rays x {S} segments)")
    print(f"  numpy    : {t_np * 1e6:9.1f} us")
    if _raycast is None:
        print("  compiled : not built")
    else:
        t_cy = bench_kernel(_raycast, ox, oy, ux, uy, segs)
        print(f"  compiled : {t_cy * 1e6:9.1f} us   ({t_np / t_cy:.1f}x faster)")
        a = _raycast.first_hits(ox, oy, ux, uy, segs)
        b = _raycast_np.first_hits(ox, oy, ux, uy, segs)
        same = np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
        print(f"  bit-identical results: {same}")

    print("\nextract + optimize (360-ray scan, J=20)")
    t_pipe_np = bench_pipeline("1")
    print(f"  numpy    : {t_pipe_np:9.3f} s")
    if _raycast is not None:
        t_pipe_cy = bench_pipeline("0")
        print(f"  compiled : {t_pipe_cy:9.3f} s   ({t_pipe_np / t_pipe_cy:.1f}x faster)")


if __name__ == "__main__":
    main()
