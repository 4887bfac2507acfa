"""Timing and agreement check for the two integration backends.

Runs the same workloads through the compiled kernel and the pure-Python
twin, reports wall-clock timings, and confirms the outputs are bitwise
identical (same mesh, same states, same dense coefficients).

Usage: python benchmarks/bench_backends.py [--repeats N]
"""

import argparse
import math
import time

import numpy as np

from sntbif import _kernels_py

try:
    from sntbif import _kernels
except ImportError:
    _kernels = None


# (name, kernel_id, packed params, y0, t1)
WORKLOADS = [
    (
        "mlv-spiral",
        0,
        [15.0, -5.0, -3.0, 2.0, 1.0, -7.0, 10.0],
        [1.2, 0.8],
        60.0,
    ),
    (
        "mlv-near-saddle",
        0,
        [15.0, -5.0, -3.0, 2.0, 1.0, -3.0, -11.2],
        [1.51, 1e-6],
        120.0,
    ),
    (
        "st2min-focus",
        2,
        [-0.05, 0.02, math.sqrt(10) / 2, 8 / math.sqrt(10),
         math.sqrt(10) / 15, 1.0, 0.0, 0.0],
        [0.02, 0.0],
        40.0,
    ),
    (
        "cusp-relax",
        3,
        [0.1, -0.3, 1.0],
        [0.7],
        30.0,
    ),
]


def run(kernels, repeats):
    results = {}
    for name, kid, params, y0, t1 in WORKLOADS:
        p = np.asarray(params, dtype=float)
        best = math.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            out = kernels.integrate_span(kid, p, y0, 0.0, t1, 1e-10, 1e-12)
            best = min(best, time.perf_counter() - t0)
        results[name] = (best, out)
    return results


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    py = run(_kernels_py, args.repeats)
    if _kernels is None:
        print("compiled backend not built; python timings only")
        for name, (t, out) in py.items():
            print(f"{name:18s} python {t * 1e3:9.3f} ms  ({len(out[0])} steps)")
        return

    cy = run(_kernels, args.repeats)
    print(f"{'workload':18s} {'cython':>10s} {'python':>10s} "
          f"{'speedup':>8s}  identical")
    for name in py:
        t_py, out_py = py[name]
        t_cy, out_cy = cy[name]
        same = (
            out_py[3] == out_cy[3]
            and np.array_equal(out_py[0], out_cy[0])
            and np.array_equal(out_py[1], out_cy[1])
            and np.array_equal(out_py[2], out_cy[2])
        )
        print(f"{name:18s} {t_cy * 1e3:8.3f}ms {t_py * 1e3:8.3f}ms "
              f"{t_py / t_cy:7.1f}x  {'yes' if same else 'NO'}")


if __name__ == "__main__":
    main()
