"""Benchmark the compiled kernels against the NumPy fallback.

The two hot paths are the batched squared well distance (every quadrature
point and every mesh triangle) and its gradient (every minimizer
iteration).  Run:

    python benchmarks/bench_kernels.py [--n 200000] [--repeat 20]
"""

import argparse
import time

import numpy as np

from twowell import _kernels_np
from twowell.fem import DiscreteField, Mesh, MinimizeOptions, minimize
from twowell.piecewise import Rect
from twowell.wells import WellSpec, well_matrices

try:
    from twowell import _kernels as _kernels_cy
except ImportError:
    _kernels_cy = None


def time_call(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(n, repeat):
    rng = np.random.default_rng(0)
    F = rng.uniform(-2.0, 2.0, (n, 2, 2))
    A, B = well_matrices(WellSpec("k2", 0.1))
    rows = []
    backends = [("numpy", _kernels_np)]
    if _kernels_cy is not None:
        backends.append(("cython", _kernels_cy))
    for label, mod in backends:
        t_d = time_call(lambda: mod.dist2_two_wells(F, A, B), repeat)
        t_g = time_call(lambda: mod.dist2_two_wells_grad(F, A, B), repeat)
        rows.append((label, t_d, t_g))
    print(f"batched well distance, n = {n} (best of {repeat}):")
    for label, t_d, t_g in rows:
        print(f"  {label:>7}: dist2 {t_d * 1e3:8.2f} ms   grad {t_g * 1e3:8.2f} ms")
    if len(rows) == 2:
        print(f"  speedup: dist2 {rows[0][1] / rows[1][1]:.2f}x, "
              f"grad {rows[0][2] / rows[1][2]:.2f}x")


def bench_minimizer(iters):
    spec = WellSpec("k2", 0.1)
    mesh = Mesh(96, 96, Rect(0.0, 0.0, 1.0, 1.0))
    opts = MinimizeOptions(max_iter=iters)

    def run():
        return minimize(DiscreteField.identity(mesh), spec, 1e-4, opts)

    from twowell import kernels
    t = time_call(run, 1)
    print(f"minimizer, 96x96 mesh, {iters} iterations "
          f"({kernels.backend_name()} backend): {t:.2f} s")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--min-iters", type=int, default=100)
    args = ap.parse_args()
    bench_kernels(args.n, args.repeat)
    bench_minimizer(args.min_iters)
    if _kernels_cy is None:
        print("note: compiled kernels unavailable; only the fallback was timed")


if __name__ == "__main__":
    main()
