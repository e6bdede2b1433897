#!/usr/bin/env python3
"""Benchmark: compiled kernels vs the numpy fallback.

Times the two hot per-coordinate resolvent kernels on a range of vector
sizes, plus one end-to-end variational-sum sweep, and prints a table with
the speedup of the compiled extension.

    python benchmarks/bench_kernels.py [--sizes 16,256,4096,65536] [--repeat 7]
"""

import argparse
import sys
import time

import numpy as np

from monosum._kernels import fallback

try:
    from monosum._kernels import _speedups
except ImportError:
    _speedups = None


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_smooth(impl, w, repeat):
    return best_time(lambda: impl.smooth_resolvent_core(0, 0.5, 2.0, 0.0, 0.7, w, 1e-12), repeat)


def bench_pl(impl, w, repeat):
    lam = 0.7
    xs = np.array([0.0])
    lo = np.array([-1.0])
    hi = np.array([1.0])
    seg_x = np.array([0.0, 0.0])
    seg_y = np.array([-1.0, 1.0])
    seg_s = np.array([0.0, 0.0])
    bounds = np.empty(2)
    bounds[0::2] = xs + lam * lo
    bounds[1::2] = xs + lam * hi
    return best_time(
        lambda: impl.pl_resolvent_core(bounds, seg_x, seg_y, seg_s, xs, lam, w), repeat
    )


def bench_vsum(repeat):
    """End-to-end: variational-sum resolvent for Laplacian + cubic (n=32)."""
    from monosum.monotone import LinearOperator, SeparableOperator
    from monosum.graphs import PolyGraph
    from monosum.problems import GridSpec, build_laplacian
    from monosum.sums import FilterPath, variational_sum_resolvent

    n = 32
    A = LinearOperator(build_laplacian(GridSpec(1, n)))
    B = SeparableOperator(PolyGraph(0.0, 1.0), n)
    w = np.random.default_rng(0).standard_normal(n)
    w /= np.linalg.norm(w)
    path = FilterPath.diagonal(40)
    return best_time(lambda: variational_sum_resolvent(A, B, w, path=path, tol=1e-7), repeat)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="16,256,4096,65536")
    parser.add_argument("--repeat", type=int, default=7)
    args = parser.parse_args(argv)
    sizes = [int(s) for s in args.sizes.split(",")]

    if _speedups is None:
        print("compiled extension not available; showing fallback timings only")
    rng = np.random.default_rng(0)
    header = f"{'kernel':<18}{'n':>8}{'fallback':>12}{'compiled':>12}{'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, bench in (("smooth (cubic)", bench_smooth), ("piecewise-linear", bench_pl)):
        for n in sizes:
            w = 3.0 * rng.standard_normal(n)
            t_fb = bench(fallback, w, args.repeat)
            if _speedups is not None:
                t_cp = bench(_speedups, w, args.repeat)
                print(
                    f"{name:<18}{n:>8}{t_fb * 1e6:>10.1f}us{t_cp * 1e6:>10.1f}us"
                    f"{t_fb / t_cp:>8.1f}x"
                )
            else:
                print(f"{name:<18}{n:>8}{t_fb * 1e6:>10.1f}us{'-':>12}{'-':>9}")

    # end-to-end sweep, switching the backend the library sees
    import monosum.graphs as graphs_mod

    t_active = bench_vsum(max(3, args.repeat // 2))
    saved = graphs_mod._kernels
    try:

        class _FallbackShim:
            KIND_ODD_POLY = fallback.KIND_ODD_POLY
            KIND_SATURATING = fallback.KIND_SATURATING
            smooth_resolvent_core = staticmethod(fallback.smooth_resolvent_core)
            pl_resolvent_core = staticmethod(fallback.pl_resolvent_core)

        graphs_mod._kernels = _FallbackShim
        t_fb = bench_vsum(max(3, args.repeat // 2))
    finally:
        graphs_mod._kernels = saved
    active = "compiled" if _speedups is not None else "fallback"
    print(f"\nvariational sweep (n=32, depth-40 path):")
    print(f"  active backend ({active}): {t_active * 1e3:.1f} ms")
    print(f"  forced fallback:          {t_fb * 1e3:.1f} ms")
    return 0


if __name__ == "__main__":
    sys.exit(main())
