#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the pure-Python fallback.

Times the two hot loops (adaptive integration and the interior nullcline
root scan) on representative workloads and prints a comparison table.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

from sipdyn._kernels import _pure

try:
    from sipdyn._kernels import _core
except ImportError:
    _core = None

BASE = (3.0, 0.4, 0.8, 0.4, 0.7, 0.3, 0.4, 0.9, 4.0, -0.5, 0.5)
EXT = (3.0, 0.5, 0.35, 0.4, 0.6, 0.1, 0.5, 0.92, 1.8, 0.1, 0.5)


def time_best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workloads():
    def integrate_coexistence(impl):
        impl.integrate(BASE, [2.0, 1.0, 3.0], 0.0, 500.0, 1e-8, 1e-10, 1e-8, 20.0, 1e-6, 10**8)

    def integrate_collapse(impl):
        impl.integrate(EXT, [1.0, 1.0, 0.52], 0.0, 500.0, 1e-8, 1e-10, 1e-8, 20.0, 1e-6, 10**8)

    def root_scan_batch(impl):
        for i in range(200):
            L = -1.0 + 2.0 * i / 199.0
            p = BASE[:9] + (L,) + BASE[10:]
            impl.nullcline_root_scan(p, 0.4445, 3.9999, 2001, 1e-12)

    return [
        ("integrate, coexistence run (t_end=500)", integrate_coexistence),
        ("integrate, collapse run (t_end=500)", integrate_collapse),
        ("root scan x200 (n=2001)", root_scan_batch),
    ]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if _core is None:
        print("compiled core not available; showing pure-Python timings only")
    print(f"{'workload':44s} {'pure':>10s} {'compiled':>10s} {'speedup':>9s}")
    for name, fn in workloads():
        t_pure = time_best(lambda: fn(_pure), args.repeat)
        if _core is not None:
            t_core = time_best(lambda: fn(_core), args.repeat)
            print(f"{name:44s} {t_pure*1e3:9.2f}ms {t_core*1e3:9.2f}ms {t_pure/t_core:8.1f}x")
        else:
            print(f"{name:44s} {t_pure*1e3:9.2f}ms {'-':>10s} {'-':>9s}")


if __name__ == "__main__":
    main()
