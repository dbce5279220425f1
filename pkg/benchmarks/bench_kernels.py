#!/usr/bin/env python3
"""Benchmark: compiled stepping kernel vs the NumPy fallback.

Runs the constrained leapfrog over a perturbed latitude loop at several grid
sizes and reports steps/second per backend plus the speedup.  Usage:

    python benchmarks/bench_kernels.py [--steps 4000] [--sizes 256,1024,4096]
"""

import argparse
import time

import numpy as np

from solitonsim._kernels import get_backend
from solitonsim.grid import PeriodicGrid1D
from solitonsim.profiles import latitude_profile, tangent_perturbation


def bench(kernel, n, steps, eps=0.0):
    grid = PeriodicGrid1D(n)
    u0 = tangent_perturbation(latitude_profile(grid, 2, 0.25), 0.01, seed=7)
    u = np.ascontiguousarray(u0.values)
    v = np.zeros_like(u)
    dt = grid.h / 4.0
    kernel.leapfrog_step_sphere(u, v, grid.h, dt, eps)  # warm-up
    t0 = time.perf_counter()
    for _ in range(steps):
        kernel.leapfrog_step_sphere(u, v, grid.h, dt, eps)
    elapsed = time.perf_counter() - t0
    return steps / elapsed, u


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--steps", type=int, default=4000)
    parser.add_argument("--sizes", default="256,1024,4096")
    parser.add_argument("--epsilon", type=float, default=0.0)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    pure = get_backend("pure")
    try:
        compiled = get_backend("compiled")
    except ImportError:
        compiled = None
        print("compiled kernel unavailable; benchmarking the fallback only\n")

    header = f"{'n':>6}  {'pure steps/s':>14}"
    if compiled:
        header += f"  {'compiled steps/s':>18}  {'speedup':>8}  {'max diff':>10}"
    print(header)
    for n in sizes:
        rate_p, u_p = bench(pure, n, args.steps, args.epsilon)
        line = f"{n:>6}  {rate_p:>14.0f}"
        if compiled:
            rate_c, u_c = bench(compiled, n, args.steps, args.epsilon)
            diff = float(np.max(np.abs(u_p - u_c)))
            line += f"  {rate_c:>18.0f}  {rate_c / rate_p:>7.1f}x  {diff:>10.2e}"
        print(line)


if __name__ == "__main__":
    main()
