#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the individual hot kernels on synthetic simplex-shaped data and an
end-to-end solve of a capacity-expansion fixture on each backend:

    python benchmarks/bench_kernels.py            # medium problem
    python benchmarks/bench_kernels.py --size large
"""
from __future__ import annotations

import argparse
import time

import numpy as np
import scipy.sparse as sp

from shedopt import kernels
from shedopt.lp import build
from shedopt.model import Region, Scenario, Technology
from shedopt.simplex import SolveOptions, solve
from shedopt.voll import sectoral_volls

SIZES = {
    "small": dict(m=2_000, n=3_000, horizon=720),
    "medium": dict(m=10_000, n=15_000, horizon=4380),
    "large": dict(m=20_000, n=30_000, horizon=8760),
}


def timeit(fn, repeat=5):
    best = np.inf
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def kernel_benchmarks(m, n, rng):
    matrix = sp.random(m, n, density=min(0.2, 4.0 / n),
                       random_state=7).tocsc()
    matrix.sort_indices()
    indptr = matrix.indptr.astype(np.int64)
    indices = matrix.indices.astype(np.int64)
    data = matrix.data
    col_of = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    y = rng.normal(size=m)
    out = np.empty(n)

    n_eta = 100
    eta_ptr = [0]
    eta_rows, eta_vals = [], []
    piv_rows = rng.choice(m, n_eta, replace=False).astype(np.int64)
    piv_vals = rng.uniform(0.5, 2.0, n_eta)
    for _ in range(n_eta):
        k = int(rng.integers(5, 40))
        eta_rows.extend(rng.choice(m, k, replace=False))
        eta_vals.extend(rng.normal(size=k))
        eta_ptr.append(len(eta_rows))
    eta_ptr = np.array(eta_ptr, dtype=np.int64)
    eta_rows = np.array(eta_rows, dtype=np.int64)
    eta_vals = np.array(eta_vals)

    d = rng.normal(size=m)
    xb = rng.uniform(0.0, 2.0, m)
    lbb = np.zeros(m)
    ubb = np.where(rng.random(m) < 0.5, np.inf, xb + 1.0)
    bvar = rng.permutation(m).astype(np.int64)

    def bench(impl):
        w = rng.normal(size=m)
        return {
            "col_dots": timeit(lambda: impl.col_dots(
                indptr, indices, data, col_of, y, out)),
            "eta_ftran": timeit(lambda: impl.eta_ftran(
                n_eta, eta_ptr, eta_rows, eta_vals, piv_rows, piv_vals,
                w.copy())),
            "eta_btran": timeit(lambda: impl.eta_btran(
                n_eta, eta_ptr, eta_rows, eta_vals, piv_rows, piv_vals,
                w.copy())),
            "ratio_harris": timeit(lambda: impl.ratio_harris(
                d, xb, lbb, ubb, bvar, 1.0, 1e-9, np.inf, 1e-7)),
        }

    return bench


def solve_fixture(horizon):
    rng = np.random.default_rng(99)
    demand = np.round(rng.uniform(50.0, 150.0, horizon), 3)
    weights = {s: 0.0 for s in ("agriculture", "services", "households",
                                "industry", "transport")}
    weights["services"] = 1.0
    region = Region(id="b1", name="BENCH", country_voll=8.76,
                    sector_voll=sectoral_volls(8.76, weights))
    scn = Scenario(
        regions=(region,),
        technologies=(Technology(id="backup", kind="generator",
                                 carrier_out="electricity",
                                 capex_annual=87.6),),
        links=(),
        profiles={("b1", "backup"): np.ones(horizon)},
        demand={("b1", "electricity", "services"): demand},
        horizon_hours=horizon,
        hours_per_year=8760,
    )
    return build(scn)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", choices=sorted(SIZES), default="medium")
    args = parser.parse_args()
    dims = SIZES[args.size]
    rng = np.random.default_rng(1)

    backends = kernels.available_backends()
    if "numba" not in backends:
        print("numba backend unavailable; benchmarking numpy only")

    bench = kernel_benchmarks(dims["m"], dims["n"], rng)
    results = {name: bench(impl) for name, impl in backends.items()}

    lp = solve_fixture(dims["horizon"])
    solve(solve_fixture(48))     # JIT warm-up outside the timing
    solve_times = {}
    original = kernels.BACKEND
    try:
        for name in backends:
            kernels.use(name)
            start = time.perf_counter()
            solution = solve(lp, SolveOptions())
            solve_times[name] = time.perf_counter() - start
            assert solution.status == "optimal"
    finally:
        kernels.use(original)

    print(f"\nkernel timings, m={dims['m']} n={dims['n']} "
          f"(best of 5, seconds)")
    names = sorted(next(iter(results.values())))
    header = f"{'kernel':<14}" + "".join(f"{b:>12}" for b in results)
    if len(results) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for kernel_name in names:
        row = f"{kernel_name:<14}"
        values = [results[b][kernel_name] for b in results]
        row += "".join(f"{v:12.6f}" for v in values)
        if len(values) == 2 and values[list(results).index('numba')] > 0:
            numpy_t = results["numpy"][kernel_name]
            numba_t = results["numba"][kernel_name]
            row += f"{numpy_t / numba_t:10.1f}x"
        print(row)

    print(f"\nend-to-end solve, horizon={dims['horizon']} "
          f"({lp.n_vars} variables)")
    for name, seconds in solve_times.items():
        print(f"  {name:<8} {seconds:8.2f} s")
    if len(solve_times) == 2:
        print(f"  numpy/numba ratio: "
              f"{solve_times['numpy'] / solve_times['numba']:.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
