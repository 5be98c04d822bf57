#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Times the three hot paths — the 801-year forward simulation, the
Kalman-filter log-likelihood, and a full posterior evaluation — under both
backends and prints the speedups.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from emproj.io import ingest_observations
from emproj.kernels import _fallback
from emproj.paramspace import join_params
from emproj.posterior import PosteriorEvaluator
from emproj.scenarios import load_scenario
from emproj.stats import residual_grid, stationary_covariance
from emproj.model import simulate
from emproj.synthetic import TRUE_MODEL, TRUE_STAT

try:
    from emproj.kernels import _core
except ImportError:
    _core = None


def timeit(fn, repeat):
    fn()  # warm up
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=500)
    args = parser.parse_args()

    if _core is None:
        print("compiled backend not built; only timing the fallback")

    p = TRUE_MODEL.to_vector()
    n = 2500 - 1700 + 1
    bufs = [np.empty(n) for _ in range(6)]

    rows = []

    def add(name, compiled_fn, python_fn):
        tp = timeit(python_fn, args.repeat)
        if compiled_fn is not None:
            tc = timeit(compiled_fn, args.repeat)
            rows.append((name, tc * 1e6, tp * 1e6, tp / tc))
        else:
            rows.append((name, float("nan"), tp * 1e6, float("nan")))

    add("simulate 1700-2500",
        (lambda: _core.simulate_core(p, 1700, 2500, *bufs)) if _core else None,
        lambda: _fallback.simulate_core(p, 1700, 2500, *bufs))

    from importlib import resources
    ref = resources.files("emproj.data").joinpath("synthetic_observations.csv")
    with resources.as_file(ref) as path:
        obs = ingest_observations(path)
    traj = simulate(TRUE_MODEL, 1700, 2014)
    resid, mask = residual_grid(traj, obs)
    mask8 = np.ascontiguousarray(mask, dtype=np.uint8)
    sx = stationary_covariance(TRUE_STAT.A, TRUE_STAT.w_diag)
    A = np.ascontiguousarray(TRUE_STAT.A)

    add("filter loglik (195 yr)",
        (lambda: _core.filter_loglik(A, TRUE_STAT.w_diag, TRUE_STAT.d_diag,
                                     sx, resid, mask8)) if _core else None,
        lambda: _fallback.filter_loglik(A, TRUE_STAT.w_diag, TRUE_STAT.d_diag,
                                        sx, resid, mask8))

    scenario = load_scenario("standard")
    ev = PosteriorEvaluator(scenario, obs)
    x = np.asarray(join_params(TRUE_MODEL, TRUE_STAT))
    u = ev.space.to_unconstrained(x)

    def posterior_with(backend):
        # the evaluator picks up whatever backend emproj.kernels selected at
        # import; to compare fairly we monkeypatch the kernel functions
        import emproj.kernels as k
        saved = (k.simulate_core, k.filter_loglik)
        if backend == "python":
            k.simulate_core = _fallback.simulate_core
            k.filter_loglik = _fallback.filter_loglik
        else:
            k.simulate_core = _core.simulate_core
            k.filter_loglik = _core.filter_loglik
        try:
            return timeit(lambda: ev.log_posterior_transformed(u), args.repeat)
        finally:
            k.simulate_core, k.filter_loglik = saved

    tp = posterior_with("python")
    if _core is not None:
        tc = posterior_with("compiled")
        rows.append(("posterior evaluation", tc * 1e6, tp * 1e6, tp / tc))
    else:
        rows.append(("posterior evaluation", float("nan"), tp * 1e6,
                     float("nan")))

    print(f"{'kernel':28s} {'compiled (us)':>14s} {'python (us)':>13s} "
          f"{'speedup':>8s}")
    for name, tc, tp, ratio in rows:
        print(f"{name:28s} {tc:14.1f} {tp:13.1f} {ratio:7.1f}x")


if __name__ == "__main__":
    main()
