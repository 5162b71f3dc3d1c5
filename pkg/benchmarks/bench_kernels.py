#!/usr/bin/env python3
"""Benchmark the jitted hot kernels against the NumPy/SciPy fallback lane.

Times the tridiagonal solver (main-solver hot path) and the explicit
reference-integrator chunk (oracle hot path) on both backends, regardless of
which one COMBUSTION1D_NUMBA selected for the library.

Usage: python benchmarks/bench_kernels.py [--sizes 256,1024,4096] [--repeat 200]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from combustion1d import config as config_mod
from combustion1d import kernels, oracle
from combustion1d.grid import Mesh


def time_call(fn, *args, repeat: int, warmup: int = 3) -> float:
    for _ in range(warmup):
        fn(*args)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def bench_thomas(sizes, repeat):
    rng = np.random.default_rng(0)
    print(f"{'thomas solve':>24s} {'n':>6s} {'numpy/scipy':>12s} {'numba':>12s} {'speedup':>8s}")
    for n in sizes:
        diag = 2.0 + rng.random(n)
        sub = -rng.random(n - 1) * 0.5
        sup = -rng.random(n - 1) * 0.5
        rhs = rng.standard_normal(n)
        t_np = time_call(kernels.thomas_numpy, sub, diag, sup, rhs, repeat=repeat)
        t_nb = time_call(kernels.thomas_njit, sub, diag, sup, rhs, repeat=repeat)
        x1 = kernels.thomas_numpy(sub, diag, sup, rhs)
        x2 = kernels.thomas_njit(sub, diag, sup, rhs)
        assert np.allclose(x1, x2, atol=1e-12)
        print(f"{'':>24s} {n:6d} {t_np * 1e6:10.1f}us {t_nb * 1e6:10.1f}us "
              f"{t_np / t_nb:7.2f}x")


def bench_chunk(sizes, t_span=0.05):
    print(f"{'explicit oracle chunk':>24s} {'n':>6s} {'numpy':>12s} {'numba':>12s} {'speedup':>8s}")
    for n in sizes:
        cfg = config_mod.scenario_config(
            "hot-spot", mesh=Mesh(half_length=20.0, n=n), t_final=t_span,
            snapshot_every=t_span)
        state = config_mod.initial_state(cfg)
        ghosts = np.array([list(cfg.bc.ghost_affine(f)) for f in ("u", "theta", "z")],
                          dtype=float)
        mode, alpha, act, th_ign, th_cap, tbl_dx, tbl = oracle._phi_args(cfg.rate)
        p = cfg.fluid
        args = (cfg.mesh.dx, p.a, p.mu, p.kappa, p.q, p.big_k, p.d,
                cfg.rate.sup(), mode, alpha, act, th_ign, th_cap, tbl_dx, tbl,
                ghosts, 0.0, t_span, 10_000_000)

        def run(chunk):
            u, v = state.u.copy(), state.v.copy()
            th, z = state.theta.copy(), state.z.copy()
            t0 = time.perf_counter()
            t, steps, flag = chunk(u, v, th, z, *args)
            return time.perf_counter() - t0, steps, th

        oracle._chunk_jit(state.u.copy(), state.v.copy(), state.theta.copy(),
                          state.z.copy(), *args)  # trigger compilation
        t_nb, steps, th_nb = run(oracle._chunk_jit)
        t_np, _, th_np = run(oracle._chunk_numpy)
        assert np.allclose(th_nb, th_np, rtol=1e-10, atol=1e-12)
        print(f"{'':>24s} {n:6d} {t_np * 1e3:10.1f}ms {t_nb * 1e3:10.1f}ms "
              f"{t_np / t_nb:7.2f}x   ({steps} steps)")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="256,1024,4096")
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    print(f"library backend: {'numba' if kernels.USE_NUMBA else 'numpy'} "
          f"(COMBUSTION1D_NUMBA overrides)")
    bench_thomas(sizes, args.repeat)
    bench_chunk(sizes)


if __name__ == "__main__":
    main()
