import os
import subprocess
import sys

import numpy as np
import pytest

from combustion1d import kernels


def dense_solve(sub, diag, sup, rhs):
    """Independent oracle: assemble the full matrix and use a dense solver."""
    n = len(diag)
    a = np.zeros((n, n))
    a[np.arange(n), np.arange(n)] = diag
    a[np.arange(1, n), np.arange(n - 1)] = sub
    a[np.arange(n - 1), np.arange(1, n)] = sup
    return np.linalg.solve(a, rhs)


def random_dominant_system(rng, n):
    sub = rng.uniform(-1.0, 1.0, n - 1)
    sup = rng.uniform(-1.0, 1.0, n - 1)
    diag = 2.5 + rng.random(n)
    rhs = rng.standard_normal(n)
    return sub, diag, sup, rhs


@pytest.mark.parametrize("solver", [kernels.thomas_numpy, kernels.thomas_njit,
                                    kernels.thomas])
def test_thomas_matches_dense_oracle(solver):
    rng = np.random.default_rng(42)
    for _ in range(20):
        sub, diag, sup, rhs = random_dominant_system(rng, 16)
        x = solver(sub, diag, sup, rhs)
        assert np.allclose(x, dense_solve(sub, diag, sup, rhs), atol=1e-12)


def test_lanes_agree():
    rng = np.random.default_rng(1)
    sub, diag, sup, rhs = random_dominant_system(rng, 257)
    assert np.allclose(kernels.thomas_numpy(sub, diag, sup, rhs),
                       kernels.thomas_njit(sub, diag, sup, rhs), atol=1e-12)


def test_dominance_checker():
    assert kernels.check_diagonal_dominance(np.array([-1.0]), np.array([3.0, 3.0]),
                                            np.array([-1.0]))
    assert not kernels.check_diagonal_dominance(np.array([-2.0]), np.array([2.0, 2.0]),
                                                np.array([-2.0]))


@pytest.mark.parametrize("flag,expect", [("0", "False"), ("1", "True")])
def test_backend_env_flag(flag, expect):
    env = dict(os.environ, COMBUSTION1D_NUMBA=flag)
    out = subprocess.run(
        [sys.executable, "-c", "from combustion1d import kernels; print(kernels.USE_NUMBA)"],
        capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == expect


def test_fallback_lane_runs_solver_end_to_end():
    env = dict(os.environ, COMBUSTION1D_NUMBA="0")
    code = (
        "from combustion1d import solver, config, grid\n"
        "cfg = config.scenario_config('hot-spot', t_final=0.2, snapshot_every=0.1)\n"
        "traj = solver.run(cfg)\n"
        "print(len(traj.states), traj.final.z.max() <= 1.0 + 1e-10)\n"
    )
    out = subprocess.run([sys.executable, "-c", code], capture_output=True,
                         text=True, env=env, check=True)
    assert out.stdout.split() == ["3", "True"]
