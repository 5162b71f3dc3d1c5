"""Hot numeric kernels with a numba path and a NumPy/SciPy fallback.

The backend is chosen once at import from the environment variable
``COMBUSTION1D_NUMBA``: "1" forces the jitted kernels (import error if numba
is missing), "0" forces the fallback, anything else auto-detects.  Both lanes
are importable by name so the benchmark script can time them side by side.
"""
from __future__ import annotations

import os

import numpy as np
from scipy.linalg import solve_banded


def _pick_backend() -> bool:
    flag = os.environ.get("COMBUSTION1D_NUMBA", "").strip()
    if flag == "0":
        return False
    if flag == "1":
        import numba  # noqa: F401  (raise early if unavailable)

        return True
    try:
        import numba  # noqa: F401

        return True
    except ImportError:
        return False


USE_NUMBA = _pick_backend()

if USE_NUMBA:
    from numba import njit
else:  # decorator that leaves the python function as-is (fallback lane)

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


def thomas_numpy(sub: np.ndarray, diag: np.ndarray, sup: np.ndarray,
                 rhs: np.ndarray) -> np.ndarray:
    """Tridiagonal solve via LAPACK banded storage (fallback lane).

    sub has len(diag)-1 entries below the diagonal, sup the same above.
    """
    n = len(diag)
    ab = np.zeros((3, n))
    ab[0, 1:] = sup
    ab[1, :] = diag
    ab[2, :-1] = sub
    return solve_banded((1, 1), ab, rhs)


@njit(cache=True)
def _thomas_jit(sub, diag, sup, rhs):  # pragma: no cover - exercised via thomas()
    n = diag.shape[0]
    cp = np.empty(n - 1)
    dp = np.empty(n)
    cp[0] = sup[0] / diag[0]
    dp[0] = rhs[0] / diag[0]
    for i in range(1, n - 1):
        m = diag[i] - sub[i - 1] * cp[i - 1]
        cp[i] = sup[i] / m
        dp[i] = (rhs[i] - sub[i - 1] * dp[i - 1]) / m
    m = diag[n - 1] - sub[n - 2] * cp[n - 2]
    dp[n - 1] = (rhs[n - 1] - sub[n - 2] * dp[n - 2]) / m
    x = np.empty(n)
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def thomas_njit(sub: np.ndarray, diag: np.ndarray, sup: np.ndarray,
                rhs: np.ndarray) -> np.ndarray:
    """Tridiagonal solve via the jitted Thomas recurrence (numba lane)."""
    return _thomas_jit(np.ascontiguousarray(sub), np.ascontiguousarray(diag),
                       np.ascontiguousarray(sup), np.ascontiguousarray(rhs))


if USE_NUMBA:
    thomas = thomas_njit
else:
    thomas = thomas_numpy


def check_diagonal_dominance(sub: np.ndarray, diag: np.ndarray,
                             sup: np.ndarray) -> bool:
    """Strict row diagonal dominance of the assembled tridiagonal system."""
    n = len(diag)
    off = np.zeros(n)
    off[:-1] += np.abs(sup)
    off[1:] += np.abs(sub)
    return bool(np.all(np.abs(diag) > off))
