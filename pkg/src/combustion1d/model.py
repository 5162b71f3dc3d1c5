"""Physical constants of the mixture and the Arrhenius reaction-rate family.

The reaction rate is ``theta**alpha * exp(-act/theta)`` above an ignition
temperature and zero below it, so it jumps at ``theta_ign``.  A smoothed
variant (convolution with a compactly supported bump of width ``eta``) is
tabulated once at construction; evaluation then interpolates the table, which
keeps repeated calls cheap and bit-reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["FluidParams", "ReactionRate"]


@dataclass(frozen=True)
class FluidParams:
    """Constant transport and reaction coefficients; all strictly positive.

    a      gas constant times molecular weight (pressure p = a*theta/u)
    mu     bulk viscosity
    kappa  heat conduction
    q      energy release per unit of burnt reactant
    big_k  reaction rate coefficient
    d      species diffusion
    """

    a: float = 1.0
    mu: float = 1.0
    kappa: float = 1.0
    q: float = 0.5
    big_k: float = 5.0
    d: float = 0.1

    def __post_init__(self) -> None:
        for name in ("a", "mu", "kappa", "q", "big_k", "d"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"FluidParams.{name} must be a positive real, got {value!r}")


def _bump(s: np.ndarray) -> np.ndarray:
    """Smooth bump exp(-1/(1-s^2)) on (-1, 1), zero outside."""
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def _simpson(y: np.ndarray, h: float) -> float:
    """Composite Simpson on a uniform grid with an even interval count."""
    if len(y) % 2 == 0:
        raise ValueError("simpson needs an odd number of samples")
    return float(h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-2:2].sum()))


# Normalization of the unit bump, computed once (the integrand is smooth and
# flat at the endpoints, so Simpson converges fast).
_BUMP_NODES = 2049
_BUMP_S = np.linspace(-1.0, 1.0, _BUMP_NODES)
_BUMP_NORM = _simpson(_bump(_BUMP_S), 2.0 / (_BUMP_NODES - 1))


@dataclass(frozen=True)
class ReactionRate:
    """Arrhenius rate with ignition threshold, optional smoothing width eta.

    eta == 0 evaluates the discontinuous law directly; eta > 0 evaluates a
    table of the smoothed law built by quadrature at construction time.
    Evaluations clamp the temperature argument at ``theta_cap`` so that the
    rate is bounded by its maximum over [0, theta_cap].
    """

    alpha: float = 1.0
    act: float = 1.0
    theta_ign: float = 1.2
    eta: float = 0.0
    theta_cap: float = 8.0
    _grid: np.ndarray | None = field(default=None, repr=False, compare=False)
    _table: np.ndarray | None = field(default=None, repr=False, compare=False)
    _sup: float | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.alpha >= 0.0:
            raise ValueError(f"ReactionRate.alpha must be >= 0, got {self.alpha!r}")
        if not self.act > 0.0:
            raise ValueError(f"ReactionRate.act must be > 0, got {self.act!r}")
        if not self.theta_ign > 0.0:
            raise ValueError(f"ReactionRate.theta_ign must be > 0, got {self.theta_ign!r}")
        if not self.eta >= 0.0:
            raise ValueError(f"ReactionRate.eta must be >= 0, got {self.eta!r}")
        if not self.theta_cap >= self.theta_ign:
            raise ValueError(
                f"ReactionRate.theta_cap must be >= theta_ign, got {self.theta_cap!r}"
            )
        if self.eta > 0.0 and self._table is None:
            grid, table = self._build_table(self.eta)
            object.__setattr__(self, "_grid", grid)
            object.__setattr__(self, "_table", table)
        if self._sup is None:
            if self.eta > 0.0:
                sup = float(self._table.max())
            else:
                scan = np.linspace(0.0, self.theta_cap, 4097)
                sup = float(self._phi_raw(scan).max())
            object.__setattr__(self, "_sup", sup)

    # -- raw law -----------------------------------------------------------

    def _phi_raw(self, theta: np.ndarray) -> np.ndarray:
        th = np.minimum(theta, self.theta_cap)
        out = np.zeros_like(th)
        active = th > self.theta_ign
        ta = th[active]
        out[active] = ta**self.alpha * np.exp(-self.act / ta)
        return out

    def _build_table(self, eta: float) -> tuple[np.ndarray, np.ndarray]:
        """Tabulate the smoothed rate on [0, theta_cap] at spacing <= eta/10.

        The smoothed value at theta is the integral of J(s) * raw(theta - eta*s)
        over s in (-1, 1) with J the normalized bump.  The raw law jumps where
        theta - eta*s crosses the ignition threshold, so the s-range is split
        there and each smooth piece is integrated by Simpson.
        """
        m = max(int(math.ceil(self.theta_cap / (eta / 10.0))), 16) + 1
        grid = np.linspace(0.0, self.theta_cap, m)
        nodes_per_piece = 129  # >= 64 quadrature nodes across the support

        def piece(theta: float, lo: float, hi: float) -> float:
            if hi - lo <= 0.0:
                return 0.0
            s = np.linspace(lo, hi, nodes_per_piece)
            y = _bump(s) / _BUMP_NORM * self._phi_raw(theta - eta * s)
            return _simpson(y, (hi - lo) / (nodes_per_piece - 1))

        table = np.empty(m)
        for i, theta in enumerate(grid):
            s_jump = (theta - self.theta_ign) / eta
            if s_jump <= -1.0:
                table[i] = 0.0  # argument below threshold on the whole support
            elif s_jump >= 1.0:
                table[i] = piece(theta, -1.0, 1.0)
            else:
                # raw law is nonzero only for s < s_jump
                table[i] = piece(theta, -1.0, s_jump)
        table.flags.writeable = False
        grid.flags.writeable = False
        return grid, table

    # -- public surface ------------------------------------------------------

    def phi(self, theta):
        """Evaluate the rate at one temperature or an array of them."""
        arr = np.asarray(theta, dtype=float)
        if np.any(arr < 0.0):
            raise ValueError("phi expects nonnegative temperatures")
        if self.eta == 0.0:
            out = self._phi_raw(arr)
        else:
            out = np.interp(np.minimum(arr, self.theta_cap), self._grid, self._table)
        return float(out) if np.isscalar(theta) or arr.ndim == 0 else out

    def mollify(self, eta: float) -> "ReactionRate":
        """Return the smoothed rate of width eta (built from the raw law)."""
        if not eta > 0.0:
            raise ValueError(f"mollification width must be > 0, got {eta!r}")
        return ReactionRate(
            alpha=self.alpha,
            act=self.act,
            theta_ign=self.theta_ign,
            eta=eta,
            theta_cap=self.theta_cap,
        )

    def sup(self) -> float:
        """Maximum of the evaluated rate over [0, theta_cap].

        Feeds the reaction constraint of the adaptive time-step controller;
        computed once at construction.
        """
        return self._sup
