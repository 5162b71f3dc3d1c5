"""Staggered 1D Lagrangian mesh, core state types, and discrete calculus.

Velocity lives on nodes, the cell fields (specific volume u, temperature
theta, reactant fraction z) on cell centers.  The unbounded domain is
truncated to [-L, L] (or [0, L] on the half line) and the far field
(u, v, theta, z) = (1, 0, 1, 0) is imposed through ghost-cell values and
pinned boundary velocities.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .model import FluidParams, ReactionRate

__all__ = [
    "WHOLE_LINE",
    "HALF_LINE_INSULATED",
    "HALF_LINE_ISOTHERMAL",
    "Mesh",
    "State",
    "BoundaryCondition",
    "StepControl",
    "Trajectory",
    "dnode_to_cell",
    "dcell_to_node",
    "node_average",
    "cell_average",
    "node_weights",
    "l2_dev",
    "h1_dev",
    "interval_integral",
    "interval_range",
]

Z_BOUND_TOL = 1e-10

WHOLE_LINE = "whole-line"
HALF_LINE_INSULATED = "half-line-insulated"
HALF_LINE_ISOTHERMAL = "half-line-isothermal"

_BC_KINDS = (WHOLE_LINE, HALF_LINE_INSULATED, HALF_LINE_ISOTHERMAL)
_Z_ENDS = ("dirichlet0", "neumann0")


@dataclass(frozen=True)
class Mesh:
    """Uniform mesh over [-L, L] (whole line) or [0, L] (half line)."""

    half_length: float
    n: int
    kind: str = "whole-line"

    def __post_init__(self) -> None:
        if self.kind not in ("whole-line", "half-line"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.n < 8:
            raise ValueError(f"need at least 8 cells, got {self.n}")
        if not self.half_length > 0.0:
            raise ValueError(f"half_length must be positive, got {self.half_length!r}")

    @property
    def x_lo(self) -> float:
        return -self.half_length if self.kind == "whole-line" else 0.0

    @property
    def x_hi(self) -> float:
        return self.half_length

    @property
    def dx(self) -> float:
        return (self.x_hi - self.x_lo) / self.n

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.x_lo, self.x_hi, self.n + 1)

    @property
    def cells(self) -> np.ndarray:
        nodes = self.nodes
        return 0.5 * (nodes[:-1] + nodes[1:])


@dataclass
class State:
    """The four discrete fields at one time instant.

    u, theta, z hold n cell values; v holds n+1 node values.  ``dt`` records
    the step size that produced this state (0 for initial data).
    """

    t: float
    u: np.ndarray
    v: np.ndarray
    theta: np.ndarray
    z: np.ndarray
    dt: float = 0.0

    def copy(self) -> "State":
        return State(self.t, self.u.copy(), self.v.copy(), self.theta.copy(),
                     self.z.copy(), self.dt)

    def check_shapes(self, mesh: Mesh) -> None:
        n = mesh.n
        if not (len(self.u) == len(self.theta) == len(self.z) == n and len(self.v) == n + 1):
            raise ValueError(
                f"field lengths {len(self.u)}/{len(self.v)}/{len(self.theta)}/{len(self.z)} "
                f"do not match mesh with n={n}"
            )

    def check_invariants(self, mesh: Mesh) -> None:
        self.check_shapes(mesh)
        if not np.all(self.u > 0.0):
            raise ValueError("specific volume must stay positive")
        if not np.all(self.theta > 0.0):
            raise ValueError("temperature must stay positive")
        if self.z.min() < -Z_BOUND_TOL or self.z.max() > 1.0 + Z_BOUND_TOL:
            raise ValueError("reactant fraction left [0, 1] beyond tolerance")


@dataclass(frozen=True)
class BoundaryCondition:
    """Ghost-cell policy and velocity pins for the three supported setups.

    whole-line             far field (1, 0, 1, 0) at both ends
    half-line-insulated    wall at x=0 with v=0 and zero heat flux
    half-line-isothermal   wall at x=0 with v=0 and theta=1
    The half-line wall takes z either pinned to zero (dirichlet0) or
    flux-free (neumann0); the far end always carries the far-field values.
    """

    kind: str = WHOLE_LINE
    z_end: str = "dirichlet0"

    def __post_init__(self) -> None:
        if self.kind not in _BC_KINDS:
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if self.z_end not in _Z_ENDS:
            raise ValueError(f"unknown z_end {self.z_end!r}")

    @property
    def mesh_kind(self) -> str:
        return "whole-line" if self.kind == WHOLE_LINE else "half-line"

    def ghost_affine(self, name: str) -> tuple[tuple[float, float], tuple[float, float]]:
        """Ghost values as affine maps (A, B): ghost = A + B * boundary cell.

        Lets the implicit solvers fold the ghost into matrix diagonal and
        right-hand side without special-casing each setup.
        """
        far = {"u": 1.0, "theta": 1.0, "z": 0.0}[name]
        if self.kind == WHOLE_LINE:
            return (far, 0.0), (far, 0.0)
        # half line: wall on the left, far field on the right
        if name == "u":
            left = (0.0, 1.0)  # no natural wall condition; reflect
        elif name == "theta":
            if self.kind == HALF_LINE_INSULATED:
                left = (0.0, 1.0)  # zero flux
            else:
                left = (2.0, -1.0)  # wall value pinned to 1
        else:  # z
            left = (0.0, -1.0) if self.z_end == "dirichlet0" else (0.0, 1.0)
        return left, (far, 0.0)

    def cell_ghosts(self, name: str, g: np.ndarray) -> tuple[float, float]:
        """Ghost-cell values (left, right) for cell field ``name``."""
        (al, bl), (ar, br) = self.ghost_affine(name)
        return al + bl * float(g[0]), ar + br * float(g[-1])


@dataclass(frozen=True)
class StepControl:
    """Adaptive time-step policy for the semi-implicit solver."""

    dt_max: float = 0.1
    safety: float = 0.5
    theta_floor: float = 1e-6
    max_halvings: int = 20

    def __post_init__(self) -> None:
        if not 0.0 < self.safety <= 1.0:
            raise ValueError(f"safety must lie in (0, 1], got {self.safety!r}")
        if not self.theta_floor > 0.0:
            raise ValueError("theta_floor must be positive")
        if not self.dt_max > 0.0:
            raise ValueError("dt_max must be positive")
        if self.max_halvings < 0:
            raise ValueError("max_halvings must be nonnegative")


@dataclass
class Trajectory:
    """Snapshot sequence of one run plus everything needed to audit it."""

    mesh: Mesh
    bc: BoundaryCondition
    params: FluidParams
    rate: ReactionRate
    states: list[State] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    @property
    def final(self) -> State:
        return self.states[-1]

    def max_dt(self) -> float:
        recorded = self.meta.get("max_dt")
        if recorded is not None:
            return float(recorded)
        return float(max((s.dt for s in self.states), default=0.0))


# -- discrete differential operators -----------------------------------------


def dnode_to_cell(f: np.ndarray, mesh: Mesh) -> np.ndarray:
    """First difference of a node field, landing on cells; exact for affine f."""
    if len(f) != mesh.n + 1:
        raise ValueError(f"expected {mesh.n + 1} node values, got {len(f)}")
    return (f[1:] - f[:-1]) / mesh.dx


def dcell_to_node(g: np.ndarray, mesh: Mesh, ghosts: tuple[float, float]) -> np.ndarray:
    """First difference of a cell field, landing on nodes.

    ``ghosts`` holds the two virtual cell values just outside the domain,
    normally supplied by BoundaryCondition.cell_ghosts.
    """
    if len(g) != mesh.n:
        raise ValueError(f"expected {mesh.n} cell values, got {len(g)}")
    gl, gr = ghosts
    out = np.empty(mesh.n + 1)
    out[1:-1] = g[1:] - g[:-1]
    out[0] = g[0] - gl
    out[-1] = gr - g[-1]
    out /= mesh.dx
    return out


def node_average(f: np.ndarray, mesh: Mesh) -> np.ndarray:
    """Average a node field onto cells."""
    if len(f) != mesh.n + 1:
        raise ValueError(f"expected {mesh.n + 1} node values, got {len(f)}")
    return 0.5 * (f[:-1] + f[1:])


def cell_average(g: np.ndarray, mesh: Mesh, ghosts: tuple[float, float]) -> np.ndarray:
    """Average a cell field onto nodes, using ghost cells at the ends."""
    if len(g) != mesh.n:
        raise ValueError(f"expected {mesh.n} cell values, got {len(g)}")
    gl, gr = ghosts
    out = np.empty(mesh.n + 1)
    out[1:-1] = 0.5 * (g[:-1] + g[1:])
    out[0] = 0.5 * (gl + g[0])
    out[-1] = 0.5 * (g[-1] + gr)
    return out


def node_weights(mesh: Mesh) -> np.ndarray:
    """Quadrature weights of the dual cells owned by each node."""
    w = np.full(mesh.n + 1, mesh.dx)
    w[0] = w[-1] = 0.5 * mesh.dx
    return w


# -- norms and interval integrals ---------------------------------------------


def l2_dev(state: State, mesh: Mesh) -> float:
    """Discrete L2 norm of the deviation (u-1, v, theta-1, z)."""
    state.check_shapes(mesh)
    w = node_weights(mesh)
    acc = mesh.dx * (np.sum((state.u - 1.0) ** 2)
                     + np.sum((state.theta - 1.0) ** 2)
                     + np.sum(state.z**2))
    acc += np.sum(w * state.v**2)
    return float(np.sqrt(acc))


def h1_dev(state: State, mesh: Mesh, bc: BoundaryCondition | None = None) -> float:
    """Discrete H1 norm of the deviation: l2_dev plus first differences."""
    if bc is None:
        bc = BoundaryCondition()
    w = node_weights(mesh)
    du = dcell_to_node(state.u, mesh, bc.cell_ghosts("u", state.u))
    dth = dcell_to_node(state.theta, mesh, bc.cell_ghosts("theta", state.theta))
    dz = dcell_to_node(state.z, mesh, bc.cell_ghosts("z", state.z))
    dv = dnode_to_cell(state.v, mesh)
    acc = l2_dev(state, mesh) ** 2
    acc += np.sum(w * (du**2 + dth**2 + dz**2)) + mesh.dx * np.sum(dv**2)
    return float(np.sqrt(acc))


def interval_integral(g: np.ndarray, k: int, mesh: Mesh) -> float:
    """Midpoint-rule integral of a cell field over [k, k+1].

    Cells that straddle an endpoint contribute pro rata.
    """
    if len(g) != mesh.n:
        raise ValueError(f"expected {mesh.n} cell values, got {len(g)}")
    lo, hi = float(k), float(k) + 1.0
    eps = 1e-12 * max(1.0, mesh.half_length)
    if lo < mesh.x_lo - eps or hi > mesh.x_hi + eps:
        raise ValueError(f"interval [{lo}, {hi}] outside the domain "
                         f"[{mesh.x_lo}, {mesh.x_hi}]")
    edges = mesh.x_lo + mesh.dx * np.arange(mesh.n + 1)
    left = np.maximum(edges[:-1], lo)
    right = np.minimum(edges[1:], hi)
    weights = np.clip(right - left, 0.0, None)
    return float(np.sum(weights * g))


def interval_range(mesh: Mesh) -> range:
    """Integer k with [k, k+1] inside the truncated domain."""
    lo = int(np.ceil(mesh.x_lo - 1e-12))
    hi = int(np.floor(mesh.x_hi + 1e-12))
    return range(lo, hi)
