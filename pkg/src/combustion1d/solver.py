"""Semi-implicit operator-split time stepping for the four-field system.

Per accepted step, in order: momentum (backward-Euler viscosity, explicit
pressure gradient), mass (exact discrete u_t = v_x with the updated
velocity), species (decay and diffusion both implicit, one M-matrix solve),
temperature (implicit conduction, compression folded into the diagonal,
explicit viscous heating and reaction source).  Steps that drive u below
zero or theta below the floor are retried with half the step size.
"""
from __future__ import annotations

import numpy as np

from . import config as config_mod
from .grid import (
    BoundaryCondition,
    Mesh,
    State,
    StepControl,
    Trajectory,
    cell_average,
    dnode_to_cell,
)
from .kernels import check_diagonal_dominance, thomas
from .model import FluidParams, ReactionRate

__all__ = [
    "SolverAbort",
    "adaptive_dt",
    "advance",
    "integrate",
    "run",
    "step_mass",
    "step_momentum",
    "step_reaction_diffusion",
    "step_temperature",
]


class SolverAbort(RuntimeError):
    """Raised when a run cannot continue; carries the failing time and field."""

    def __init__(self, message: str, t: float, fld: str = ""):
        super().__init__(message)
        self.t = t
        self.field = fld


class _NeedSmallerStep(Exception):
    """Internal retry signal for the adaptive halving loop."""

    def __init__(self, fld: str):
        super().__init__(fld)
        self.field = fld


def adaptive_dt(state: State, ctrl: StepControl, mesh: Mesh,
                params: FluidParams, rate: ReactionRate) -> float:
    """Step size from the acoustic CFL, the reaction bound, and dt_max."""
    c = np.sqrt(params.a * state.theta / state.u)
    v_cell = np.maximum(np.abs(state.v[:-1]), np.abs(state.v[1:]))
    dt = mesh.dx / float(np.max(v_cell + c))
    m = rate.sup()
    if m > 0.0:
        dt = min(dt, 1.0 / (params.big_k * m))
    return ctrl.safety * min(dt, ctrl.dt_max)


def step_momentum(u: np.ndarray, v: np.ndarray, theta: np.ndarray, dt: float,
                  mesh: Mesh, params: FluidParams, bc: BoundaryCondition) -> np.ndarray:
    """Backward-Euler viscous solve with the explicit pressure gradient.

    Boundary rows pin v = 0 at both ends under all supported conditions.
    """
    n = mesh.n
    dx = mesh.dx
    lam = dt * params.mu / dx**2
    inv_u = 1.0 / u

    diag = np.ones(n + 1)
    sub = np.zeros(n)
    sup = np.zeros(n)
    rhs = np.empty(n + 1)

    # interior node i lies between cells i-1 and i
    diag[1:-1] = 1.0 + lam * (inv_u[1:] + inv_u[:-1])
    sub[:-1] = -lam * inv_u[:-1]   # couples node i to node i-1 via cell i-1
    sup[1:] = -lam * inv_u[1:]     # couples node i to node i+1 via cell i
    p = params.a * theta * inv_u
    rhs[1:-1] = v[1:-1] - dt * (p[1:] - p[:-1]) / dx

    # pinned velocities
    diag[0] = diag[-1] = 1.0
    sub[-1] = 0.0
    sup[0] = 0.0
    rhs[0] = rhs[-1] = 0.0

    if not check_diagonal_dominance(sub, diag, sup):
        raise SolverAbort("momentum system lost diagonal dominance", t=float("nan"), fld="v")
    return thomas(sub, diag, sup, rhs)


def step_mass(u: np.ndarray, v_new: np.ndarray, dt: float, mesh: Mesh) -> np.ndarray:
    """u += dt * v_x with the just-updated velocity; telescopes exactly."""
    u_new = u + dt * dnode_to_cell(v_new, mesh)
    if u_new.min() <= 0.0:
        raise _NeedSmallerStep("u")
    return u_new


def _implicit_cell_solve(field: np.ndarray, decay: np.ndarray, coef_node: np.ndarray,
                         source: np.ndarray, dt: float, mesh: Mesh,
                         ghost_affine: tuple[tuple[float, float], tuple[float, float]]):
    """Shared assembly for the implicit cell-field solves.

    Solves (1 + dt*decay) x - dt*div(coef grad x) = field + dt*source with
    ghost cells given as affine maps of the boundary cells.  Returns the
    solution together with the assembled diagonal (for dominance checks).
    """
    n = mesh.n
    r = dt / mesh.dx**2
    diag = 1.0 + dt * decay
    diag[:-1] += r * coef_node[1:-1]
    diag[1:] += r * coef_node[1:-1]
    sub = -r * coef_node[1:-1]
    sup = sub.copy()
    rhs = field + dt * source

    (al, bl), (ar, br) = ghost_affine
    diag[0] += r * coef_node[0] * (1.0 - bl)
    rhs[0] += r * coef_node[0] * al
    diag[-1] += r * coef_node[-1] * (1.0 - br)
    rhs[-1] += r * coef_node[-1] * ar

    return thomas(sub, diag, sup, rhs), diag


def step_reaction_diffusion(z: np.ndarray, u: np.ndarray, theta: np.ndarray,
                            dt: float, mesh: Mesh, params: FluidParams,
                            rate: ReactionRate, bc: BoundaryCondition) -> np.ndarray:
    """Implicit decay + diffusion solve for the reactant fraction.

    The system matrix is an M-matrix, so the update cannot leave [0, max z].
    """
    u_node = cell_average(u, mesh, bc.cell_ghosts("u", u))
    coef = params.d / u_node**2
    decay = params.big_k * rate.phi(theta)
    z_new, _ = _implicit_cell_solve(z, decay, coef, np.zeros_like(z), dt, mesh,
                                    bc.ghost_affine("z"))
    return z_new


def step_temperature(theta: np.ndarray, u: np.ndarray, v_new: np.ndarray,
                     z_old: np.ndarray, dt: float, mesh: Mesh,
                     params: FluidParams, rate: ReactionRate,
                     bc: BoundaryCondition, theta_floor: float) -> np.ndarray:
    """Temperature update consuming the already-updated velocity.

    Conduction implicit, the compression term folded into the diagonal,
    viscous heating and the reaction source explicit in the old state.
    """
    vx = dnode_to_cell(v_new, mesh)
    u_node = cell_average(u, mesh, bc.cell_ghosts("u", u))
    coef = params.kappa / u_node
    compression = params.a * vx / u
    source = params.mu * vx**2 / u + params.q * params.big_k * rate.phi(theta) * z_old

    # compression can make the diagonal lose dominance for too-large dt
    if np.any(1.0 + dt * compression <= 0.0):
        raise _NeedSmallerStep("theta")
    theta_new, _ = _implicit_cell_solve(theta, compression, coef, source, dt,
                                        mesh, bc.ghost_affine("theta"))
    if theta_new.min() <= theta_floor:
        raise _NeedSmallerStep("theta")
    return theta_new


def advance(state: State, ctrl: StepControl, mesh: Mesh, params: FluidParams,
            rate: ReactionRate, bc: BoundaryCondition,
            dt_cap: float | None = None) -> State:
    """One accepted step: momentum, mass, species, temperature, boundary."""
    dt = adaptive_dt(state, ctrl, mesh, params, rate)
    if dt_cap is not None:
        dt = min(dt, dt_cap)
    fld = ""
    for _ in range(ctrl.max_halvings + 1):
        try:
            v1 = step_momentum(state.u, state.v, state.theta, dt, mesh, params, bc)
            u1 = step_mass(state.u, v1, dt, mesh)
            z1 = step_reaction_diffusion(state.z, u1, state.theta, dt, mesh,
                                         params, rate, bc)
            th1 = step_temperature(state.theta, u1, v1, state.z, dt, mesh,
                                   params, rate, bc, ctrl.theta_floor)
        except _NeedSmallerStep as err:
            fld = err.field
            dt *= 0.5
            continue
        v1[0] = 0.0
        v1[-1] = 0.0
        return State(t=state.t + dt, u=u1, v=v1, theta=th1, z=z1, dt=dt)
    raise SolverAbort(
        f"step at t={state.t:.6g} rejected after {ctrl.max_halvings} halvings "
        f"(field {fld!r} kept violating its floor)", t=state.t, fld=fld)


def integrate(initial: State, mesh: Mesh, params: FluidParams, rate: ReactionRate,
              bc: BoundaryCondition, ctrl: StepControl, t_final: float,
              snapshot_every: float, meta: dict | None = None) -> Trajectory:
    """March from the initial state to t_final, snapshotting on a fixed grid."""
    initial.check_invariants(mesh)
    meta = dict(meta or {})
    traj = Trajectory(mesh=mesh, bc=bc, params=params, rate=rate,
                      states=[initial.copy()], meta=meta)
    if t_final <= 0.0:
        meta.setdefault("max_dt", 0.0)
        meta.setdefault("n_steps", 0)
        return traj

    n_snaps = max(int(np.floor(t_final / snapshot_every + 1e-9)), 0)
    snap_times = [k * snapshot_every for k in range(1, n_snaps + 1)]
    if not snap_times or snap_times[-1] < t_final - 1e-9 * t_final:
        snap_times.append(t_final)

    state = initial.copy()
    max_dt = 0.0
    n_steps = 0
    for t_next in snap_times:
        while state.t < t_next - 1e-12 * max(1.0, t_next):
            cap = max(t_next - state.t, 1e-14)
            state = advance(state, ctrl, mesh, params, rate, bc, dt_cap=cap)
            max_dt = max(max_dt, state.dt)
            n_steps += 1
        state.t = t_next
        traj.states.append(state.copy())
    meta["max_dt"] = max_dt
    meta["n_steps"] = n_steps
    return traj


def run(cfg: "config_mod.RunConfig") -> Trajectory:
    """Integrate a validated configuration into a trajectory with metadata."""
    initial = config_mod.initial_state(cfg)
    meta = {"config": config_mod.config_dict(cfg), "seed": cfg.seed}
    return integrate(initial, cfg.mesh, cfg.fluid, cfg.rate, cfg.bc, cfg.ctrl,
                     cfg.t_final, cfg.snapshot_every, meta=meta)
