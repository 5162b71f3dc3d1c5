"""Independent reference computations for validating the main solver.

The reference integrator is a fully explicit forward-Euler scheme on a
refined grid with a diffusion-limited step size.  It shares only the model
and grid type definitions with the main solver; its stepping code lives here
(jitted hot loop plus a vectorized NumPy fallback, selected like the other
kernels by COMBUSTION1D_NUMBA).
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import config as config_mod
from .grid import Mesh, State, Trajectory, node_weights
from .kernels import USE_NUMBA, njit
from .model import ReactionRate

__all__ = [
    "OracleAbort",
    "ErrorTable",
    "explicit_reference_run",
    "compare",
    "convergence_order",
    "state_distance",
    "mollification_study",
    "MollificationRow",
]


class OracleAbort(RuntimeError):
    """Reference integration hit a stability violation or bad state."""


def _phi_args(rate: ReactionRate):
    """Flat reaction-rate arguments for the chunk kernels."""
    if rate.eta > 0.0:
        tbl = np.ascontiguousarray(rate._table)
        tbl_dx = rate._grid[1] - rate._grid[0]
        return (1, rate.alpha, rate.act, rate.theta_ign, rate.theta_cap,
                float(tbl_dx), tbl)
    return (0, rate.alpha, rate.act, rate.theta_ign, rate.theta_cap,
            1.0, np.zeros(1))


@njit(cache=True)
def _chunk_jit(u, v, th, z, dx, a, mu, kappa, q, bigk, d, m_sup,
               tab_mode, alpha, act, th_ign, th_cap, tbl_dx, tbl,
               ghosts, t, t_target, max_steps):  # pragma: no cover - via dispatcher
    n = u.shape[0]
    vx = np.empty(n)
    phi = np.empty(n)
    thx = np.empty(n + 1)
    zx = np.empty(n + 1)
    u_node = np.empty(n + 1)
    dv = np.empty(n + 1)
    dth = np.empty(n)
    dz = np.empty(n)
    du = np.empty(n)
    steps = 0
    while t < t_target - 1e-14:
        umin = u[0]
        for j in range(n):
            if u[j] < umin:
                umin = u[j]
        if umin <= 0.0:
            return t, steps, 1
        # speed for the advective limit
        smax = 0.0
        for j in range(n):
            c = np.sqrt(a * th[j] / u[j])
            av = abs(v[j])
            if abs(v[j + 1]) > av:
                av = abs(v[j + 1])
            if av + c > smax:
                smax = av + c
        kd = kappa if kappa > d else d
        dt = 0.2 * dx * dx * umin * umin / kd
        dt2 = 0.2 * dx * dx * umin / mu
        if dt2 < dt:
            dt = dt2
        dt3 = 0.2 * dx / smax
        if dt3 < dt:
            dt = dt3
        if m_sup > 0.0:
            dt4 = 0.2 / (bigk * m_sup)
            if dt4 < dt:
                dt = dt4
        if t + dt > t_target:
            dt = t_target - t
        if dt <= 0.0:
            break

        # reaction rate at the current temperatures
        for j in range(n):
            tc = th[j]
            if tc > th_cap:
                tc = th_cap
            if tab_mode == 1:
                pos = tc / tbl_dx
                i = int(pos)
                if i >= tbl.shape[0] - 1:
                    phi[j] = tbl[tbl.shape[0] - 1]
                else:
                    w = pos - i
                    phi[j] = tbl[i] * (1.0 - w) + tbl[i + 1] * w
            else:
                phi[j] = tc**alpha * np.exp(-act / tc) if tc > th_ign else 0.0

        for j in range(n):
            vx[j] = (v[j + 1] - v[j]) / dx

        # ghost cells: ghosts[f, side, {A, B}] with f in (u, theta, z)
        ug_l = ghosts[0, 0, 0] + ghosts[0, 0, 1] * u[0]
        ug_r = ghosts[0, 1, 0] + ghosts[0, 1, 1] * u[n - 1]
        tg_l = ghosts[1, 0, 0] + ghosts[1, 0, 1] * th[0]
        tg_r = ghosts[1, 1, 0] + ghosts[1, 1, 1] * th[n - 1]
        zg_l = ghosts[2, 0, 0] + ghosts[2, 0, 1] * z[0]
        zg_r = ghosts[2, 1, 0] + ghosts[2, 1, 1] * z[n - 1]

        u_node[0] = 0.5 * (ug_l + u[0])
        u_node[n] = 0.5 * (u[n - 1] + ug_r)
        thx[0] = (th[0] - tg_l) / dx
        thx[n] = (tg_r - th[n - 1]) / dx
        zx[0] = (z[0] - zg_l) / dx
        zx[n] = (zg_r - z[n - 1]) / dx
        for i in range(1, n):
            u_node[i] = 0.5 * (u[i - 1] + u[i])
            thx[i] = (th[i] - th[i - 1]) / dx
            zx[i] = (z[i] - z[i - 1]) / dx

        dv[0] = 0.0
        dv[n] = 0.0
        for i in range(1, n):
            visc_r = mu * vx[i] / u[i]
            visc_l = mu * vx[i - 1] / u[i - 1]
            p_r = a * th[i] / u[i]
            p_l = a * th[i - 1] / u[i - 1]
            dv[i] = ((visc_r - visc_l) - (p_r - p_l)) / dx
        for j in range(n):
            cond = (kappa * thx[j + 1] / u_node[j + 1] - kappa * thx[j] / u_node[j]) / dx
            dth[j] = (-a * th[j] / u[j] * vx[j] + cond
                      + mu * vx[j] * vx[j] / u[j] + q * bigk * phi[j] * z[j])
            zdiff = (d / (u_node[j + 1] * u_node[j + 1]) * zx[j + 1]
                     - d / (u_node[j] * u_node[j]) * zx[j]) / dx
            dz[j] = -bigk * phi[j] * z[j] + zdiff
            du[j] = vx[j]

        bad = False
        for i in range(n + 1):
            v[i] += dt * dv[i]
        for j in range(n):
            u[j] += dt * du[j]
            th[j] += dt * dth[j]
            z[j] += dt * dz[j]
            if u[j] <= 0.0 or th[j] <= 0.0 or not np.isfinite(th[j]):
                bad = True
        v[0] = 0.0
        v[n] = 0.0
        t += dt
        steps += 1
        if bad:
            return t, steps, 1
        if steps >= max_steps:
            return t, steps, 2
    return t, steps, 0


def _chunk_numpy(u, v, th, z, dx, a, mu, kappa, q, bigk, d, m_sup,
                 tab_mode, alpha, act, th_ign, th_cap, tbl_dx, tbl,
                 ghosts, t, t_target, max_steps):
    """Vectorized twin of the jitted chunk (fallback lane)."""
    n = len(u)
    steps = 0
    while t < t_target - 1e-14:
        umin = float(u.min())
        if umin <= 0.0:
            return t, steps, 1
        c = np.sqrt(a * th / u)
        smax = float(np.max(np.maximum(np.abs(v[:-1]), np.abs(v[1:])) + c))
        dt = 0.2 * dx * dx * umin * umin / max(kappa, d)
        dt = min(dt, 0.2 * dx * dx * umin / mu, 0.2 * dx / smax)
        if m_sup > 0.0:
            dt = min(dt, 0.2 / (bigk * m_sup))
        dt = min(dt, t_target - t)
        if dt <= 0.0:
            break

        tc = np.minimum(th, th_cap)
        if tab_mode == 1:
            phi = np.interp(tc, tbl_dx * np.arange(len(tbl)), tbl)
        else:
            phi = np.zeros(n)
            hot = tc > th_ign
            phi[hot] = tc[hot] ** alpha * np.exp(-act / tc[hot])

        vx = (v[1:] - v[:-1]) / dx
        ug = ghosts[0, :, 0] + ghosts[0, :, 1] * np.array([u[0], u[-1]])
        tg = ghosts[1, :, 0] + ghosts[1, :, 1] * np.array([th[0], th[-1]])
        zg = ghosts[2, :, 0] + ghosts[2, :, 1] * np.array([z[0], z[-1]])
        u_node = np.empty(n + 1)
        u_node[1:-1] = 0.5 * (u[:-1] + u[1:])
        u_node[0] = 0.5 * (ug[0] + u[0])
        u_node[-1] = 0.5 * (u[-1] + ug[1])
        thx = np.empty(n + 1)
        thx[1:-1] = (th[1:] - th[:-1]) / dx
        thx[0] = (th[0] - tg[0]) / dx
        thx[-1] = (tg[1] - th[-1]) / dx
        zx = np.empty(n + 1)
        zx[1:-1] = (z[1:] - z[:-1]) / dx
        zx[0] = (z[0] - zg[0]) / dx
        zx[-1] = (zg[1] - z[-1]) / dx

        visc = mu * vx / u
        p = a * th / u
        v[1:-1] += dt * ((visc[1:] - visc[:-1]) - (p[1:] - p[:-1])) / dx
        v[0] = v[-1] = 0.0
        cond_flux = kappa * thx / u_node
        z_flux = d / u_node**2 * zx
        th += dt * (-a * th / u * vx + np.diff(cond_flux) / dx
                    + mu * vx**2 / u + q * bigk * phi * z)
        z += dt * (-bigk * phi * z + np.diff(z_flux) / dx)
        u += dt * vx
        t += dt
        steps += 1
        if u.min() <= 0.0 or th.min() <= 0.0 or not np.all(np.isfinite(th)):
            return t, steps, 1
        if steps >= max_steps:
            return t, steps, 2
    return t, steps, 0


_chunk = _chunk_jit if USE_NUMBA else _chunk_numpy


def explicit_reference_run(cfg: "config_mod.RunConfig", refine: int,
                           max_steps_per_chunk: int = 50_000_000) -> Trajectory:
    """Forward-Euler everything on a grid refined by ``refine``.

    Snapshot times match the configuration so the result aligns with main
    solver runs for comparison.  Scenario initial data is regenerated on the
    fine grid.
    """
    if refine < 2:
        raise ValueError("refine must be at least 2")
    fine_mesh = Mesh(half_length=cfg.mesh.half_length, n=cfg.mesh.n * refine,
                     kind=cfg.mesh.kind)
    fine_cfg = replace(cfg, mesh=fine_mesh)
    state = config_mod.initial_state(fine_cfg)
    ghosts = np.array([list(cfg.bc.ghost_affine(f)) for f in ("u", "theta", "z")],
                      dtype=float)
    mode, alpha, act, th_ign, th_cap, tbl_dx, tbl = _phi_args(cfg.rate)
    m_sup = cfg.rate.sup()
    p = cfg.fluid

    n_snaps = max(int(np.floor(cfg.t_final / cfg.snapshot_every + 1e-9)), 0)
    snap_times = [k * cfg.snapshot_every for k in range(1, n_snaps + 1)]
    if cfg.t_final > 0 and (not snap_times or snap_times[-1] < cfg.t_final * (1 - 1e-9)):
        snap_times.append(cfg.t_final)

    meta = {"config": config_mod.config_dict(fine_cfg), "seed": cfg.seed,
            "oracle": True, "refine": refine}
    traj = Trajectory(mesh=fine_mesh, bc=cfg.bc, params=cfg.fluid, rate=cfg.rate,
                      states=[state.copy()], meta=meta)
    u, v, th, z = state.u, state.v, state.theta, state.z
    t = 0.0
    total_steps = 0
    for t_next in snap_times:
        t, steps, flag = _chunk(u, v, th, z, fine_mesh.dx, p.a, p.mu, p.kappa,
                                p.q, p.big_k, p.d, m_sup, mode, alpha, act,
                                th_ign, th_cap, tbl_dx, tbl, ghosts,
                                t, t_next, max_steps_per_chunk)
        total_steps += steps
        if flag == 1:
            raise OracleAbort(f"reference run lost positivity near t={t:.6g}")
        if flag == 2:
            raise OracleAbort(f"reference run exceeded {max_steps_per_chunk} "
                              f"steps in one snapshot interval")
        traj.states.append(State(t=t_next, u=u.copy(), v=v.copy(),
                                 theta=th.copy(), z=z.copy(), dt=0.0))
    meta["n_steps"] = total_steps
    return traj


# -- cross-run comparison -------------------------------------------------------


def _restrict_cells(f: np.ndarray, ratio: int) -> np.ndarray:
    return f.reshape(-1, ratio).mean(axis=1)


def _restrict_nodes(f: np.ndarray, ratio: int) -> np.ndarray:
    return f[::ratio]


@dataclass
class ErrorTable:
    """Per-snapshot restriction errors between two runs of one scenario."""

    times: np.ndarray
    l2: dict[str, np.ndarray]
    linf: dict[str, np.ndarray]
    dx: float

    def combined_l2(self) -> np.ndarray:
        total = np.zeros_like(self.times)
        for err in self.l2.values():
            total += err**2
        return np.sqrt(total)

    def final_combined_l2(self) -> float:
        return float(self.combined_l2()[-1])


def compare(a: Trajectory, b: Trajectory) -> ErrorTable:
    """Field-wise errors after conservative restriction to the coarser grid."""
    if a.mesh.kind != b.mesh.kind or \
            abs(a.mesh.half_length - b.mesh.half_length) > 1e-12:
        raise ValueError("trajectories cover different domains")
    ta, tb = a.times, b.times
    if len(ta) != len(tb) or np.max(np.abs(ta - tb)) > 1e-9 * max(1.0, ta[-1]):
        raise ValueError("snapshot times differ; not the same scenario")
    if b.mesh.n < a.mesh.n:
        a, b = b, a
    if b.mesh.n % a.mesh.n != 0:
        raise ValueError(f"grids not nested: {a.mesh.n} vs {b.mesh.n}")
    ratio = b.mesh.n // a.mesh.n
    mesh = a.mesh
    w = node_weights(mesh)
    l2 = {f: np.empty(len(ta)) for f in ("u", "v", "theta", "z")}
    linf = {f: np.empty(len(ta)) for f in ("u", "v", "theta", "z")}
    for i, (sa, sb) in enumerate(zip(a.states, b.states)):
        for name in ("u", "theta", "z"):
            diff = getattr(sa, name) - _restrict_cells(getattr(sb, name), ratio)
            l2[name][i] = np.sqrt(mesh.dx * np.sum(diff**2))
            linf[name][i] = np.abs(diff).max()
        dv = sa.v - _restrict_nodes(sb.v, ratio)
        l2["v"][i] = np.sqrt(np.sum(w * dv**2))
        linf["v"][i] = np.abs(dv).max()
    return ErrorTable(times=ta, l2=l2, linf=linf, dx=mesh.dx)


def convergence_order(dxs, errors) -> float:
    """Least-squares slope of log error against log dx."""
    dxs = np.asarray(dxs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if len(dxs) < 2 or np.any(errors <= 0.0):
        raise ValueError("need at least two rungs with positive errors")
    slope, _ = np.polyfit(np.log(dxs), np.log(errors), 1)
    return float(slope)


def state_distance(sa: State, sb: State, mesh: Mesh) -> float:
    """Combined L2 distance of the four fields between same-grid states."""
    w = node_weights(mesh)
    acc = mesh.dx * (np.sum((sa.u - sb.u) ** 2) + np.sum((sa.theta - sb.theta) ** 2)
                     + np.sum((sa.z - sb.z) ** 2))
    acc += np.sum(w * (sa.v - sb.v) ** 2)
    return float(np.sqrt(acc))


@dataclass
class MollificationRow:
    eta: float            # 0 marks the raw discontinuous rate
    sup_theta: float
    diff_to_next: float   # final-time distance to the next (smaller-eta) run
    diff_to_raw: float


def mollification_study(cfg: "config_mod.RunConfig", etas) -> list[MollificationRow]:
    """Main-solver runs with smoothed rates of shrinking width plus the raw rate.

    The returned rows order runs by decreasing eta and end with the raw rate;
    successive final-time distances should shrink as eta decreases.
    """
    etas = [float(e) for e in etas]
    if not etas or any(e <= 0.0 for e in etas) or \
            not all(ea > eb for ea, eb in zip(etas, etas[1:])):
        raise ValueError("etas must be strictly decreasing and positive")
    from . import solver  # the reference integrator above never touches this

    runs = []
    for eta in etas:
        run_cfg = replace(cfg, rate=cfg.rate.mollify(eta))
        runs.append((eta, solver.run(run_cfg)))
    raw_cfg = replace(cfg, rate=ReactionRate(alpha=cfg.rate.alpha, act=cfg.rate.act,
                                             theta_ign=cfg.rate.theta_ign, eta=0.0,
                                             theta_cap=cfg.rate.theta_cap))
    runs.append((0.0, solver.run(raw_cfg)))

    mesh = cfg.mesh
    raw_final = runs[-1][1].final
    rows = []
    for i, (eta, traj) in enumerate(runs):
        sup_theta = max(float(s.theta.max()) for s in traj.states)
        nxt = state_distance(traj.final, runs[i + 1][1].final, mesh) \
            if i + 1 < len(runs) else 0.0
        rows.append(MollificationRow(eta=eta, sup_theta=sup_theta,
                                     diff_to_next=nxt,
                                     diff_to_raw=state_distance(traj.final, raw_final, mesh)))
    return rows
