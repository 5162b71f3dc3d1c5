"""Run configuration: INI-style parsing, validation, and initial-data scenarios.

Configs are flat ``key = value`` sections.  Parsing is strict (unknown
sections or keys are errors) and reports every violation at once.  Rendering
a parsed config and parsing it back reproduces the same RunConfig, which is
what the trajectory file header relies on.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass

import numpy as np

from .grid import BoundaryCondition, Mesh, State, StepControl
from .model import FluidParams, ReactionRate

__all__ = [
    "ConfigError",
    "Tolerances",
    "RunConfig",
    "SCENARIOS",
    "parse_config",
    "load_config",
    "scenario_config",
    "render_config",
    "config_dict",
    "config_from_dict",
    "initial_state",
    "scenario_help",
]

SCENARIOS = ("equilibrium", "cold-bump", "hot-spot", "compression", "file")

# deviations outside the support radius must sit below this level
FAR_FIELD_TOL = 1e-6


class ConfigError(ValueError):
    """Carries every violation found while parsing/validating a config."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class Tolerances:
    """Tolerance constants consumed by the diagnostics verdicts."""

    budget_c: float = 10.0        # budget slack scales as budget_c*(dx+dt)*T
    z_step: float = 1e-9          # allowed per-step increase of the z norms
    rep_residual: float = 0.05    # relative residual of the volume reconstruction
    band_growth: float = 0.05     # allowed late-time widening of u/theta bands
    decay_fraction: float = 0.2   # required drop of h1_dev by the final time
    z_bound: float = 1e-10        # allowed departure of z from [0, 1]


@dataclass(frozen=True)
class RunConfig:
    fluid: FluidParams = FluidParams()
    rate: ReactionRate = ReactionRate()
    mesh: Mesh = Mesh(half_length=20.0, n=256)
    bc: BoundaryCondition = BoundaryCondition()
    ctrl: StepControl = StepControl()
    tol: Tolerances = Tolerances()
    scenario: str = "hot-spot"
    amp: float = 1.5
    width: float = 0.6
    center: float = 0.0
    z_level: float = 1.0
    z_width: float = 0.8
    support_radius: float = 0.0   # 0 means half of half_length
    profile_path: str = ""
    t_final: float = 50.0
    snapshot_every: float = 0.5
    out_dir: str = "runs"
    seed: int = 0

    def resolved_support_radius(self) -> float:
        return self.support_radius if self.support_radius > 0.0 else 0.5 * self.mesh.half_length


# -- schema -------------------------------------------------------------------

_POS = "positive"
_NONNEG = "nonnegative"
_ANY = "any"

# section -> key -> (python type, default, rule)
_SCHEMA: dict[str, dict[str, tuple[type, object, str]]] = {
    "fluid": {
        "a": (float, 1.0, _POS),
        "mu": (float, 1.0, _POS),
        "kappa": (float, 1.0, _POS),
        "q": (float, 0.5, _POS),
        "big_k": (float, 5.0, _POS),
        "d": (float, 0.1, _POS),
    },
    "reaction": {
        "alpha": (float, 1.0, _NONNEG),
        "act": (float, 1.0, _POS),
        "theta_ign": (float, 1.2, _POS),
        "eta": (float, 0.0, _NONNEG),
        "theta_cap": (float, 8.0, _POS),
    },
    "mesh": {
        "half_length": (float, 20.0, _POS),
        "n": (int, 256, _POS),
        "domain": (str, "whole-line", _ANY),
    },
    "boundary": {
        "kind": (str, "whole-line", _ANY),
        "z_end": (str, "dirichlet0", _ANY),
    },
    "initial": {
        "scenario": (str, "hot-spot", _ANY),
        "amp": (float, None, _ANY),
        "width": (float, None, _POS),
        "center": (float, 0.0, _ANY),
        "z_level": (float, None, _ANY),
        "z_width": (float, None, _POS),
        "support_radius": (float, 0.0, _NONNEG),
        "profile_path": (str, "", _ANY),
    },
    "time": {
        "t_final": (float, 50.0, _NONNEG),
        "snapshot_every": (float, 0.5, _POS),
    },
    "step": {
        "dt_max": (float, 0.1, _POS),
        "safety": (float, 0.5, _ANY),
        "theta_floor": (float, 1e-6, _POS),
        "max_halvings": (int, 20, _NONNEG),
    },
    "tolerances": {
        "budget_c": (float, 10.0, _POS),
        "z_step": (float, 1e-9, _POS),
        "rep_residual": (float, 0.05, _POS),
        "band_growth": (float, 0.05, _POS),
        "decay_fraction": (float, 0.2, _POS),
        "z_bound": (float, 1e-10, _POS),
    },
    "output": {
        "dir": (str, "runs", _ANY),
    },
    "run": {
        "seed": (int, 0, _NONNEG),
    },
}

# scenario-specific fallbacks for keys left unset in [initial]
_SCENARIO_DEFAULTS: dict[str, dict[str, float]] = {
    "equilibrium": {"amp": 0.0, "width": 1.5, "z_level": 0.0, "z_width": 3.0},
    "cold-bump": {"amp": 0.15, "width": 1.5, "z_level": 0.0, "z_width": 3.0},
    "hot-spot": {"amp": 1.5, "width": 0.6, "z_level": 1.0, "z_width": 0.8},
    "compression": {"amp": 0.4, "width": 1.5, "z_level": 0.0, "z_width": 3.0},
    "file": {"amp": 0.0, "width": 1.5, "z_level": 0.0, "z_width": 3.0},
}


def parse_config(text: str) -> RunConfig:
    """Parse and validate config text; raises ConfigError with every violation."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    errors: list[str] = []
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"syntax: {exc}"]) from exc

    for section in cp.sections():
        if section not in _SCHEMA:
            errors.append(f"{section}: unknown section")
            continue
        for key in cp[section]:
            if key not in _SCHEMA[section]:
                errors.append(f"{section}.{key}: unknown key")

    values: dict[tuple[str, str], object] = {}
    for section, keys in _SCHEMA.items():
        for key, (pytype, default, rule) in keys.items():
            raw = cp.get(section, key, fallback=None)
            if raw is None or raw.strip() == "":
                values[(section, key)] = default
                continue
            try:
                value = pytype(raw) if pytype is not str else raw.strip()
            except ValueError:
                errors.append(f"{section}.{key}: cannot parse {raw!r} as {pytype.__name__}")
                values[(section, key)] = default
                continue
            if rule == _POS and not value > 0:
                errors.append(f"{section}.{key}: must be positive, got {value}")
            elif rule == _NONNEG and value < 0:
                errors.append(f"{section}.{key}: must be nonnegative, got {value}")
            values[(section, key)] = value

    get = values.__getitem__

    scenario = get(("initial", "scenario"))
    if scenario not in SCENARIOS:
        errors.append(f"initial.scenario: unknown scenario {scenario!r} "
                      f"(choose from {', '.join(SCENARIOS)})")
        scenario = "equilibrium"
    fallback = _SCENARIO_DEFAULTS[scenario]
    for key in ("amp", "width", "z_level", "z_width"):
        if values[("initial", key)] is None:
            values[("initial", key)] = fallback[key]

    if not 0.0 <= values[("initial", "z_level")] <= 1.0:
        errors.append(f"initial.z_level: reactant fraction must lie in [0, 1], "
                      f"got {values[('initial', 'z_level')]}")
    if scenario == "file" and not values[("initial", "profile_path")]:
        errors.append("initial.profile_path: required for the file scenario")

    if get(("mesh", "domain")) not in ("whole-line", "half-line"):
        errors.append(f"mesh.domain: must be whole-line or half-line, "
                      f"got {get(('mesh', 'domain'))!r}")
    if get(("mesh", "n")) < 8:
        errors.append(f"mesh.n: need at least 8 cells, got {get(('mesh', 'n'))}")

    bc_kind = get(("boundary", "kind"))
    if bc_kind not in ("whole-line", "half-line-insulated", "half-line-isothermal"):
        errors.append(f"boundary.kind: unknown boundary kind {bc_kind!r}")
    else:
        wants = "whole-line" if bc_kind == "whole-line" else "half-line"
        if get(("mesh", "domain")) in ("whole-line", "half-line") and \
                get(("mesh", "domain")) != wants:
            errors.append(f"boundary.kind: {bc_kind} requires mesh.domain = {wants}")
    if get(("boundary", "z_end")) not in ("dirichlet0", "neumann0"):
        errors.append(f"boundary.z_end: must be dirichlet0 or neumann0, "
                      f"got {get(('boundary', 'z_end'))!r}")

    if get(("reaction", "theta_cap")) < get(("reaction", "theta_ign")):
        errors.append("reaction.theta_cap: must be >= reaction.theta_ign")
    if not 0.0 < get(("step", "safety")) <= 1.0:
        errors.append(f"step.safety: must lie in (0, 1], got {get(('step', 'safety'))}")
    for key in ("decay_fraction", "band_growth"):
        if not 0.0 < get(("tolerances", key)) < 1.0:
            errors.append(f"tolerances.{key}: must lie in (0, 1), "
                          f"got {get(('tolerances', key))}")

    if errors:
        raise ConfigError(errors)

    cfg = RunConfig(
        fluid=FluidParams(a=get(("fluid", "a")), mu=get(("fluid", "mu")),
                          kappa=get(("fluid", "kappa")), q=get(("fluid", "q")),
                          big_k=get(("fluid", "big_k")), d=get(("fluid", "d"))),
        rate=ReactionRate(alpha=get(("reaction", "alpha")), act=get(("reaction", "act")),
                          theta_ign=get(("reaction", "theta_ign")),
                          eta=get(("reaction", "eta")),
                          theta_cap=get(("reaction", "theta_cap"))),
        mesh=Mesh(half_length=get(("mesh", "half_length")), n=get(("mesh", "n")),
                  kind=get(("mesh", "domain"))),
        bc=BoundaryCondition(kind=bc_kind, z_end=get(("boundary", "z_end"))),
        ctrl=StepControl(dt_max=get(("step", "dt_max")), safety=get(("step", "safety")),
                         theta_floor=get(("step", "theta_floor")),
                         max_halvings=get(("step", "max_halvings"))),
        tol=Tolerances(budget_c=get(("tolerances", "budget_c")),
                       z_step=get(("tolerances", "z_step")),
                       rep_residual=get(("tolerances", "rep_residual")),
                       band_growth=get(("tolerances", "band_growth")),
                       decay_fraction=get(("tolerances", "decay_fraction")),
                       z_bound=get(("tolerances", "z_bound"))),
        scenario=scenario,
        amp=get(("initial", "amp")),
        width=get(("initial", "width")),
        center=get(("initial", "center")),
        z_level=get(("initial", "z_level")),
        z_width=get(("initial", "z_width")),
        support_radius=get(("initial", "support_radius")),
        profile_path=get(("initial", "profile_path")),
        t_final=get(("time", "t_final")),
        snapshot_every=get(("time", "snapshot_every")),
        out_dir=get(("output", "dir")),
        seed=get(("run", "seed")),
    )
    return cfg


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def scenario_config(scenario: str, **overrides) -> RunConfig:
    """RunConfig for a named scenario with its parameter fallbacks applied.

    Keyword overrides go to the RunConfig constructor, so shape parameters
    (amp, width, ...) as well as structural fields (mesh, fluid, ...) work.
    """
    if scenario not in SCENARIOS:
        raise ConfigError([f"initial.scenario: unknown scenario {scenario!r}"])
    base = dict(_SCENARIO_DEFAULTS[scenario])
    base.update(overrides)
    return RunConfig(scenario=scenario, **base)


def config_dict(cfg: RunConfig) -> dict:
    """Nested plain-value view, section -> key -> value."""
    return {
        "fluid": {"a": cfg.fluid.a, "mu": cfg.fluid.mu, "kappa": cfg.fluid.kappa,
                  "q": cfg.fluid.q, "big_k": cfg.fluid.big_k, "d": cfg.fluid.d},
        "reaction": {"alpha": cfg.rate.alpha, "act": cfg.rate.act,
                     "theta_ign": cfg.rate.theta_ign, "eta": cfg.rate.eta,
                     "theta_cap": cfg.rate.theta_cap},
        "mesh": {"half_length": cfg.mesh.half_length, "n": cfg.mesh.n,
                 "domain": cfg.mesh.kind},
        "boundary": {"kind": cfg.bc.kind, "z_end": cfg.bc.z_end},
        "initial": {"scenario": cfg.scenario, "amp": cfg.amp, "width": cfg.width,
                    "center": cfg.center, "z_level": cfg.z_level,
                    "z_width": cfg.z_width, "support_radius": cfg.support_radius,
                    "profile_path": cfg.profile_path},
        "time": {"t_final": cfg.t_final, "snapshot_every": cfg.snapshot_every},
        "step": {"dt_max": cfg.ctrl.dt_max, "safety": cfg.ctrl.safety,
                 "theta_floor": cfg.ctrl.theta_floor,
                 "max_halvings": cfg.ctrl.max_halvings},
        "tolerances": {"budget_c": cfg.tol.budget_c, "z_step": cfg.tol.z_step,
                       "rep_residual": cfg.tol.rep_residual,
                       "band_growth": cfg.tol.band_growth,
                       "decay_fraction": cfg.tol.decay_fraction,
                       "z_bound": cfg.tol.z_bound},
        "output": {"dir": cfg.out_dir},
        "run": {"seed": cfg.seed},
    }


def config_from_dict(d: dict) -> RunConfig:
    """Rebuild a RunConfig from the nested view (trajectory file headers)."""
    return parse_config(_render_dict(d))


def _render_dict(d: dict) -> str:
    lines = []
    for section in _SCHEMA:
        lines.append(f"[{section}]")
        for key in _SCHEMA[section]:
            value = d.get(section, {}).get(key, "")
            lines.append(f"{key} = {value}")
        lines.append("")
    return "\n".join(lines)


def render_config(cfg: RunConfig) -> str:
    """Canonical echo with every key resolved; parses back to the same config."""
    return _render_dict(config_dict(cfg))


# -- scenarios ----------------------------------------------------------------


def _gaussian(x: np.ndarray, center: float, width: float) -> np.ndarray:
    return np.exp(-((x - center) ** 2) / (2.0 * width**2))


def _plateau(x: np.ndarray, center: float, half_width: float) -> np.ndarray:
    """1 on the inner plateau, cubic-smoothstep ramps to exactly 0 at the edges.

    Support is exactly [center - half_width, center + half_width]; each ramp
    occupies the outer half of its side, so the integral is 1.5*half_width.
    """
    ramp = 0.5 * half_width
    rise = np.clip((x - (center - half_width)) / ramp, 0.0, 1.0)
    fall = np.clip(((center + half_width) - x) / ramp, 0.0, 1.0)
    s_rise = rise * rise * (3.0 - 2.0 * rise)
    s_fall = fall * fall * (3.0 - 2.0 * fall)
    return s_rise * s_fall


def initial_state(cfg: RunConfig) -> State:
    """Generate and validate the initial data for the configured scenario."""
    mesh = cfg.mesh
    xc = mesh.cells
    xn = mesh.nodes
    u = np.ones(mesh.n)
    v = np.zeros(mesh.n + 1)
    theta = np.ones(mesh.n)
    z = np.zeros(mesh.n)

    if cfg.scenario == "equilibrium":
        pass
    elif cfg.scenario == "cold-bump":
        theta = theta + cfg.amp * _gaussian(xc, cfg.center, cfg.width)
    elif cfg.scenario == "hot-spot":
        theta = theta + cfg.amp * _gaussian(xc, cfg.center, cfg.width)
        z = cfg.z_level * _plateau(xc, cfg.center, cfg.z_width)
    elif cfg.scenario == "compression":
        s = (xn - cfg.center) / cfg.width
        v = -cfg.amp * s * np.exp(-0.5 * s**2)
    elif cfg.scenario == "file":
        with np.load(cfg.profile_path) as data:
            prof = {k: np.asarray(data[k], dtype=float) for k in ("u", "v", "theta", "z")}
        m = len(prof["u"])
        if len(prof["v"]) != m + 1 or len(prof["theta"]) != m or len(prof["z"]) != m:
            raise ConfigError([f"initial.profile_path: field lengths must be "
                               f"(m, m+1, m, m) with a common m, file has "
                               f"{[len(prof[k]) for k in ('u', 'v', 'theta', 'z')]}"])
        if m == mesh.n:
            u, v, theta, z = prof["u"], prof["v"], prof["theta"], prof["z"]
        else:  # resample onto this mesh
            src = Mesh(half_length=mesh.half_length, n=m, kind=mesh.kind)
            u = np.interp(xc, src.cells, prof["u"])
            theta = np.interp(xc, src.cells, prof["theta"])
            z = np.interp(xc, src.cells, prof["z"])
            v = np.interp(xn, src.nodes, prof["v"])
    else:  # pragma: no cover - rejected at parse time
        raise ConfigError([f"initial.scenario: unknown scenario {cfg.scenario!r}"])

    v[0] = 0.0
    v[-1] = 0.0
    state = State(t=0.0, u=u, v=v, theta=theta, z=z)
    errors = _validate_initial(state, cfg)
    if errors:
        raise ConfigError(errors)
    return state


def _validate_initial(state: State, cfg: RunConfig) -> list[str]:
    """The admissibility conditions on the initial data."""
    errors = []
    mesh = cfg.mesh
    if state.u.min() <= 0.0:
        errors.append("initial: u0 must be bounded below by a positive constant")
    if state.theta.min() <= 0.0:
        errors.append("initial: theta0 must be bounded below by a positive constant")
    if state.z.min() < 0.0 or state.z.max() > 1.0:
        errors.append("initial: Z0 must lie in [0, 1]")
    for name, arr in (("u0", state.u), ("v0", state.v),
                      ("theta0", state.theta), ("Z0", state.z)):
        if not np.all(np.isfinite(arr)):
            errors.append(f"initial: {name} contains non-finite values")
    if cfg.scenario == "cold-bump" and state.theta.max() >= cfg.rate.theta_ign:
        errors.append(f"initial: cold-bump peak temperature {state.theta.max():.4g} "
                      f"reaches the ignition threshold {cfg.rate.theta_ign}")
    if cfg.scenario == "hot-spot" and state.theta.max() <= cfg.rate.theta_ign:
        errors.append(f"initial: hot-spot peak temperature {state.theta.max():.4g} "
                      f"stays below the ignition threshold {cfg.rate.theta_ign}")

    radius = cfg.resolved_support_radius()
    xc = mesh.cells
    xn = mesh.nodes
    outside_c = np.abs(xc - cfg.center) > radius
    outside_n = np.abs(xn - cfg.center) > radius
    dev = 0.0
    if outside_c.any():
        dev = max(dev,
                  float(np.abs(state.u[outside_c] - 1.0).max()),
                  float(np.abs(state.theta[outside_c] - 1.0).max()),
                  float(np.abs(state.z[outside_c]).max()))
    if outside_n.any():
        dev = max(dev, float(np.abs(state.v[outside_n]).max()))
    if dev > FAR_FIELD_TOL:
        errors.append(f"initial: deviation {dev:.3g} beyond the support radius "
                      f"{radius:.4g} exceeds the far-field tolerance {FAR_FIELD_TOL}")
    return errors


def scenario_help() -> str:
    """One-line description per built-in scenario for the CLI listing."""
    lines = [
        "equilibrium   constant state (1, 0, 1, 0); fixed point of the scheme",
        "cold-bump     Gaussian temperature bump/dip below ignition, no reactant",
        "hot-spot      Gaussian temperature bump crossing ignition over a",
        "              compactly supported reactant plateau (keys: amp, width,",
        "              center, z_level, z_width)",
        "compression   antisymmetric velocity pulse into the center, rest",
        "              equilibrium (keys: amp, width, center)",
        "file          tabulated profile from an .npz with keys u, v, theta, z",
        "              (key: profile_path; resampled if sizes differ)",
    ]
    return "\n".join(lines)
