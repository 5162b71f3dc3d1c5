"""Command-line surface: run, verify, convergence, sweep, scenarios.

Exit codes: 0 all verdicts pass (or are inconclusive by declared policy),
1 verdict failure, 2 configuration error, 3 solver abort.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

from . import config as config_mod
from . import diagnostics, oracle, solver, trajio
from .config import ConfigError
from .grid import Mesh
from .oracle import OracleAbort
from .solver import SolverAbort

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_CONFIG = 2
EXIT_ABORT = 3

OUT_ENV = "COMBUSTION1D_OUT"


def _default_out(flag_value: str | None, cfg_dir: str = "") -> str:
    """Precedence: explicit --out, then the env override, then the config."""
    if flag_value:
        return flag_value
    return os.environ.get(OUT_ENV) or cfg_dir or "runs"


def _load(path: str, quiet: bool) -> config_mod.RunConfig:
    cfg = config_mod.load_config(path)
    if not quiet:
        print(f"config ok: scenario={cfg.scenario} n={cfg.mesh.n} "
              f"L={cfg.mesh.half_length} T={cfg.t_final}")
    return cfg


def _fmt(x: float | None) -> str:
    return "n/a" if x is None else f"{x:.6g}"


def _print_verdicts(report: diagnostics.DiagnosticsReport, quiet: bool) -> None:
    if quiet:
        return
    for v in report.verdicts:
        print(f"  {v.name:18s} {v.verdict:12s} value={_fmt(v.value)} "
              f"bound={_fmt(v.bound)} slack={_fmt(v.slack)}")


def _failure_summary(report: diagnostics.DiagnosticsReport) -> str:
    bad = [v.to_dict() for v in report.verdicts if v.verdict == diagnostics.FAIL]
    return json.dumps({"failed_verdicts": bad}, sort_keys=True)


def cmd_run(args) -> int:
    try:
        cfg = _load(args.config, args.quiet)
        if args.snapshot_every is not None:
            cfg = replace(cfg, snapshot_every=args.snapshot_every)
        out_dir = _default_out(args.out, cfg.out_dir)
        traj = solver.run(cfg)
    except ConfigError as exc:
        for line in exc.errors:
            print(f"config error: {line}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverAbort as exc:
        print(f"solver abort: {exc} (t={exc.t}, field={exc.field})", file=sys.stderr)
        return EXIT_ABORT

    report = diagnostics.full_report(traj, cfg.tol)
    os.makedirs(out_dir, exist_ok=True)
    name = args.name or f"{cfg.scenario}-n{cfg.mesh.n}"
    traj_path, report_path = trajio.default_paths(out_dir, name)
    trajio.write_trajectory(traj_path, traj)
    trajio.write_report(report_path, report)
    if not args.quiet:
        print(f"wrote {traj_path} ({len(traj.states)} snapshots) and {report_path}")
    _print_verdicts(report, args.quiet)
    if report.all_ok():
        return EXIT_OK
    print(_failure_summary(report))
    return EXIT_VERDICT


def cmd_verify(args) -> int:
    try:
        traj = trajio.read_trajectory(args.trajectory)
    except (OSError, trajio.TrajectoryFormatError) as exc:
        print(f"cannot read trajectory: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report = diagnostics.full_report(traj)
    _print_verdicts(report, args.quiet)
    stored_path = args.trajectory.replace(".traj", ".report.json")
    if os.path.exists(stored_path):
        stored = trajio.read_report(stored_path)
        mismatches = [
            (a.name, a.verdict, b.verdict)
            for a, b in zip(stored.verdicts, report.verdicts)
            if a.name != b.name or a.verdict != b.verdict
        ]
        if mismatches:
            print(f"stored report disagrees: {mismatches}", file=sys.stderr)
            return EXIT_VERDICT
        if not args.quiet:
            print("stored report verdicts reproduced exactly")
    if report.all_ok():
        return EXIT_OK
    print(_failure_summary(report))
    return EXIT_VERDICT


def cmd_convergence(args) -> int:
    try:
        cfg = _load(args.config, args.quiet)
    except ConfigError as exc:
        for line in exc.errors:
            print(f"config error: {line}", file=sys.stderr)
        return EXIT_CONFIG
    ladder = [int(x) for x in args.ladder.split(",")]
    if len(ladder) < 2:
        print("ladder needs at least two sizes", file=sys.stderr)
        return EXIT_CONFIG
    try:
        ref_cfg = replace(cfg, mesh=Mesh(half_length=cfg.mesh.half_length,
                                         n=max(ladder), kind=cfg.mesh.kind))
        jobs = [replace(cfg, mesh=Mesh(half_length=cfg.mesh.half_length, n=n,
                                       kind=cfg.mesh.kind)) for n in ladder]
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            runs = list(pool.map(solver.run, jobs)) if args.workers > 1 else \
                [solver.run(j) for j in jobs]
        reference = oracle.explicit_reference_run(ref_cfg, refine=args.oracle_refine)
    except (SolverAbort, OracleAbort) as exc:
        print(f"solver abort: {exc}", file=sys.stderr)
        return EXIT_ABORT

    errs, dxs = [], []
    print(f"{'n':>6s} {'dx':>10s} {'L2(u)':>10s} {'L2(v)':>10s} "
          f"{'L2(th)':>10s} {'L2(z)':>10s} {'combined':>10s}")
    for n, run in zip(ladder, runs):
        table = oracle.compare(run, reference)
        errs.append(table.final_combined_l2())
        dxs.append(run.mesh.dx)
        print(f"{n:6d} {run.mesh.dx:10.4g} "
              + " ".join(f"{table.l2[f][-1]:10.3e}" for f in ("u", "v", "theta", "z"))
              + f" {errs[-1]:10.3e}")
    order = oracle.convergence_order(dxs, errs)
    print(f"observed L2 order: {order:.3f}")
    return EXIT_OK if order >= 0.9 else EXIT_VERDICT


def _sweep_one(payload: tuple[dict, str, str]) -> dict:
    cfg_dict, out_dir, name = payload
    cfg = config_mod.config_from_dict(cfg_dict)
    try:
        traj = solver.run(cfg)
    except SolverAbort as exc:
        return {"name": name, "status": "abort", "detail": str(exc)}
    report = diagnostics.full_report(traj, cfg.tol)
    traj_path, report_path = trajio.default_paths(out_dir, name)
    trajio.write_trajectory(traj_path, traj)
    trajio.write_report(report_path, report)
    h1 = report.snapshots["h1_dev"]
    return {"name": name, "status": "ok" if report.all_ok() else "verdict-fail",
            "h1_final": h1[-1],
            "failed": [v.name for v in report.verdicts if v.verdict == "fail"]}


def _parse_grid(spec: str) -> list[dict[str, str]]:
    """'fluid.q=1,2;mesh.n=128,256' -> list of {dotted-key: value} combos."""
    axes = []
    for part in filter(None, (p.strip() for p in spec.split(";"))):
        key, _, values = part.partition("=")
        if not values:
            raise ConfigError([f"sweep grid: bad axis {part!r}"])
        axes.append([(key.strip(), v.strip()) for v in values.split(",")])
    combos: list[dict[str, str]] = [{}]
    for axis in axes:
        combos = [dict(c, **{k: v}) for c in combos for k, v in axis]
    return combos


def cmd_sweep(args) -> int:
    try:
        cfg = _load(args.config, args.quiet)
        combos = _parse_grid(args.grid)
    except ConfigError as exc:
        for line in exc.errors:
            print(f"config error: {line}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = _default_out(args.out, cfg.out_dir)
    os.makedirs(out_dir, exist_ok=True)

    payloads = []
    base = config_mod.config_dict(cfg)
    for i, combo in enumerate(combos):
        d = json.loads(json.dumps(base))
        tag = []
        for dotted, value in combo.items():
            section, _, key = dotted.partition(".")
            if section not in d or key not in d[section]:
                print(f"config error: sweep grid: unknown key {dotted}", file=sys.stderr)
                return EXIT_CONFIG
            d[section][key] = value
            tag.append(f"{key}={value}")
        payloads.append((d, out_dir, f"sweep{i:03d}-" + "-".join(tag)))

    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_sweep_one, payloads))
    else:
        results = [_sweep_one(p) for p in payloads]

    worst = EXIT_OK
    for res in results:
        line = f"{res['name']:40s} {res['status']:14s}"
        if res["status"] == "ok":
            line += f" h1_final={res['h1_final']:.4g}"
        elif res["status"] == "verdict-fail":
            line += f" failed={','.join(res['failed'])}"
            worst = max(worst, EXIT_VERDICT)
        else:
            line += f" {res['detail']}"
            worst = max(worst, EXIT_ABORT)
        print(line)
    return worst


def cmd_scenarios(args) -> int:
    print(config_mod.scenario_help())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="combustion1d",
        description="1D Lagrangian reacting-flow solver and theorem audit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate a config and audit the result")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None, help=f"output dir (or ${OUT_ENV})")
    p_run.add_argument("--name", default=None, help="basename for output files")
    p_run.add_argument("--snapshot-every", type=float, default=None)
    p_run.add_argument("--quiet", action="store_true")
    p_run.set_defaults(fn=cmd_run)

    p_ver = sub.add_parser("verify", help="re-run diagnostics on a stored trajectory")
    p_ver.add_argument("trajectory")
    p_ver.add_argument("--quiet", action="store_true")
    p_ver.set_defaults(fn=cmd_verify)

    p_conv = sub.add_parser("convergence", help="grid ladder against the explicit oracle")
    p_conv.add_argument("--config", required=True)
    p_conv.add_argument("--ladder", default="256,512,1024")
    p_conv.add_argument("--oracle-refine", type=int, default=4)
    p_conv.add_argument("--workers", type=int, default=1)
    p_conv.add_argument("--quiet", action="store_true")
    p_conv.set_defaults(fn=cmd_convergence)

    p_sweep = sub.add_parser("sweep", help="cartesian parameter sweep")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--grid", required=True,
                         help="e.g. 'fluid.q=0.5,1;mesh.n=128,256'")
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--quiet", action="store_true")
    p_sweep.set_defaults(fn=cmd_sweep)

    p_sc = sub.add_parser("scenarios", help="list built-in initial-data scenarios")
    p_sc.set_defaults(fn=cmd_scenarios)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
