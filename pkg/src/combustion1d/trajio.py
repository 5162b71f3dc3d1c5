"""Trajectory persistence: binary snapshot records behind a JSON header.

Layout: an 8-byte magic, a little-endian uint32 schema version, a uint64
header length, the header JSON (config echo, run metadata, field layout),
then fixed-size snapshot records of little-endian float64: t, dt, u[n],
v[n+1], theta[n], z[n].  A sidecar ``<path>.idx`` JSON lists the absolute
byte offset of every snapshot.  Writing is canonical, so write / read /
write round-trips byte-identically.
"""
from __future__ import annotations

import json
import os

import numpy as np

from . import config as config_mod
from .diagnostics import DiagnosticsReport
from .grid import State, Trajectory

__all__ = ["write_trajectory", "read_trajectory", "write_report", "read_report",
           "TrajectoryFormatError"]

MAGIC = b"C1DTRAJ\x00"
SCHEMA_VERSION = 1


class TrajectoryFormatError(RuntimeError):
    pass


def _canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _layout(n: int) -> list[list]:
    return [["t", 1], ["dt", 1], ["u", n], ["v", n + 1], ["theta", n], ["z", n]]


def write_trajectory(path: str, traj: Trajectory) -> None:
    n = traj.mesh.n
    header = {
        "schema": SCHEMA_VERSION,
        "config": traj.meta.get("config") or config_mod.config_dict(
            _config_for(traj)),
        "meta": {k: v for k, v in traj.meta.items() if k != "config"},
        "n": n,
        "layout": _layout(n),
        "snapshots": len(traj.states),
    }
    blob = _canonical_json(header)
    offsets = []
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(np.uint32(SCHEMA_VERSION).tobytes())
        fh.write(np.uint64(len(blob)).tobytes())
        fh.write(blob)
        for state in traj.states:
            offsets.append(fh.tell())
            rec = np.concatenate(([state.t, state.dt], state.u, state.v,
                                  state.theta, state.z))
            fh.write(rec.astype("<f8").tobytes())
    with open(path + ".idx", "wb") as fh:
        fh.write(_canonical_json({"count": len(offsets), "offsets": offsets}))


def _config_for(traj: Trajectory):
    return config_mod.RunConfig(fluid=traj.params, rate=traj.rate,
                                mesh=traj.mesh, bc=traj.bc)


def read_trajectory(path: str) -> Trajectory:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise TrajectoryFormatError(f"{path}: bad magic {magic!r}")
        version = int(np.frombuffer(fh.read(4), "<u4")[0])
        if version != SCHEMA_VERSION:
            raise TrajectoryFormatError(f"{path}: unsupported schema {version}")
        hlen = int(np.frombuffer(fh.read(8), "<u8")[0])
        header = json.loads(fh.read(hlen).decode("utf-8"))
        n = int(header["n"])
        count = int(header["snapshots"])
        rec_len = 2 + n + (n + 1) + n + n
        states = []
        for _ in range(count):
            buf = fh.read(rec_len * 8)
            if len(buf) != rec_len * 8:
                raise TrajectoryFormatError(f"{path}: truncated snapshot record")
            rec = np.frombuffer(buf, "<f8")
            states.append(State(
                t=float(rec[0]), dt=float(rec[1]),
                u=rec[2:2 + n].copy(),
                v=rec[2 + n:3 + 2 * n].copy(),
                theta=rec[3 + 2 * n:3 + 3 * n].copy(),
                z=rec[3 + 3 * n:3 + 4 * n].copy(),
            ))
        if fh.read(1):
            raise TrajectoryFormatError(f"{path}: trailing bytes after snapshots")
    cfg = config_mod.config_from_dict(header["config"])
    meta = dict(header.get("meta", {}))
    meta["config"] = header["config"]
    return Trajectory(mesh=cfg.mesh, bc=cfg.bc, params=cfg.fluid, rate=cfg.rate,
                      states=states, meta=meta)


def write_report(path: str, report: DiagnosticsReport) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, sort_keys=True, indent=1)
        fh.write("\n")


def read_report(path: str) -> DiagnosticsReport:
    with open(path, "r", encoding="utf-8") as fh:
        return DiagnosticsReport.from_dict(json.load(fh))


def default_paths(out_dir: str, name: str) -> tuple[str, str]:
    """Trajectory and report paths for a run name inside out_dir."""
    return (os.path.join(out_dir, f"{name}.traj"),
            os.path.join(out_dir, f"{name}.report.json"))
