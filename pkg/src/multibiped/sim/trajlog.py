"""Newline-delimited trajectory logs.

Tab-separated columns with a one-line header; '#' metadata lines carry the
schema version, robot count, and column definitions. Per-robot column groups
repeat with an r{i}_ prefix, so one file fully describes an episode.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..so3 import quat_yaw
from .world import SimState

SCHEMA_VERSION = 1

_CARRIER_COLS = [
    "cp_x", "cp_y", "cp_z",
    "c_qw", "c_qx", "c_qy", "c_qz",
    "cp_vx", "cp_vy", "cp_vz",
    "c_wx", "c_wy", "c_wz",
    "c_yaw",
]
_ROBOT_COLS = [
    "x", "y", "z", "qw", "qx", "qy", "qz",
    "vx", "vy", "vz",
    "contact_l", "contact_r",
    "foot_lx", "foot_ly", "foot_lz", "foot_rx", "foot_ry", "foot_rz",
    "grf_lz", "grf_rz",
    "lam_x", "lam_y", "lam_z",
]
_COMMAND_COLS = ["cmd_vx", "cmd_vy", "cmd_omega", "cmd_h"]


def header_columns(n_robots: int, extra: list[str] | None = None) -> list[str]:
    cols = ["step", "time"] + _CARRIER_COLS + _COMMAND_COLS
    for i in range(n_robots):
        cols += [f"r{i}_{c}" for c in _ROBOT_COLS]
    if extra:
        cols += extra
    return cols


@dataclass
class TrajectoryWriter:
    """Accumulates rows; write() emits the documented columnar text file."""

    n_robots: int
    extra_columns: list[str] = field(default_factory=list)
    rows: list[list[float]] = field(default_factory=list)
    meta: dict[str, str] = field(default_factory=dict)

    def record(
        self,
        sim: SimState,
        command,
        extra_values: list[float] | None = None,
    ) -> None:
        cp = sim.control_point_position()
        cpv = sim.control_point_velocity()
        c = sim.carrier
        row = [float(sim.step_count), sim.time]
        row += [*cp, *c.orientation, *cpv, *c.angular_velocity, quat_yaw(c.orientation)]
        row += list(command.as_array())
        for i in range(sim.n_robots):
            b = sim.robot(i)
            legs = sim.legs[i]
            row += [*b.position, *b.orientation, *b.linear_velocity]
            row += [float(legs.in_stance[0]), float(legs.in_stance[1])]
            row += [*legs.foot_pos[0], *legs.foot_pos[1]]
            row += [legs.commanded_grf[0, 2], legs.commanded_grf[1, 2]]
            row += list(sim.joint_forces[i])
        if self.extra_columns:
            row += list(extra_values or [0.0] * len(self.extra_columns))
        self.rows.append(row)

    def to_text(self) -> str:
        buf = io.StringIO()
        buf.write(f"# trajectory schema_version={SCHEMA_VERSION} n_robots={self.n_robots}\n")
        for k, v in self.meta.items():
            buf.write(f"# {k}={v}\n")
        cols = header_columns(self.n_robots, self.extra_columns)
        buf.write("\t".join(cols) + "\n")
        for row in self.rows:
            buf.write("\t".join(f"{v:.9g}" for v in row) + "\n")
        return buf.getvalue()

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())


@dataclass
class TrajectoryLog:
    n_robots: int
    columns: list[str]
    data: np.ndarray  # (steps, n_columns)
    meta: dict[str, str]

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]


def read_trajectory(path: str | Path) -> TrajectoryLog:
    meta: dict[str, str] = {}
    columns: list[str] | None = None
    rows = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            for token in line[1:].split():
                if "=" in token:
                    k, v = token.split("=", 1)
                    meta[k] = v
            continue
        if columns is None:
            columns = line.split("\t")
            continue
        rows.append([float(v) for v in line.split("\t")])
    if columns is None:
        raise ValueError(f"{path} contains no column header")
    return TrajectoryLog(
        n_robots=int(meta.get("n_robots", "0")),
        columns=columns,
        data=np.array(rows) if rows else np.zeros((0, len(columns))),
        meta=meta,
    )
