"""Drift, failure-rate, and power metrics over recorded episodes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..env.commands import Command
from ..so3 import rot2d


@dataclass
class EpisodeRecord:
    """What one evaluation episode leaves behind for metric computation."""

    steps: int  # survived policy steps
    horizon: int
    dt: float
    initial_pose: tuple[float, float, float]  # x, y, yaw of the control point
    final_pose: tuple[float, float, float]  # yaw unwrapped over the episode
    power_w: float  # mean |grf . pelvis velocity| over steps, all robots
    perturbed: bool
    reason: str
    seed: int = 0

    @property
    def completed(self) -> bool:
        return self.steps >= self.horizon

    @property
    def duration_s(self) -> float:
        return self.steps * self.dt


def expected_pose(
    command: Command, initial_pose: tuple[float, float, float], duration_s: float
) -> tuple[float, float, float]:
    """Integrate the command from the initial pose over the elapsed time.

    For constant commands the heading integrates linearly and the position
    follows the closed-form circular arc (straight line at zero yaw rate).
    """
    x0, y0, yaw0 = initial_pose
    v = np.array([command.vx, command.vy])
    if abs(command.omega) < 1e-12:
        dxy = rot2d(yaw0) @ (v * duration_s)
        return x0 + dxy[0], y0 + dxy[1], yaw0
    yaw1 = yaw0 + command.omega * duration_s
    # integral of R(yaw0 + w t) v dt from 0 to T
    s0, c0 = np.sin(yaw0), np.cos(yaw0)
    s1, c1 = np.sin(yaw1), np.cos(yaw1)
    w = command.omega
    dx = ((s1 - s0) * v[0] + (c1 - c0) * v[1]) / w
    dy = ((c0 - c1) * v[0] + (s1 - s0) * v[1]) / w
    return x0 + dx, y0 + dy, yaw1


def drift(record: EpisodeRecord, command: Command) -> tuple[float, float, float]:
    """Final-pose deviation from the command-integrated reference.

    Positional error is expressed in the expected final heading frame;
    negative x means the carrier fell behind the commanded motion. The yaw
    error uses the unwrapped heading so multi-revolution turns keep their
    full deficit. Returns (dx m, dy m, dtheta deg).
    """
    if record.duration_s < 1.0:
        raise ValueError("drift is undefined for episodes shorter than 1 s")
    if record.perturbed:
        raise ValueError("drift excludes perturbed episodes")
    ex, ey, eyaw = expected_pose(command, record.initial_pose, record.duration_s)
    ax, ay, ayaw = record.final_pose
    err_world = np.array([ax - ex, ay - ey])
    err_local = rot2d(eyaw).T @ err_world
    dyaw = ayaw - eyaw
    return float(err_local[0]), float(err_local[1]), float(np.degrees(dyaw))


def failure_rate(records: list[EpisodeRecord]) -> float:
    """Percent of episodes terminating before the horizon."""
    if not records:
        raise ValueError("failure rate needs at least one episode")
    failed = sum(1 for r in records if not r.completed)
    return 100.0 * failed / len(records)


def power(records: list[EpisodeRecord]) -> float:
    """Mean mechanical-work-rate proxy over episodes (W)."""
    if not records:
        return 0.0
    return float(np.mean([r.power_w for r in records]))


def step_power(grfs: np.ndarray, pelvis_velocities: np.ndarray) -> float:
    """|GRF . pelvis velocity| summed over robots and stance feet, one step.

    grfs: (n_robots, 2, 3); pelvis_velocities: (n_robots, 3).
    """
    total = 0.0
    for r in range(grfs.shape[0]):
        for f in range(2):
            total += abs(float(np.dot(grfs[r, f], pelvis_velocities[r])))
    return total


@dataclass
class MetricsCell:
    """One scenario x command cell of the report."""

    scenario: str
    command: str
    episodes: int = 0
    drift_x: float = float("nan")
    drift_y: float = float("nan")
    drift_theta_deg: float = float("nan")
    drift_episodes: int = 0
    failure_rate_pct: float = 0.0
    power_w: float = 0.0

    def as_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "command": self.command,
            "episodes": self.episodes,
            "drift_x_m": self.drift_x,
            "drift_y_m": self.drift_y,
            "drift_theta_deg": self.drift_theta_deg,
            "drift_episodes": self.drift_episodes,
            "failure_rate_pct": self.failure_rate_pct,
            "power_w": self.power_w,
        }


def summarize_cell(
    scenario: str,
    command_name: str,
    command: Command,
    records: list[EpisodeRecord],
) -> MetricsCell:
    """Aggregate one cell; drift only over unperturbed episodes >= 1 s."""
    cell = MetricsCell(scenario=scenario, command=command_name, episodes=len(records))
    cell.failure_rate_pct = round(failure_rate(records), 2)
    cell.power_w = power(records)
    eligible = [r for r in records if not r.perturbed and r.duration_s >= 1.0]
    if eligible:
        drifts = np.array([drift(r, command) for r in eligible])
        cell.drift_x = float(drifts[:, 0].mean())
        cell.drift_y = float(drifts[:, 1].mean())
        cell.drift_theta_deg = float(drifts[:, 2].mean())
        cell.drift_episodes = len(eligible)
    return cell
