"""Evaluation harness: scripted episodes under the four fixed commands, with
optional perturbation sweeps, reduced to one metrics cell per command."""
from __future__ import annotations

import functools
import json
import multiprocessing as mp
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..config import RunConfig
from ..env.commands import Command
from ..env.mdp import EnvOptions, TransportEnv
from ..env.termination import TerminationReason
from ..nn.normalize import RunningNorm
from ..nn.policy import HiddenState, policy_step_np, sample_action
from ..sim.constraints import SolverError
from ..sim.trajlog import TrajectoryWriter
from ..sim.world import PerturbationSpec, SimulationFault
from ..so3 import wrap_angle
from .metrics import EpisodeRecord, MetricsCell, step_power, summarize_cell
from .scenarios import EvalScenario, build_scenario


def eval_perturbation_schedule(
    rng: np.random.Generator,
    horizon: int,
    magnitude: float = 0.0,
    period: int = 250,
    duration_range: tuple[int, int] = (50, 200),
) -> list[PerturbationSpec]:
    """Fixed-magnitude pushes on the carrier at a regular cadence."""
    if magnitude <= 0.0:
        return []
    events = []
    start = int(rng.integers(25, period))
    while start < horizon:
        duration = int(rng.integers(duration_range[0], duration_range[1] + 1))
        azimuth = float(rng.uniform(-np.pi, np.pi))
        events.append(
            PerturbationSpec(
                force=magnitude * np.array([np.cos(azimuth), np.sin(azimuth), 0.0]),
                target="carrier",
                start_step=start,
                duration_steps=duration,
            )
        )
        start += period
    return events


@dataclass
class MetricsReport:
    scenario: str
    checkpoint: str
    episodes_per_cell: int
    seed: int
    horizon_steps: int
    power_definition: str = (
        "mean over steps of sum over robots and stance feet of |GRF . pelvis velocity| (W)"
    )
    cells: list[MetricsCell] = field(default_factory=list)
    sweep: list[dict[str, Any]] = field(default_factory=list)  # per command x force level

    def as_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "checkpoint": self.checkpoint,
            "episodes_per_cell": self.episodes_per_cell,
            "seed": self.seed,
            "horizon_steps": self.horizon_steps,
            "power_definition": self.power_definition,
            "cells": [c.as_dict() for c in self.cells],
            "sweep": self.sweep,
        }

    def to_tsv(self) -> str:
        lines = ["scenario\tcommand\tepisodes\tdrift_x_m\tdrift_y_m\tdrift_theta_deg\tfailure_rate_pct\tpower_w"]
        for c in self.cells:
            lines.append(
                f"{c.scenario}\t{c.command}\t{c.episodes}\t{c.drift_x:.3f}\t{c.drift_y:.3f}"
                f"\t{c.drift_theta_deg:.2f}\t{c.failure_rate_pct:.2f}\t{c.power_w:.1f}"
            )
        if self.sweep:
            lines.append("")
            lines.append("command\tperturbation_n\tepisodes\tfailure_rate_pct\tpower_w")
            for row in self.sweep:
                lines.append(
                    f"{row['command']}\t{row['perturbation_n']:.0f}\t{row['episodes']}"
                    f"\t{row['failure_rate_pct']:.2f}\t{row['power_w']:.1f}"
                )
        return "\n".join(lines) + "\n"

    def write(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"report_{self.scenario}.tsv").write_text(self.to_tsv())
        (out / f"report_{self.scenario}.json").write_text(json.dumps(self.as_dict(), indent=2))


def run_eval_episode(
    cfg: RunConfig,
    params: dict[str, np.ndarray],
    norm: RunningNorm,
    scenario: EvalScenario,
    command: Command,
    seed: int,
    perturb_magnitude: float = 0.0,
    deterministic: bool = True,
    log_writer: TrajectoryWriter | None = None,
) -> EpisodeRecord:
    """One fixed-command episode; returns the metric-relevant summary."""
    horizon = cfg.eval.horizon_steps
    schedule = None
    if perturb_magnitude > 0.0:
        schedule = functools.partial(
            eval_perturbation_schedule,
            magnitude=perturb_magnitude,
            period=cfg.eval.perturbation_period_steps,
            duration_range=cfg.perturbation.duration_steps,
        )
    options = EnvOptions(
        fixed_config=scenario.config,
        fixed_payload=scenario.payload,
        fixed_command=command,
        timeout_steps=horizon,
        randomize=cfg.eval.randomize_dynamics,
        perturbation_schedule=schedule,
    )
    env = TransportEnv(cfg, seed=seed, stage=None, options=options)
    obs = env.reset()
    n = env.n_robots
    hiddens = [HiddenState.zeros() for _ in range(n)]
    noise_rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed ^ 0x5DEECE66D).spawn(n)]

    cp0 = env.sim.control_point_position()
    yaw = env.sim.carrier_yaw()
    initial_pose = (float(cp0[0]), float(cp0[1]), float(yaw))
    yaw_unwrapped = yaw
    power_acc = 0.0
    steps = 0
    reason = TerminationReason.NONE

    try:
        for _ in range(horizon):
            actions = np.zeros((n, 10))
            for r in range(n):
                o_norm = norm.normalize(obs[r])
                if deterministic:
                    mean, _, hiddens[r] = policy_step_np(params, o_norm, hiddens[r])
                    actions[r] = mean
                else:
                    actions[r], _, _, hiddens[r] = sample_action(
                        params, o_norm, hiddens[r], noise_rngs[r].standard_normal(10)
                    )
            obs, rewards, reason = env.step(actions)
            steps += 1
            grfs = np.stack([env.sim.legs[r].commanded_grf for r in range(n)])
            vels = np.stack([env.sim.robot(r).linear_velocity for r in range(n)])
            power_acc += step_power(grfs, vels)
            new_yaw = env.sim.carrier_yaw()
            yaw_unwrapped += wrap_angle(new_yaw - yaw)
            yaw = new_yaw
            if log_writer is not None:
                extra = [rewards[r].total for r in range(n)]
                extra += [rewards[0].velocity_x, rewards[0].velocity_y, rewards[0].orientation]
                log_writer.record(env.sim, env.command, extra_values=extra)
            if reason is not TerminationReason.NONE:
                break
    except (SimulationFault, SolverError):
        reason = TerminationReason.PELVIS_TILT  # counted as failure

    if log_writer is not None:
        log_writer.meta["termination"] = reason.value
        log_writer.meta["perturbation_n"] = f"{perturb_magnitude:g}"

    cp1 = env.sim.control_point_position()
    return EpisodeRecord(
        steps=steps,
        horizon=horizon,
        dt=cfg.sim.policy_dt,
        initial_pose=initial_pose,
        final_pose=(float(cp1[0]), float(cp1[1]), float(yaw_unwrapped)),
        power_w=power_acc / max(1, steps),
        perturbed=perturb_magnitude > 0.0,
        reason=reason.value,
        seed=seed,
    )


_EVAL_CTX: dict[str, Any] = {}


def _eval_task(args: tuple) -> EpisodeRecord:
    command_name, seed, magnitude = args
    return run_eval_episode(
        _EVAL_CTX["cfg"],
        _EVAL_CTX["params"],
        _EVAL_CTX["norm"],
        _EVAL_CTX["scenario"],
        _EVAL_CTX["scenario"].commands[command_name],
        seed,
        perturb_magnitude=magnitude,
        deterministic=_EVAL_CTX["deterministic"],
    )


def run_eval(
    cfg: RunConfig,
    params: dict[str, np.ndarray],
    norm: RunningNorm,
    scenario: EvalScenario | str,
    episodes: int | None = None,
    seed: int = 0,
    perturbation_grid: tuple[float, ...] | None = None,
    checkpoint_name: str = "",
    n_workers: int | None = None,
    commands: list[str] | None = None,
) -> MetricsReport:
    """Run the scenario's command grid and reduce to a MetricsReport.

    Each cell runs `episodes` unperturbed episodes; when a perturbation grid
    is supplied, every nonzero level adds `episodes` more per command, and
    failure rates per level land in the sweep table. Deterministic given the
    master seed.
    """
    if isinstance(scenario, str):
        scenario = build_scenario(scenario, cfg.eval)
    episodes = episodes or cfg.eval.episodes
    n_workers = n_workers if n_workers is not None else cfg.eval.n_workers
    grid = list(perturbation_grid) if perturbation_grid else [0.0]
    if 0.0 not in grid:
        grid = [0.0] + grid

    expected = params["actor_lstm1_wx"].shape[1]
    if norm.dim != expected:
        raise ValueError(
            f"checkpoint normalization dim {norm.dim} does not match network input {expected}"
        )

    tasks = []
    seq = np.random.SeedSequence(seed)
    seeds = seq.generate_state(len(scenario.commands) * len(grid) * episodes).astype(np.int64)
    i = 0
    command_names = commands or list(scenario.commands)
    for command_name in command_names:
        for magnitude in grid:
            for _ in range(episodes):
                tasks.append((command_name, int(abs(seeds[i])), float(magnitude)))
                i += 1

    _EVAL_CTX.update(
        cfg=cfg,
        params=params,
        norm=norm,
        scenario=scenario,
        deterministic=cfg.eval.deterministic_policy,
    )
    if n_workers > 1:
        ctx = mp.get_context("fork")
        with ctx.Pool(n_workers) as pool:
            results = pool.map(_eval_task, tasks)
    else:
        results = [_eval_task(t) for t in tasks]
    _EVAL_CTX.clear()

    by_cell: dict[tuple[str, float], list[EpisodeRecord]] = {}
    for task, record in zip(tasks, results):
        by_cell.setdefault((task[0], task[2]), []).append(record)

    report = MetricsReport(
        scenario=scenario.name,
        checkpoint=checkpoint_name,
        episodes_per_cell=episodes,
        seed=seed,
        horizon_steps=cfg.eval.horizon_steps,
    )
    for command_name in command_names:
        all_records = [r for (cname, _), recs in by_cell.items() if cname == command_name for r in recs]
        cell = summarize_cell(
            scenario.name, command_name, scenario.commands[command_name], all_records
        )
        report.cells.append(cell)
        for magnitude in grid:
            recs = by_cell[(command_name, magnitude)]
            report.sweep.append(
                {
                    "command": command_name,
                    "perturbation_n": magnitude,
                    "episodes": len(recs),
                    "failure_rate_pct": round(
                        100.0 * sum(1 for r in recs if not r.completed) / len(recs), 2
                    ),
                    "power_w": float(np.mean([r.power_w for r in recs])),
                }
            )
    return report
