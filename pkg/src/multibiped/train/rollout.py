"""Rollout collection: frozen-policy episodes pooled into the shared buffer.

Workers run whole episodes with plain-numpy policy inference. The parallel
path forks one pool per collection round so parameters reach workers through
copy-on-write memory instead of per-task pickling; episode seeds make
results independent of scheduling.
"""
from __future__ import annotations

import multiprocessing as mp
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..config import RunConfig
from ..env.curriculum import curriculum_stage
from ..env.mdp import EnvOptions, TransportEnv
from ..env.termination import TerminationReason
from ..nn.normalize import RunningNorm
from ..nn.policy import HiddenState, policy_step_np, sample_action
from ..sim.constraints import SolverError
from ..sim.world import SimulationFault
from .buffer import Trajectory, TransitionBatch


@dataclass
class EpisodeResult:
    trajectories: list[Trajectory]
    length: int
    reason: str
    fault: str | None = None


@dataclass
class CollectStats:
    episodes: int = 0
    env_steps: int = 0
    faults: int = 0
    mean_episode_length: float = 0.0
    reasons: dict[str, int] = field(default_factory=dict)


def run_episode(
    cfg: RunConfig,
    params: dict[str, np.ndarray],
    norm: RunningNorm,
    stage_num: int | None,
    seed: int,
    options: EnvOptions | None = None,
    episode_id: int = 0,
) -> EpisodeResult:
    """One full episode; every robot contributes its own trajectory."""
    stage = curriculum_stage(stage_num, cfg.perturbation) if stage_num is not None else None
    env = TransportEnv(cfg, seed=seed, stage=stage, options=options)
    try:
        obs = env.reset()
    except Exception as exc:  # configuration sampling can fail only by bug
        return EpisodeResult([], 0, "fault", fault=f"reset: {exc}")

    n = env.n_robots
    noise_rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed ^ 0x9E3779B9).spawn(n)]
    hiddens = [HiddenState.zeros() for _ in range(n)]
    store: list[dict[str, list]] = [
        {"obs": [], "act": [], "logp": [], "rew": [], "val": [], "terms": {}} for _ in range(n)
    ]

    reason = TerminationReason.NONE
    try:
        for _ in range(env.timeout_steps):
            actions = np.zeros((n, 10))
            for r in range(n):
                o_norm = norm.normalize(obs[r])
                act, logp, value, hiddens[r] = sample_action(
                    params, o_norm, hiddens[r], noise_rngs[r].standard_normal(10)
                )
                actions[r] = act
                store[r]["obs"].append(obs[r])
                store[r]["act"].append(act)
                store[r]["logp"].append(logp)
                store[r]["val"].append(value)
            obs, rewards, reason = env.step(actions)
            for r in range(n):
                store[r]["rew"].append(rewards[r].total)
                for k, v in rewards[r].as_dict().items():
                    store[r]["terms"][k] = store[r]["terms"].get(k, 0.0) + v
            if reason is not TerminationReason.NONE:
                break
    except (SimulationFault, SolverError) as exc:
        return EpisodeResult([], 0, "fault", fault=str(exc))

    truncated = reason is TerminationReason.TIMEOUT
    trajectories = []
    for r in range(n):
        if truncated:
            _, bootstrap, _ = policy_step_np(params, norm.normalize(obs[r]), hiddens[r])
        else:
            bootstrap = 0.0
        trajectories.append(
            Trajectory(
                observations=np.array(store[r]["obs"]),
                actions=np.array(store[r]["act"]),
                log_probs=np.array(store[r]["logp"]),
                rewards=np.array(store[r]["rew"]),
                values=np.array(store[r]["val"]),
                terminal=not truncated,
                bootstrap_value=float(bootstrap),
                episode_id=episode_id,
                robot_idx=r,
                reward_terms=store[r]["terms"],
            )
        )
    return EpisodeResult(trajectories, trajectories[0].length if trajectories else 0, reason.value)


# fork-shared context for pool workers; set by the parent right before fork
_CTX: dict[str, Any] = {}


def _episode_task(args: tuple[int, int]) -> EpisodeResult:
    seed, episode_id = args
    return run_episode(
        _CTX["cfg"],
        _CTX["params"],
        _CTX["norm"],
        _CTX["stage"],
        seed,
        options=_CTX["options"],
        episode_id=episode_id,
    )


class RolloutCollector:
    """Collects one TransitionBatch per call, serially or across workers."""

    def __init__(self, cfg: RunConfig, n_workers: int = 1):
        self.cfg = cfg
        self.n_workers = max(1, n_workers)
        self._episode_counter = 0

    def collect(
        self,
        params: dict[str, np.ndarray],
        norm: RunningNorm,
        stage_num: int | None,
        seed_base: int,
        capacity: int | None = None,
        options: EnvOptions | None = None,
        min_episodes: int = 1,
    ) -> tuple[TransitionBatch, CollectStats]:
        capacity = capacity or self.cfg.trainer.buffer_size
        batch = TransitionBatch(capacity=capacity)
        stats = CollectStats()

        def consume(result: EpisodeResult) -> None:
            stats.episodes += 1
            if result.fault is not None:
                stats.faults += 1
                batch.faults += 1
                return
            for traj in result.trajectories:
                batch.add(traj)
                stats.env_steps += traj.length
            stats.reasons[result.reason] = stats.reasons.get(result.reason, 0) + 1

        if self.n_workers == 1:
            while not batch.full or stats.episodes < min_episodes:
                seed = seed_base + self._episode_counter
                consume(run_episode(self.cfg, params, norm, stage_num, seed, options, self._episode_counter))
                self._episode_counter += 1
        else:
            _CTX.update(
                cfg=self.cfg, params=params, norm=norm, stage=stage_num, options=options
            )
            ctx = mp.get_context("fork")
            with ctx.Pool(self.n_workers) as pool:
                while not batch.full or stats.episodes < min_episodes:
                    wave = [
                        (seed_base + self._episode_counter + i, self._episode_counter + i)
                        for i in range(self.n_workers * 2)
                    ]
                    self._episode_counter += len(wave)
                    for result in pool.map(_episode_task, wave):
                        consume(result)
            _CTX.clear()

        lengths = [t.length for t in batch.trajectories]
        stats.mean_episode_length = float(np.mean(lengths)) if lengths else 0.0
        return batch, stats
