"""The decentralized transport environment.

Wraps the simulator into per-robot observation/reward streams under one
broadcast command, with configuration sampling, command rotation,
perturbation scheduling, and the episode termination rules. One env instance
is single-threaded; pools of envs parallelize across workers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..config import RunConfig
from ..sim.bodies import AttachmentConfig, PayloadSpec
from ..sim.randomize import RandomizedDynamics, randomize_dynamics
from ..sim.legs import init_leg_state
from ..sim.world import PerturbationSpec, SimState, build_system, sim_step
from ..so3 import quat_from_yaw, quat_mul, quat_rotate, quat_yaw
from .commands import Command, sample_command
from .curriculum import CurriculumStage, sample_perturbations
from .observations import observe
from .rewards import RewardBreakdown, compute_rewards
from .sampling import sample_configuration
from .termination import TerminationReason, check_termination


class EpisodeOver(RuntimeError):
    """Raised when stepping an env whose episode already terminated."""


@dataclass
class EnvOptions:
    """Optional pinning for evaluation, specialization, and teleop."""

    fixed_config: AttachmentConfig | None = None
    fixed_payload: PayloadSpec | None = None
    fixed_command: Command | None = None
    fixed_dynamics: RandomizedDynamics | None = None
    timeout_steps: int | None = None
    randomize: bool = True
    random_assembly_yaw: bool = True
    perturbation_schedule: Callable[[np.random.Generator, int], list[PerturbationSpec]] | None = None
    n_robots: int | None = None


class TransportEnv:
    def __init__(
        self,
        cfg: RunConfig,
        seed: int,
        stage: CurriculumStage | None = None,
        options: EnvOptions | None = None,
    ) -> None:
        self.cfg = cfg
        self.stage = stage
        self.options = options or EnvOptions()
        self.master_rng = np.random.default_rng(seed)
        self.sim: SimState | None = None
        self.command: Command | None = None
        self.command_steps_left = 0
        self.reference_yaw = 0.0
        self.terminated = True
        self.perturbations: list[PerturbationSpec] = []
        self.episode_count = 0
        self._noise_rngs: list[np.random.Generator] = []
        self._env_rng: np.random.Generator | None = None

    @property
    def n_robots(self) -> int:
        return self.sim.n_robots if self.sim is not None else 0

    @property
    def timeout_steps(self) -> int:
        if self.options.timeout_steps is not None:
            return self.options.timeout_steps
        return self.cfg.termination.timeout_steps

    def _sample_scene(self, rng: np.random.Generator) -> tuple[AttachmentConfig, PayloadSpec]:
        if self.options.fixed_config is not None:
            return self.options.fixed_config, (self.options.fixed_payload or PayloadSpec())
        if self.stage is None:
            raise ValueError("need either a curriculum stage or a fixed configuration")
        config = sample_configuration(
            self.stage, rng, self.cfg.curriculum, n_robots=self.options.n_robots
        )
        return config, (self.options.fixed_payload or PayloadSpec())

    def reset(self) -> np.ndarray:
        episode_seed = int(self.master_rng.integers(0, 2**63 - 1))
        seq = np.random.SeedSequence(episode_seed)
        children = seq.spawn(2)
        self._env_rng = np.random.default_rng(children[0])

        config, payload = self._sample_scene(self._env_rng)
        if self.options.fixed_dynamics is not None:
            rand = self.options.fixed_dynamics
        elif self.options.randomize:
            rand = randomize_dynamics(self._env_rng, self.cfg.randomization)
        else:
            rand = RandomizedDynamics()

        if self.options.fixed_command is not None:
            self.command = self.options.fixed_command
            self.command_steps_left = self.timeout_steps
        else:
            self.command = sample_command(self._env_rng, self.cfg.commands)
            self.command_steps_left = self.command.duration

        assembly_yaw = (
            float(self._env_rng.uniform(-np.pi, np.pi)) if self.options.random_assembly_yaw else 0.0
        )
        self.sim = build_system(
            config,
            payload=payload,
            rand=rand,
            params=self.cfg.sim,
            initial_height=self.command.height,
            initial_yaw=assembly_yaw,
        )
        # per-robot encoder-noise streams stay independent of everything else
        self._noise_rngs = [
            np.random.default_rng(s) for s in np.random.SeedSequence(episode_seed + 1).spawn(config.n_robots)
        ]
        for r in range(config.n_robots):
            dyaw = float(self._env_rng.uniform(-1.0, 1.0)) * self.cfg.sim.init_yaw_noise
            self._rotate_pelvis_about_anchor(r, dyaw)

        if self.options.perturbation_schedule is not None:
            self.perturbations = self.options.perturbation_schedule(self._env_rng, self.timeout_steps)
        elif self.stage is not None:
            self.perturbations = sample_perturbations(
                self.stage, config.n_robots, self.timeout_steps, self._env_rng, self.cfg.perturbation
            )
        else:
            self.perturbations = []

        self.reference_yaw = self.sim.carrier_yaw()
        self.terminated = False
        self.episode_count += 1
        return self._observations()

    def _rotate_pelvis_about_anchor(self, robot_idx: int, dyaw: float) -> None:
        """Yaw the pelvis about its ball joint so the constraint stays exact."""
        pelvis = self.sim.robot(robot_idx)
        joint = self.sim.joints[robot_idx]
        anchor_world = pelvis.position + pelvis.rotation @ joint.anchor_robot
        pelvis.orientation = quat_mul(quat_from_yaw(dyaw), pelvis.orientation)
        pelvis.position = anchor_world - quat_rotate(pelvis.orientation, joint.anchor_robot)
        self.sim.legs[robot_idx] = init_leg_state(
            pelvis.position, quat_yaw(pelvis.orientation), self.sim.ground, self.cfg.sim
        )

    def _observations(self) -> np.ndarray:
        return np.stack(
            [
                observe(self.sim, r, self.command, noise_rng=self._noise_rngs[r])
                for r in range(self.sim.n_robots)
            ]
        )

    def step(
        self, actions: np.ndarray
    ) -> tuple[np.ndarray, list[RewardBreakdown], TerminationReason]:
        """Advance one policy step for all robots under the broadcast command."""
        if self.terminated or self.sim is None:
            raise EpisodeOver("episode already terminated; call reset() first")

        sim_step(self.sim, actions, self.perturbations, hold_still=self.command.hold_still)
        self.reference_yaw += self.command.omega * self.cfg.sim.policy_dt

        rewards = compute_rewards(self.sim, self.command, self.reference_yaw, self.cfg.rewards)
        reason = check_termination(
            self.sim, self.sim.step_count, self.cfg.termination, timeout_steps=self.timeout_steps
        )
        if reason is not TerminationReason.NONE:
            self.terminated = True

        self.command_steps_left -= 1
        if (
            self.command_steps_left <= 0
            and self.options.fixed_command is None
            and not self.terminated
        ):
            self.command = sample_command(self._env_rng, self.cfg.commands)
            self.command_steps_left = self.command.duration

        return self._observations(), rewards, reason
