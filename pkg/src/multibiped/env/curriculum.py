"""The four training stages: robot counts, disturbances, and bar masses."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..config import CurriculumParams, PerturbationParams
from ..sim.world import PerturbationSpec


@dataclass
class CurriculumStage:
    stage: int
    allowed_n_robots: tuple[int, ...]
    perturbation_bound: float  # N; 0 disables pushes
    torsion_bound: float  # N*m yaw torque on the carrier
    randomize_bar_mass: bool
    perturb_targets: tuple[str, ...] = ("carrier",)

    def __post_init__(self) -> None:
        if self.stage not in (1, 2, 3, 4):
            raise ValueError(f"stage must be 1..4, got {self.stage}")


def curriculum_stage(stage: int, perturb: PerturbationParams | None = None) -> CurriculumStage:
    p = perturb or PerturbationParams()
    if stage == 1:
        return CurriculumStage(1, (1,), 0.0, 0.0, False)
    if stage == 2:
        return CurriculumStage(2, (1,), p.force_bound, p.torsion_bound, False, ("carrier",))
    if stage == 3:
        return CurriculumStage(3, (1, 2, 3), 0.0, 0.0, False)
    if stage == 4:
        return CurriculumStage(
            4, (1, 2, 3), p.force_bound, p.torsion_bound, True, ("carrier", "robot")
        )
    raise ValueError(f"stage must be 1..4, got {stage}")


def sample_bar_mass(
    stage: CurriculumStage, n_robots: int, rng: np.random.Generator, params: CurriculumParams
) -> float:
    if not stage.randomize_bar_mass:
        return 0.0
    lo, hi = params.bar_mass_ranges[n_robots]
    return float(rng.uniform(lo, hi))


def sample_perturbations(
    stage: CurriculumStage,
    n_robots: int,
    episode_steps: int,
    rng: np.random.Generator,
    params: PerturbationParams,
) -> list[PerturbationSpec]:
    """Timed push events for one episode, scaled to the stage bounds."""
    if stage.perturbation_bound <= 0.0:
        return []
    events = []
    n_events = int(rng.integers(0, params.max_events_per_episode + 1))
    for _ in range(n_events):
        duration = int(rng.integers(params.duration_steps[0], params.duration_steps[1] + 1))
        start = int(rng.integers(0, max(1, episode_steps - duration)))
        magnitude = float(rng.uniform(0.0, stage.perturbation_bound))
        azimuth = float(rng.uniform(-np.pi, np.pi))
        force = magnitude * np.array([np.cos(azimuth), np.sin(azimuth), 0.0])
        if not params.horizontal_only:
            force[2] = magnitude * float(rng.uniform(-0.3, 0.3))
        target: int | str = "carrier"
        if "robot" in stage.perturb_targets and rng.random() < 0.5:
            target = int(rng.integers(0, n_robots))
        torque_z = 0.0
        if target == "carrier" and stage.torsion_bound > 0.0:
            torque_z = float(rng.uniform(-stage.torsion_bound, stage.torsion_bound))
        events.append(
            PerturbationSpec(
                force=force,
                torque_z=torque_z,
                target=target,
                start_step=start,
                duration_steps=duration,
            )
        )
    return events
