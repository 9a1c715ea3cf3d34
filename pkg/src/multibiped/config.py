"""Dataclass configuration tree with YAML load/merge.

Every tunable the training and evaluation stack reads lives here, with the
published parameter ranges as defaults (command ranges, dynamics
randomization ranges, optimizer hyperparameters).
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml


@dataclass
class CommandRanges:
    """Sampling ranges for carrier commands."""

    vx: tuple[float, float] = (-0.5, 2.0)
    vy: tuple[float, float] = (-0.3, 0.3)
    omega: tuple[float, float] = (-math.pi / 8, math.pi / 8)
    height: tuple[float, float] = (0.5, 0.8)
    duration_steps: tuple[int, int] = (100, 450)
    # fraction of sampled commands that are exact hold-still (all zeros)
    hold_probability: float = 0.25


@dataclass
class RandomizationRanges:
    """Dynamics randomization ranges, drawn uniformly once per episode."""

    damping_multiplier: tuple[float, float] = (0.5, 3.5)
    mass_multiplier: tuple[float, float] = (0.75, 1.25)
    com_offset_fraction: tuple[float, float] = (-0.01, 0.01)
    friction_multiplier: tuple[float, float] = (0.8, 1.2)
    encoder_noise_std: tuple[float, float] = (-0.05, 0.05)
    ground_slope: tuple[float, float] = (-0.05, 0.05)


@dataclass
class SimParams:
    gravity: float = 9.81
    policy_dt: float = 0.02
    substep_dt: float = 0.002
    n_substeps: int = 10
    # Baumgarte accel-level stabilization gains (relative to substep)
    baumgarte_alpha_scale: float = 0.2  # alpha = scale / dt
    baumgarte_beta_scale: float = 0.2  # beta = scale / dt^2
    # post-integration position/velocity projection onto the joint manifold
    constraint_projection: bool = True
    project_every_substep: bool = False
    kkt_residual_tol: float = 1e-8
    use_compiled_kernel: bool = True  # numba substep loop; numpy path is the fallback

    # the pelvis body stands in for the whole robot, so its attitude inertia
    # is whole-body scale rather than bare-pelvis scale
    pelvis_mass: float = 31.0
    pelvis_inertia_diag: tuple[float, float, float] = (10.0, 10.0, 3.0)
    pelvis_com_scale: float = 0.3  # meters per unit com_offset_fraction
    pelvis_angular_damping: float = 8.0
    # leg-servo compliance: position-controlled legs damp pelvis motion
    # (impact losses + joint friction); policy force offsets act on top
    leg_vertical_damping: float = 300.0
    leg_lateral_damping: float = 25.0
    # stance legs act as stiff struts: roll/pitch PD toward upright while any
    # foot is planted (yaw is never driven toward a setpoint; heading stays
    # with the policy)
    attitude_kp: float = 400.0
    attitude_kd: float = 60.0
    attitude_torque_max: float = 200.0
    # planted feet are contact patches, not points: they viscously resist yaw
    # rate (drift) without opposing sustained commanded turning torque much
    foot_yaw_friction: float = 8.0
    carrier_angular_damping: float = 8.0
    # ball-joint posts sit this far above the carrier plate mid-plane so a
    # single-robot carrier hangs pendulum-stable instead of balancing
    joint_post_height: float = 0.05
    carrier_hub_mass: float = 2.0
    carrier_bar_density: float = 2.0  # structural kg/m of connecting bars
    single_carrier_mass: float = 5.0
    single_carrier_half_extent: float = 0.3
    min_attachment_separation: float = 0.05
    min_carrier_inertia: float = 0.05

    friction_coefficient: float = 1.0
    max_normal_force: float = 2000.0
    force_scale_xy: float = 80.0
    force_scale_z: float = 200.0
    placement_scale: float = 0.3
    gait_frequency: float = 1.25
    gait_duty: float = 0.5
    stance_width: float = 0.385  # standing double-stance foot separation
    walk_width: float = 0.2  # lateral placement separation while stepping
    swing_apex: float = 0.08
    raibert_gain: float = 0.26  # seconds of velocity lead when not adaptive
    raibert_adaptive: bool = True  # use sqrt(height/g), the capture time
    max_leg_reach: float = 1.15
    init_yaw_noise: float = 0.087  # +/- rad applied to pelvis yaw at reset


@dataclass
class RewardParams:
    airtime_target: float = 0.35
    # weights follow the published reward table
    w_feet_airtime: float = 1.0
    w_feet_contact: float = 0.1
    w_feet_stance_x: float = 0.02
    w_feet_stance_y: float = 0.02
    w_feet_orientation: float = 0.15
    w_relative_yaw: float = 0.5
    w_joint_force: float = 0.1
    w_base_height: float = 0.2
    w_base_acceleration: float = 0.1
    w_action_difference: float = 0.1
    w_torque: float = 0.05
    w_velocity_x: float = 0.15
    w_velocity_y: float = 0.1
    w_orientation_linear: float = 2.0
    w_orientation_exp: float = 0.15


@dataclass
class TerminationParams:
    tilt_limit: float = math.radians(30.0)
    relative_yaw_limit: float = math.radians(30.0)
    pelvis_height_range: tuple[float, float] = (0.5, 1.0)
    timeout_steps: int = 500


@dataclass
class PerturbationParams:
    force_bound: float = 50.0  # N, training stages with perturbations
    torsion_bound: float = 25.0  # N*m yaw torque on the carrier
    duration_steps: tuple[int, int] = (50, 200)
    max_events_per_episode: int = 2
    horizontal_only: bool = True


@dataclass
class CurriculumParams:
    # env-step budgets per stage, overridable for desk-scale runs
    stage_steps: tuple[int, int, int, int] = (2_000_000, 2_000_000, 4_000_000, 8_000_000)
    early_advance: bool = True
    early_advance_ep_len: float = 475.0
    early_advance_min_fraction: float = 0.25
    bar_mass_ranges: dict[int, tuple[float, float]] = field(
        default_factory=lambda: {1: (0.0, 10.0), 2: (0.0, 20.0), 3: (0.0, 15.0)}
    )
    attachment_radius_max: float = 3.5
    two_robot_bar_length: tuple[float, float] = (0.8, 3.5)
    two_robot_cp_max_dist: float = 1.0
    triangle_vertex_radius: tuple[float, float] = (0.7, 2.2)
    triangle_min_side: float = 0.6
    triangle_min_area: float = 0.3


@dataclass
class TrainerParams:
    learning_rate: float = 3e-4
    clip_range: float = 0.2
    n_epochs: int = 5
    minibatch_episodes: int = 32
    gamma: float = 0.95
    gae_lambda: float = 1.0
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    max_grad_norm: float = 0.05
    buffer_size: int = 60_000
    n_workers: int = 1
    normalize_observations: bool = True
    normalize_advantages: bool = True
    log_std_init: float = -0.5
    checkpoint_every_updates: int = 20


@dataclass
class EvalParams:
    episodes: int = 100
    horizon_steps: int = 1000  # 20 s at 50 Hz
    command_height: float = 0.7
    payload_mass: float = 20.0
    payload_mass_sweep: tuple[float, ...] = (20.0, 40.0, 60.0, 80.0)
    perturbation_grid: tuple[float, ...] = (0.0, 25.0, 50.0, 75.0, 100.0)
    perturbation_period_steps: int = 250
    rect_carrier_size: tuple[float, float] = (3.0, 1.5)
    rect_carrier_mass: float = 10.0
    n_workers: int = 1
    deterministic_policy: bool = True
    randomize_dynamics: bool = True


@dataclass
class TeleopParams:
    host: str = "127.0.0.1"
    port: int = 8765
    scenario: str = "rect-3"
    payload_mass: float = 20.0
    frame_rate_hz: float = 50.0


@dataclass
class RunConfig:
    seed: int = 0
    sim: SimParams = field(default_factory=SimParams)
    commands: CommandRanges = field(default_factory=CommandRanges)
    randomization: RandomizationRanges = field(default_factory=RandomizationRanges)
    rewards: RewardParams = field(default_factory=RewardParams)
    termination: TerminationParams = field(default_factory=TerminationParams)
    perturbation: PerturbationParams = field(default_factory=PerturbationParams)
    curriculum: CurriculumParams = field(default_factory=CurriculumParams)
    trainer: TrainerParams = field(default_factory=TrainerParams)
    eval: EvalParams = field(default_factory=EvalParams)
    teleop: TeleopParams = field(default_factory=TeleopParams)


def _merge_into_dataclass(obj: Any, data: dict[str, Any], path: str = "") -> Any:
    for key, value in data.items():
        if not hasattr(obj, key):
            raise KeyError(f"unknown config key '{path}{key}'")
        current = getattr(obj, key)
        if dataclasses.is_dataclass(current) and isinstance(value, dict):
            _merge_into_dataclass(current, value, path=f"{path}{key}.")
        elif isinstance(current, tuple) and isinstance(value, (list, tuple)):
            setattr(obj, key, tuple(value))
        elif isinstance(current, dict) and isinstance(value, dict):
            merged = dict(current)
            merged.update({int(k) if isinstance(k, str) and k.isdigit() else k: tuple(v) if isinstance(v, list) else v for k, v in value.items()})
            setattr(obj, key, merged)
        else:
            setattr(obj, key, value)
    return obj


def load_config(path: str | Path | None = None, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Build a RunConfig from defaults, an optional YAML file, and overrides."""
    cfg = RunConfig()
    if path is not None:
        raw = yaml.safe_load(Path(path).read_text()) or {}
        if not isinstance(raw, dict):
            raise ValueError(f"config file {path} must contain a mapping")
        _merge_into_dataclass(cfg, raw)
    if overrides:
        _merge_into_dataclass(cfg, overrides)
    return cfg


def config_to_dict(cfg: Any) -> Any:
    if dataclasses.is_dataclass(cfg):
        return {f.name: config_to_dict(getattr(cfg, f.name)) for f in dataclasses.fields(cfg)}
    if isinstance(cfg, tuple):
        return list(cfg)
    if isinstance(cfg, dict):
        return {k: config_to_dict(v) for k, v in cfg.items()}
    return cfg


def save_config(cfg: RunConfig, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(config_to_dict(cfg), sort_keys=False))
