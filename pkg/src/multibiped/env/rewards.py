"""Per-step reward: eleven local locomotion terms plus three carrier-tracking
terms shared by every robot. Each field of the breakdown is already weighted;
the total is exactly local + global.
"""
from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from ..config import RewardParams
from ..so3 import quat_align_z, quat_angle_between, quat_from_yaw, quat_mul, rot2d
from ..sim.world import SimState
from .commands import Command
from .observations import relative_yaw

LOCAL_TERMS = (
    "feet_airtime",
    "feet_contact",
    "feet_stance_x",
    "feet_stance_y",
    "feet_orientation",
    "relative_yaw",
    "joint_force",
    "base_height",
    "base_acceleration",
    "action_difference",
    "torque",
)
GLOBAL_TERMS = ("velocity_x", "velocity_y", "orientation")


@dataclass
class RewardBreakdown:
    feet_airtime: float = 0.0
    feet_contact: float = 0.0
    feet_stance_x: float = 0.0
    feet_stance_y: float = 0.0
    feet_orientation: float = 0.0
    relative_yaw: float = 0.0
    joint_force: float = 0.0
    base_height: float = 0.0
    base_acceleration: float = 0.0
    action_difference: float = 0.0
    torque: float = 0.0
    velocity_x: float = 0.0
    velocity_y: float = 0.0
    orientation: float = 0.0

    @property
    def local_total(self) -> float:
        return sum(getattr(self, name) for name in LOCAL_TERMS)

    @property
    def global_total(self) -> float:
        return sum(getattr(self, name) for name in GLOBAL_TERMS)

    @property
    def total(self) -> float:
        return self.local_total + self.global_total

    def as_dict(self) -> dict[str, float]:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["local_total"] = self.local_total
        d["global_total"] = self.global_total
        d["total"] = self.total
        return d


def reference_orientation(ground_normal: np.ndarray, reference_yaw: float) -> np.ndarray:
    """Slope-aligned roll/pitch with the command-integrated yaw."""
    return quat_mul(quat_align_z(ground_normal), quat_from_yaw(reference_yaw))


def quaternion_distance(qa: np.ndarray, qb: np.ndarray) -> float:
    """Geodesic angle between orientations scaled to [0, 1]."""
    return quat_angle_between(qa, qb) / np.pi


def global_reward(
    sim: SimState,
    command: Command,
    reference_yaw: float,
    p: RewardParams,
) -> tuple[float, float, float]:
    """Carrier-tracking terms, identical for every robot."""
    yaw = sim.carrier_yaw()
    v_world = sim.control_point_velocity()[:2]
    v_local = rot2d(yaw).T @ v_world
    vel_x = np.exp(-2.0 * abs(v_local[0] - command.vx)) * p.w_velocity_x
    vel_y = np.exp(-2.0 * abs(v_local[1] - command.vy)) * p.w_velocity_y
    q_ref = reference_orientation(sim.ground.normal(), reference_yaw)
    q_d = quaternion_distance(sim.carrier.orientation, q_ref)
    orientation = -q_d * p.w_orientation_linear + np.exp(-30.0 * q_d) * p.w_orientation_exp
    return float(vel_x), float(vel_y), float(orientation)


def local_reward(
    sim: SimState,
    robot_idx: int,
    command: Command,
    p: RewardParams,
) -> dict[str, float]:
    legs = sim.legs[robot_idx]
    pelvis = sim.robot(robot_idx)
    hold = command.hold_still
    n = sim.n_robots

    terms: dict[str, float] = {}

    if hold:
        airtime = 0.0
    else:
        airtime = sum(
            abs(sim.airtime_at_touchdown[robot_idx, f] - p.airtime_target)
            for f in range(2)
            if sim.touchdown_this_step[robot_idx, f]
        )
    terms["feet_airtime"] = airtime * p.w_feet_airtime

    n_c = legs.contact_count
    if hold:
        contact = float(n_c == 2) + 0.5 * float(n_c == 1)
    else:
        contact = float(n_c == 1)
    terms["feet_contact"] = contact * p.w_feet_contact

    rot_t = pelvis.rotation.T
    feet_base = np.stack([rot_t @ (legs.foot_pos[f] - pelvis.position) for f in range(2)])
    if hold:
        stance_x = np.exp(-10.0 * abs(feet_base[0, 0] - feet_base[1, 0]))
        stance_y = np.exp(-5.0 * abs(feet_base[0, 1] - feet_base[1, 1] - 0.385))
    else:
        stance_x = 1.0
        stance_y = 1.0
    terms["feet_stance_x"] = float(stance_x) * p.w_feet_stance_x
    terms["feet_stance_y"] = float(stance_y) * p.w_feet_stance_y

    # feet inherit the pelvis orientation in this reduced model, so the
    # orientation distance is identically zero; kept for schema completeness
    feet_orientation_distance = 0.0
    terms["feet_orientation"] = float(np.exp(-30.0 * feet_orientation_distance)) * p.w_feet_orientation

    theta = relative_yaw(sim, robot_idx)
    terms["relative_yaw"] = -abs(theta) / np.pi * p.w_relative_yaw

    if hold and n > 1:
        lam_carrier = sim.carrier.rotation.T @ sim.joint_forces[robot_idx]
        joint = np.exp(-0.2 * float(np.linalg.norm(lam_carrier[:2])))
    else:
        joint = 1.0
    terms["joint_force"] = float(joint) * p.w_joint_force

    height = sim.robot_height_above_ground(robot_idx)
    terms["base_height"] = -abs(height - command.height) * p.w_base_height

    accel = sim.base_accel[robot_idx]
    terms["base_acceleration"] = float(np.exp(-0.01 * np.sum(np.abs(accel)))) * p.w_base_acceleration

    action_diff = np.sum(np.abs(sim.last_actions[robot_idx] - sim.prev_actions[robot_idx]))
    terms["action_difference"] = float(np.exp(-8.0 * action_diff)) * p.w_action_difference

    # actuator-effort proxy: commanded offsets normalized by their scales,
    # which is the clipped action magnitude
    effort = np.sum(np.abs(sim.last_actions[robot_idx]))
    terms["torque"] = float(np.exp(-effort)) * p.w_torque

    return terms


def compute_rewards(
    sim: SimState,
    command: Command,
    reference_yaw: float,
    params: RewardParams | None = None,
) -> list[RewardBreakdown]:
    """Reward breakdowns for every robot after a sim step.

    The step's actions, previous actions, joint forces, touchdowns, and
    finite-differenced base accelerations are read from the post-step state.
    """
    p = params or RewardParams()
    vel_x, vel_y, orientation = global_reward(sim, command, reference_yaw, p)
    out = []
    for r in range(sim.n_robots):
        terms = local_reward(sim, r, command, p)
        out.append(
            RewardBreakdown(
                **terms,
                velocity_x=vel_x,
                velocity_y=vel_y,
                orientation=orientation,
            )
        )
    return out
