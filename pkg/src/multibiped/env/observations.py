"""Per-robot local observations.

Each robot sees only its own proprioception, its attachment polar
coordinates, its yaw relative to the carrier, and the broadcast command.
No other robot's state and no global carrier pose ever enter the vector.
"""
from __future__ import annotations

import numpy as np

from ..so3 import quat_roll_pitch, quat_rotate_inverse, quat_yaw, wrap_angle
from ..sim.world import SimState
from .commands import Command

OBS_DIM = 26

# vector layout (start index, width)
_ROLL_PITCH = (0, 2)
_ANGVEL = (2, 3)
_LINVEL = (5, 3)
_HEIGHT = (8, 1)
_FEET = (9, 6)
_CONTACTS = (15, 2)
_CLOCK = (17, 2)
_ATTACHMENT = (19, 2)
_REL_YAW = (21, 1)
_COMMAND = (22, 4)

NOISED_INDICES = np.array([0, 1, 9, 10, 11, 12, 13, 14])  # orientation + foot entries


def observe(
    sim: SimState,
    robot_idx: int,
    command: Command,
    noise_rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Assemble the 26-dim observation for one robot.

    Encoder noise (when a generator is supplied) lands only on the
    orientation and foot entries, with the episode's randomized std.
    """
    pelvis = sim.robot(robot_idx)
    legs = sim.legs[robot_idx]
    obs = np.zeros(OBS_DIM)

    roll, pitch = quat_roll_pitch(pelvis.orientation)
    obs[0], obs[1] = roll, pitch
    obs[2:5] = quat_rotate_inverse(pelvis.orientation, pelvis.angular_velocity)
    obs[5:8] = quat_rotate_inverse(pelvis.orientation, pelvis.linear_velocity)
    obs[8] = sim.robot_height_above_ground(robot_idx)
    rot_t = pelvis.rotation.T
    for f in range(2):
        obs[9 + 3 * f : 12 + 3 * f] = rot_t @ (legs.foot_pos[f] - pelvis.position)
    obs[15:17] = legs.in_stance.astype(float)
    obs[17] = np.sin(2.0 * np.pi * legs.phase)
    obs[18] = np.cos(2.0 * np.pi * legs.phase)
    r_i, theta_i = sim.config.attachments[robot_idx]
    obs[19], obs[20] = r_i, (theta_i if r_i > 1e-12 else 0.0)
    obs[21] = relative_yaw(sim, robot_idx)
    obs[22:26] = command.as_array()

    if noise_rng is not None:
        std = abs(sim.dynamics.encoder_noise_std)
        if std > 0.0:
            obs[NOISED_INDICES] += noise_rng.normal(0.0, std, size=NOISED_INDICES.size)
    return obs


def relative_yaw(sim: SimState, robot_idx: int) -> float:
    """Robot base yaw relative to the carrier control-point axis, in (-pi, pi]."""
    return wrap_angle(quat_yaw(sim.robot(robot_idx).orientation) - sim.carrier_yaw())
