"""Reduced-order legs: a phase oscillator, force-commanded stance feet, and
swing-foot placement around a velocity-lead (Raibert) target.

Feet are massless. Stance feet are anchored to the ground and push with the
gravity-share nominal plus the policy's force offsets, clipped to the
friction cone. Swing feet are kinematic and track a placement target offset
by the policy. The oscillator alone decides stance/swing; the hold-still
command plants both feet and freezes the clock.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..so3 import quat_yaw, rot2d


@dataclass
class GroundPlane:
    """Sloped plane z = tan(slope) * x with Coulomb friction."""

    slope: float = 0.0
    friction: float = 1.0

    def height(self, x: float, y: float) -> float:
        return np.tan(self.slope) * x

    def normal(self) -> np.ndarray:
        n = np.array([-np.tan(self.slope), 0.0, 1.0])
        return n / np.linalg.norm(n)


@dataclass
class LegState:
    """Both legs of one robot; arrays are indexed [left, right]."""

    foot_pos: np.ndarray  # (2, 3) world
    in_stance: np.ndarray  # (2,) bool
    phase: float  # master clock in [0, 1); left leg phase, right offset 0.5
    airtime: np.ndarray = field(default_factory=lambda: np.zeros(2))
    airtime_at_touchdown: np.ndarray = field(default_factory=lambda: np.zeros(2))
    touchdown: np.ndarray = field(default_factory=lambda: np.zeros(2, dtype=bool))
    commanded_grf: np.ndarray = field(default_factory=lambda: np.zeros((2, 3)))
    liftoff_pos: np.ndarray = field(default_factory=lambda: np.zeros((2, 3)))

    def copy(self) -> "LegState":
        return LegState(
            foot_pos=self.foot_pos.copy(),
            in_stance=self.in_stance.copy(),
            phase=self.phase,
            airtime=self.airtime.copy(),
            airtime_at_touchdown=self.airtime_at_touchdown.copy(),
            touchdown=self.touchdown.copy(),
            commanded_grf=self.commanded_grf.copy(),
            liftoff_pos=self.liftoff_pos.copy(),
        )

    @property
    def contact_count(self) -> int:
        return int(np.sum(self.in_stance))


def nominal_foot_offsets(yaw: float, stance_width: float) -> np.ndarray:
    """World-frame xy offsets of the two feet from the pelvis at heading yaw."""
    r = rot2d(yaw)
    left = r @ np.array([0.0, stance_width / 2.0])
    right = r @ np.array([0.0, -stance_width / 2.0])
    return np.stack([left, right])


def attitude_assist_torque(pelvis, params) -> np.ndarray:
    """Strut stiffness of planted legs: tilt-vector PD toward upright.

    The restoring axis is body-z cross world-z, which stays aligned with the
    actual tilt at any heading (Euler roll/pitch axes do not: past ~0.5 rad
    of yaw they feed a tangential component that whirls the pelvis over).
    Applied only while at least one foot is in stance; yaw is untouched.
    """
    z_body = pelvis.rotation[:, 2]
    tilt_axis = np.array([z_body[1], -z_body[0], 0.0])  # z_body x world_z
    torque = params.attitude_kp * tilt_axis
    torque[0] -= params.attitude_kd * pelvis.angular_velocity[0]
    torque[1] -= params.attitude_kd * pelvis.angular_velocity[1]
    cap = params.attitude_torque_max
    norm = float(np.linalg.norm(torque))
    if norm > cap:
        torque *= cap / norm
    return torque


def init_leg_state(pelvis_position: np.ndarray, yaw: float, ground: GroundPlane, params) -> LegState:
    offsets = nominal_foot_offsets(yaw, params.stance_width)
    feet = np.zeros((2, 3))
    for f in range(2):
        xy = pelvis_position[:2] + offsets[f]
        feet[f] = [xy[0], xy[1], ground.height(xy[0], xy[1])]
    return LegState(
        foot_pos=feet,
        in_stance=np.array([True, True]),
        phase=0.0,
        liftoff_pos=feet.copy(),
    )


def clip_to_friction_cone(
    force: np.ndarray, normal: np.ndarray, mu: float, f_max: float
) -> np.ndarray:
    """Clamp normal component to [0, f_max], then tangential norm to mu * f_n."""
    f_n = float(np.dot(force, normal))
    f_n = min(max(f_n, 0.0), f_max)
    tangential = force - np.dot(force, normal) * normal
    t_norm = float(np.linalg.norm(tangential))
    t_max = mu * f_n
    if t_norm > t_max:
        tangential = tangential * (t_max / t_norm) if t_norm > 0 else tangential * 0.0
    return f_n * normal + tangential


def decode_leg_action(action5: np.ndarray, yaw: float, params) -> tuple[np.ndarray, np.ndarray]:
    """Split one leg's action into a world-frame force offset and xy placement offset.

    Layout is [dFx, dFy, dFz, dpx, dpy] in the pelvis heading frame, already
    clipped to [-1, 1] by the caller.
    """
    r = rot2d(yaw)
    f_xy = r @ (action5[:2] * params.force_scale_xy)
    d_force = np.array([f_xy[0], f_xy[1], action5[2] * params.force_scale_z])
    d_place = r @ (action5[3:5] * params.placement_scale)
    return d_force, d_place


def step_legs(
    pelvis,
    legs: LegState,
    action: np.ndarray,
    hold_still: bool,
    support_force: float,
    ground: GroundPlane,
    params,
    dt: float,
) -> tuple[np.ndarray, LegState]:
    """Advance the gait clock by dt and compute this robot's foot forces.

    support_force is the robot's gravity-share nominal in newtons (its own
    pelvis weight plus its static share of the carrier weight). Returns the
    summed wrench (force, torque) about the pelvis CoM; legs is updated in
    place. Commands are clipped, never rejected.
    """
    action = np.clip(np.asarray(action, dtype=float), -1.0, 1.0)
    yaw = quat_yaw(pelvis.orientation)
    legs.touchdown[:] = False

    if hold_still:
        leg_phases = np.array([legs.phase, (legs.phase + 0.5) % 1.0])
        new_stance = np.array([True, True])
    else:
        legs.phase = (legs.phase + params.gait_frequency * dt) % 1.0
        leg_phases = np.array([legs.phase, (legs.phase + 0.5) % 1.0])
        new_stance = leg_phases < params.gait_duty

    place_width = params.stance_width if hold_still else params.walk_width
    offsets = nominal_foot_offsets(yaw, place_width)
    v_xy = pelvis.linear_velocity[:2]

    wrench = np.zeros(6)
    if np.any(new_stance):
        wrench[3:] += attitude_assist_torque(pelvis, params)
        # leg dissipation of lateral pelvis motion, acting through the hips
        # (about the CoM, so it never excites attitude)
        wrench[:2] -= params.leg_lateral_damping * pelvis.linear_velocity[:2]
        # contact-patch yaw friction per planted foot
        wrench[5] -= params.foot_yaw_friction * int(np.sum(new_stance)) * pelvis.angular_velocity[2]
    for f in range(2):
        a5 = action[5 * f : 5 * f + 5]
        d_force, d_place = decode_leg_action(a5, yaw, params)

        if new_stance[f] and not legs.in_stance[f]:
            # touchdown: plant the foot where the swing carried it
            xy = legs.foot_pos[f, :2]
            legs.foot_pos[f] = [xy[0], xy[1], ground.height(xy[0], xy[1])]
            legs.airtime_at_touchdown[f] = legs.airtime[f]
            legs.airtime[f] = 0.0
            legs.touchdown[f] = True
        elif not new_stance[f] and legs.in_stance[f]:
            legs.liftoff_pos[f] = legs.foot_pos[f].copy()
        legs.in_stance[f] = new_stance[f]

        if legs.in_stance[f]:
            reach = np.linalg.norm(legs.foot_pos[f] - pelvis.position)
            if reach > params.max_leg_reach:
                # overextended leg loses the ground; treat as swing from here
                legs.in_stance[f] = False
                legs.liftoff_pos[f] = legs.foot_pos[f].copy()
                legs.commanded_grf[f] = 0.0
                legs.airtime[f] += dt
                continue
            n_stance = max(1, int(np.sum(new_stance)))
            # the leg is a strut: the nominal pushes from the foot through the
            # pelvis CoM (torque-free), with the vertical component carrying
            # this foot's share of the supported weight plus servo damping of
            # vertical pelvis motion
            strut = pelvis.position - legs.foot_pos[f]
            dz = max(strut[2], 0.2)
            share = (
                max(0.0, support_force)
                - params.leg_vertical_damping * pelvis.linear_velocity[2]
            ) / n_stance
            share = max(0.0, share)
            nominal = share * np.array([strut[0] / dz, strut[1] / dz, 1.0])
            grf = clip_to_friction_cone(
                nominal + d_force,
                ground.normal(),
                params.friction_coefficient * ground.friction,
                params.max_normal_force,
            )
            legs.commanded_grf[f] = grf
            arm = legs.foot_pos[f] - pelvis.position
            wrench[:3] += grf
            wrench[3:] += np.cross(arm, grf)
        else:
            legs.commanded_grf[f] = 0.0
            legs.airtime[f] += dt
            # velocity lead at the inverted-pendulum capture time for the
            # robot's current height (falls back to the configured constant)
            if params.raibert_adaptive:
                height = max(pelvis.position[2] - ground.height(*pelvis.position[:2]), 0.3)
                lead = np.sqrt(height / 9.81)
            else:
                lead = params.raibert_gain
            target_xy = pelvis.position[:2] + offsets[f] + v_xy * lead + d_place
            if hold_still:
                s = 1.0
            else:
                swing_phase = (leg_phases[f] - params.gait_duty) / (1.0 - params.gait_duty)
                s = float(np.clip(swing_phase, 0.0, 1.0))
            blend = 0.5 - 0.5 * np.cos(np.pi * s)  # smooth liftoff -> target
            xy = (1.0 - blend) * legs.liftoff_pos[f, :2] + blend * target_xy
            z_ground = (1.0 - blend) * ground.height(*legs.liftoff_pos[f, :2]) + blend * ground.height(
                *target_xy
            )
            z = z_ground + params.swing_apex * np.sin(np.pi * s)
            legs.foot_pos[f] = [xy[0], xy[1], z]

    return wrench, legs
