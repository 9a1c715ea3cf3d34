"""Independent flat re-implementation of the reward table, shared by the
unit and acceptance suites as the dual-implementation oracle."""
import math

import numpy as np

from multibiped.config import RewardParams
from multibiped.env.rewards import quaternion_distance, reference_orientation
from multibiped.so3 import quat_yaw


def oracle_breakdown(sim, robot, command, ref_yaw):
    """Independent flat recomputation of every reward table row."""
    p = RewardParams()
    hold = command.vx == 0.0 and command.vy == 0.0 and command.omega == 0.0
    legs = sim.legs[robot]
    pelvis = sim.robot(robot)
    out = {}

    if hold:
        out["feet_airtime"] = 0.0
    else:
        acc = 0.0
        for f in range(2):
            if sim.touchdown_this_step[robot, f]:
                acc += abs(sim.airtime_at_touchdown[robot, f] - 0.35)
        out["feet_airtime"] = acc * 1.0

    n_c = int(legs.in_stance[0]) + int(legs.in_stance[1])
    if hold:
        out["feet_contact"] = ((1.0 if n_c == 2 else 0.0) + 0.5 * (1.0 if n_c == 1 else 0.0)) * 0.1
    else:
        out["feet_contact"] = (1.0 if n_c == 1 else 0.0) * 0.1

    rt = pelvis.rotation.T
    fl = rt @ (legs.foot_pos[0] - pelvis.position)
    fr = rt @ (legs.foot_pos[1] - pelvis.position)
    out["feet_stance_x"] = (math.exp(-10.0 * abs(fl[0] - fr[0])) if hold else math.exp(0.0)) * 0.02
    out["feet_stance_y"] = (math.exp(-5.0 * abs(fl[1] - fr[1] - 0.385)) if hold else math.exp(0.0)) * 0.02

    out["feet_orientation"] = math.exp(-30.0 * 0.0) * 0.15  # feet share the base orientation

    theta = quat_yaw(pelvis.orientation) - quat_yaw(sim.carrier.orientation)
    theta = (theta + math.pi) % (2 * math.pi) - math.pi
    if theta == -math.pi:
        theta = math.pi
    out["relative_yaw"] = -abs(theta) / math.pi * 0.5

    if hold and sim.n_robots > 1:
        lam = sim.carrier.rotation.T @ sim.joint_forces[robot]
        out["joint_force"] = math.exp(-0.2 * math.hypot(lam[0], lam[1])) * 0.1
    else:
        out["joint_force"] = math.exp(0.0) * 0.1

    height = pelvis.position[2] - sim.ground.height(pelvis.position[0], pelvis.position[1])
    out["base_height"] = -abs(height - command.height) * 0.2

    out["base_acceleration"] = math.exp(-0.01 * float(np.sum(np.abs(sim.base_accel[robot])))) * 0.1
    out["action_difference"] = (
        math.exp(-8.0 * float(np.sum(np.abs(sim.last_actions[robot] - sim.prev_actions[robot])))) * 0.1
    )
    out["torque"] = math.exp(-float(np.sum(np.abs(sim.last_actions[robot])))) * 0.05

    yaw = quat_yaw(sim.carrier.orientation)
    v_world = sim.control_point_velocity()[:2]
    c, s = math.cos(yaw), math.sin(yaw)
    vx_local = c * v_world[0] + s * v_world[1]
    vy_local = -s * v_world[0] + c * v_world[1]
    out["velocity_x"] = math.exp(-2.0 * abs(vx_local - command.vx)) * 0.15
    out["velocity_y"] = math.exp(-2.0 * abs(vy_local - command.vy)) * 0.1
    q_ref = reference_orientation(sim.ground.normal(), ref_yaw)
    q_d = quaternion_distance(sim.carrier.orientation, q_ref)
    out["orientation"] = -q_d * 2.0 + math.exp(-30.0 * q_d) * 0.15
    return out


