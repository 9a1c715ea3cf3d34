"""Episode termination checks, evaluated in a fixed priority order."""
from __future__ import annotations

from enum import Enum

import numpy as np

from ..config import TerminationParams
from ..so3 import quat_roll_pitch
from ..sim.world import SimState
from .observations import relative_yaw


class TerminationReason(Enum):
    NONE = "none"
    CARRIER_TILT = "carrier_tilt"
    PELVIS_TILT = "pelvis_tilt"
    KNEE_GROUND = "knee_ground"  # carrier touching the ground in this model
    RELATIVE_YAW = "relative_yaw"
    PELVIS_HEIGHT = "pelvis_height"
    TIMEOUT = "timeout"

    @property
    def is_failure(self) -> bool:
        return self not in (TerminationReason.NONE, TerminationReason.TIMEOUT)


def check_termination(
    sim: SimState,
    step: int,
    params: TerminationParams | None = None,
    timeout_steps: int | None = None,
) -> TerminationReason:
    """First violated bound wins; exactly one reason is ever reported."""
    p = params or TerminationParams()
    limit = p.tilt_limit

    roll, pitch = quat_roll_pitch(sim.carrier.orientation)
    if abs(roll) > limit or abs(pitch) > limit:
        return TerminationReason.CARRIER_TILT

    for r in range(sim.n_robots):
        roll, pitch = quat_roll_pitch(sim.robot(r).orientation)
        if abs(roll) > limit or abs(pitch) > limit:
            return TerminationReason.PELVIS_TILT

    if sim.carrier_clearance() <= 0.0:
        return TerminationReason.KNEE_GROUND

    for r in range(sim.n_robots):
        if abs(relative_yaw(sim, r)) > p.relative_yaw_limit:
            return TerminationReason.RELATIVE_YAW

    lo, hi = p.pelvis_height_range
    for r in range(sim.n_robots):
        h = sim.robot_height_above_ground(r)
        if h < lo or h > hi:
            return TerminationReason.PELVIS_HEIGHT

    if step >= (timeout_steps if timeout_steps is not None else p.timeout_steps):
        return TerminationReason.TIMEOUT

    return TerminationReason.NONE
