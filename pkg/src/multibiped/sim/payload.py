"""Free-sliding payload: a point mass on the carrier plate inside a walled box.

The slider lives in the carrier frame, feels Coulomb friction against the
plate and restitution bounces off the walls, and pushes its weight and
friction reaction back onto the carrier. Cheapest model that still moves the
carrier's momentum around.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class SliderState:
    mass: float
    pos: np.ndarray  # (2,) carrier-frame xy relative to control point
    vel: np.ndarray  # (2,) carrier-frame
    bounds: tuple[float, float, float, float]
    friction: float
    restitution: float

    def copy(self) -> "SliderState":
        return SliderState(
            mass=self.mass,
            pos=self.pos.copy(),
            vel=self.vel.copy(),
            bounds=self.bounds,
            friction=self.friction,
            restitution=self.restitution,
        )


def step_slider(
    slider: SliderState,
    carrier_rotation: np.ndarray,
    cp_offset: np.ndarray,
    gravity: float,
    dt: float,
) -> np.ndarray:
    """Advance the slider one substep; return the world wrench on the carrier.

    carrier_rotation is the carrier body-to-world matrix; cp_offset is the
    control point in the carrier body frame (relative CoM). The wrench is
    (force, torque about the carrier CoM).
    """
    # carrier-plane tilt seen as in-plane gravity in the carrier frame
    g_world = np.array([0.0, 0.0, -gravity])
    g_body = carrier_rotation.T @ g_world
    accel = g_body[:2].copy()

    # kinetic friction against the plate
    speed = float(np.linalg.norm(slider.vel))
    mu_a = slider.friction * gravity
    if speed > 1e-6:
        accel -= mu_a * slider.vel / speed
    elif float(np.linalg.norm(accel)) <= mu_a:
        accel[:] = 0.0
        slider.vel[:] = 0.0

    vel_before = slider.vel.copy()
    slider.vel = slider.vel + accel * dt
    if speed > 1e-6 and float(np.dot(vel_before, slider.vel)) < 0.0:
        # friction cannot reverse the slide direction within a substep
        slider.vel[:] = 0.0
        accel = (slider.vel - vel_before) / dt
    slider.pos = slider.pos + slider.vel * dt

    impulse = np.zeros(2)
    xmin, xmax, ymin, ymax = slider.bounds
    for axis, lo, hi in ((0, xmin, xmax), (1, ymin, ymax)):
        if slider.pos[axis] < lo:
            slider.pos[axis] = lo
            dv = -(1.0 + slider.restitution) * slider.vel[axis]
            slider.vel[axis] += dv
            impulse[axis] += slider.mass * dv
        elif slider.pos[axis] > hi:
            slider.pos[axis] = hi
            dv = -(1.0 + slider.restitution) * slider.vel[axis]
            slider.vel[axis] += dv
            impulse[axis] += slider.mass * dv

    # reaction on the carrier: weight, friction drag, and wall impulses
    contact_body = np.concatenate([cp_offset[:2] + slider.pos, [cp_offset[2]]])
    contact_world_offset = carrier_rotation @ contact_body
    normal_force = np.array([0.0, 0.0, -slider.mass * gravity])
    friction_body = np.concatenate([-slider.mass * (accel - g_body[:2]), [0.0]])
    wall_body = np.concatenate([-impulse / dt, [0.0]])
    force = normal_force + carrier_rotation @ (friction_body + wall_body)
    torque = np.cross(contact_world_offset, force)
    return np.concatenate([force, torque])
