"""Evaluation scenarios: carrier layouts, payloads, and the four fixed commands.

Rectangular carriers place robots corners-first, then edge midpoints, then
central positions. The sack/log/slider scenarios mirror the unseen-payload
suite; L- and T-shaped carriers cover the specialized-policy comparison.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..config import EvalParams
from ..env.commands import Command
from ..sim.bodies import AttachmentConfig, PayloadSpec


def _polar(p) -> tuple[float, float]:
    r = float(np.hypot(p[0], p[1]))
    return r, (float(np.arctan2(p[1], p[0])) if r > 1e-12 else 0.0)


def fixed_commands(height: float = 0.7, horizon: int = 1000) -> dict[str, Command]:
    """Hold still, forward 1 m/s, sideways 0.25 m/s, turn 15 deg/s."""
    return {
        "hold_still": Command(0.0, 0.0, 0.0, height, horizon),
        "move_forward": Command(1.0, 0.0, 0.0, height, horizon),
        "move_sideways": Command(0.0, 0.25, 0.0, height, horizon),
        "turn_in_place": Command(0.0, 0.0, math.radians(15.0), height, horizon),
    }


@dataclass
class EvalScenario:
    name: str
    config: AttachmentConfig
    payload: PayloadSpec
    description: str = ""
    commands: dict[str, Command] = field(default_factory=dict)


def rect_positions(n: int, size: tuple[float, float]) -> list[tuple[float, float]]:
    """Robot xy positions on a solid rectangular carrier, evenly supported."""
    hx, hy = size[0] / 2.0, size[1] / 2.0
    corners = [(-hx, -hy), (hx, -hy), (hx, hy), (-hx, hy)]
    long_mid = [(0.0, -hy), (0.0, hy)]
    short_mid = [(-hx, 0.0), (hx, 0.0)]
    center = [(0.0, 0.0)]
    inner = [(-hx / 2.0, 0.0), (hx / 2.0, 0.0)]
    if n == 1:
        return center
    if n == 2:
        return short_mid
    if n == 3:
        return [(-hx, -hy), (-hx, hy), (hx, 0.0)]
    if n == 4:
        return corners
    if n == 5:
        return corners + center
    if n == 6:
        return corners + long_mid
    if n == 7:
        return corners + long_mid + center
    if n == 8:
        return corners + long_mid + short_mid
    if n == 9:
        return corners + long_mid + short_mid + center
    if n == 10:
        return corners + long_mid + short_mid + inner
    raise ValueError(f"rect layout defined for 1..10 robots, got {n}")


def _rect_extent(size: tuple[float, float]) -> np.ndarray:
    hx, hy = size[0] / 2.0, size[1] / 2.0
    return np.array([[-hx, -hy], [hx, -hy], [hx, hy], [-hx, hy]])


def _config_from_points(points, extent, bar_mass: float) -> AttachmentConfig:
    return AttachmentConfig(
        n_robots=len(points),
        attachments=[_polar(p) for p in points],
        bar_mass=bar_mass,
        carrier_extent=extent,
    )


def build_scenario(
    name: str,
    params: EvalParams | None = None,
    payload_mass: float | None = None,
) -> EvalScenario:
    """Scenario factory; names: rect-N (N=1..10), one-r-star, sacks, log,
    dynamic, rectangle, l-shape, t-shape."""
    p = params or EvalParams()
    mass = p.payload_mass if payload_mass is None else payload_mass
    commands = fixed_commands(p.command_height, p.horizon_steps)

    if name in ("one-r-star", "1-r*", "rect-1"):
        return EvalScenario(
            name="one-r-star",
            config=AttachmentConfig(1, [(0.0, 0.0)]),
            payload=PayloadSpec(),
            description="single-robot reference: control point at its own base",
            commands=commands,
        )

    if name.startswith("rect-"):
        n = int(name.split("-")[1])
        pts = rect_positions(n, p.rect_carrier_size)
        payload = PayloadSpec(fixed_masses=[(mass, 0.0, 0.0)])
        return EvalScenario(
            name=name,
            config=_config_from_points(pts, _rect_extent(p.rect_carrier_size), p.rect_carrier_mass),
            payload=payload,
            description=f"{n} robots on a {p.rect_carrier_size[0]}x{p.rect_carrier_size[1]} m rectangle, {mass} kg at center",
            commands=commands,
        )

    if name == "rectangle":
        return build_scenario("rect-4", p, payload_mass)

    if name == "sacks":
        # four robots on a circular carrier, five sacks (35 kg total) fixed at
        # deterministic scattered spots
        radius = 1.2
        pts = [(radius, 0.0), (0.0, radius), (-radius, 0.0), (0.0, -radius)]
        extent = np.array(
            [
                [1.35 * np.cos(a), 1.35 * np.sin(a)]
                for a in np.linspace(-np.pi, np.pi, 16, endpoint=False)
            ]
        )
        sack_spots = [(-0.5, -0.35), (0.45, -0.4), (0.0, 0.1), (-0.35, 0.5), (0.5, 0.45)]
        sack_masses = [9.0, 8.0, 7.0, 6.0, 5.0]
        payload = PayloadSpec(fixed_masses=[(m, x, y) for m, (x, y) in zip(sack_masses, sack_spots)])
        return EvalScenario(
            name="sacks",
            config=_config_from_points(pts, extent, 8.0),
            payload=payload,
            description="four robots, circular carrier, five sacks totalling 35 kg",
            commands=commands,
        )

    if name == "log":
        # three collinear robots on a long plank carrying a fixed 20 kg cylinder
        pts = [(-1.6, 0.0), (0.0, 0.0), (1.6, 0.0)]
        extent = np.array([[-2.0, -0.3], [2.0, -0.3], [2.0, 0.3], [-2.0, 0.3]])
        payload = PayloadSpec(fixed_masses=[(20.0, 0.0, 0.0)])
        return EvalScenario(
            name="log",
            config=_config_from_points(pts, extent, 6.0),
            payload=payload,
            description="three collinear robots on a plank with a 20 kg log",
            commands=commands,
        )

    if name == "dynamic":
        # four robots, container with a 20 kg rolling mass inside walls
        # (container structure itself weighs 10 kg -> 30 kg total)
        pts = [(-1.0, -0.5), (1.0, -0.5), (1.0, 0.5), (-1.0, 0.5)]
        extent = np.array([[-1.2, -0.7], [1.2, -0.7], [1.2, 0.7], [-1.2, 0.7]])
        payload = PayloadSpec(
            fixed_masses=[(10.0, 0.0, 0.0)],
            slider_mass=20.0,
            slider_bounds=(-0.8, 0.8, -0.4, 0.4),
            slider_friction=0.2,
            slider_restitution=0.3,
        )
        return EvalScenario(
            name="dynamic",
            config=_config_from_points(pts, extent, 0.0),
            payload=payload,
            description="four robots, container with a free-rolling 20 kg mass (30 kg total)",
            commands=commands,
        )

    if name == "l-shape":
        # two 2.4 m arms, robots at the three extremities and the elbow
        pts = [(2.0, 0.0), (0.0, 0.0), (0.0, 2.0), (1.0, 0.0)]
        extent = np.array(
            [[-0.4, -0.4], [2.4, -0.4], [2.4, 0.4], [0.4, 0.4], [0.4, 2.4], [-0.4, 2.4]]
        )
        payload = PayloadSpec(fixed_masses=[(mass, 0.3, 0.3)])
        return EvalScenario(
            name="l-shape",
            config=_config_from_points(pts, extent, 8.0),
            payload=payload,
            description="L-shaped carrier, four robots, payload at the elbow",
            commands=commands,
        )

    if name == "t-shape":
        pts = [(-1.5, 1.2), (1.5, 1.2), (0.0, 1.2), (0.0, -1.5)]
        # union of bar and stem expressed as one polygon
        extent = np.array(
            [
                [-1.8, 0.8], [-0.3, 0.8], [-0.3, -1.8], [0.3, -1.8], [0.3, 0.8],
                [1.8, 0.8], [1.8, 1.6], [-1.8, 1.6],
            ]
        )
        payload = PayloadSpec(fixed_masses=[(mass, 0.0, 0.6)])
        return EvalScenario(
            name="t-shape",
            config=_config_from_points(pts, extent, 8.0),
            payload=payload,
            description="T-shaped carrier, four robots",
            commands=commands,
        )

    raise ValueError(f"unknown scenario '{name}'")


SCENARIO_NAMES = (
    ["one-r-star"]
    + [f"rect-{n}" for n in range(2, 11)]
    + ["sacks", "log", "dynamic", "rectangle", "l-shape", "t-shape"]
)
