"""Carrier commands: the 4-vector broadcast identically to every robot."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import CommandRanges


@dataclass
class Command:
    vx: float = 0.0
    vy: float = 0.0
    omega: float = 0.0
    height: float = 0.7
    duration: int = 100  # policy steps this command stays active

    @property
    def hold_still(self) -> bool:
        return self.vx == 0.0 and self.vy == 0.0 and self.omega == 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.vx, self.vy, self.omega, self.height])

    def clamped(self, ranges: CommandRanges) -> "Command":
        return Command(
            vx=float(np.clip(self.vx, *ranges.vx)),
            vy=float(np.clip(self.vy, *ranges.vy)),
            omega=float(np.clip(self.omega, *ranges.omega)),
            height=float(np.clip(self.height, *ranges.height)),
            duration=self.duration,
        )


def sample_command(rng: np.random.Generator, ranges: CommandRanges | None = None) -> Command:
    """Uniform command draw; a fixed fraction comes out as exact hold-still."""
    r = ranges or CommandRanges()
    duration = int(rng.integers(r.duration_steps[0], r.duration_steps[1] + 1))
    height = float(rng.uniform(*r.height))
    if rng.random() < r.hold_probability:
        return Command(0.0, 0.0, 0.0, height, duration)
    return Command(
        vx=float(rng.uniform(*r.vx)),
        vy=float(rng.uniform(*r.vy)),
        omega=float(rng.uniform(*r.omega)),
        height=height,
        duration=duration,
    )
