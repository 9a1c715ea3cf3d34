"""Per-episode dynamics randomization draws."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import RandomizationRanges


@dataclass
class RandomizedDynamics:
    damping_multiplier: float = 1.0
    mass_multiplier: float = 1.0
    com_offset_fraction: float = 0.0
    friction_multiplier: float = 1.0
    encoder_noise_std: float = 0.0
    ground_slope: float = 0.0

    def validate(self, ranges: RandomizationRanges) -> None:
        pairs = (
            (self.damping_multiplier, ranges.damping_multiplier),
            (self.mass_multiplier, ranges.mass_multiplier),
            (self.com_offset_fraction, ranges.com_offset_fraction),
            (self.friction_multiplier, ranges.friction_multiplier),
            (self.encoder_noise_std, ranges.encoder_noise_std),
            (self.ground_slope, ranges.ground_slope),
        )
        for value, (lo, hi) in pairs:
            if not (lo <= value <= hi):
                raise ValueError(f"randomized value {value} outside [{lo}, {hi}]")


def randomize_dynamics(rng: np.random.Generator, ranges: RandomizationRanges | None = None) -> RandomizedDynamics:
    """Draw each field uniformly from its configured range."""
    r = ranges or RandomizationRanges()
    draw = lambda pair: float(rng.uniform(pair[0], pair[1]))
    return RandomizedDynamics(
        damping_multiplier=draw(r.damping_multiplier),
        mass_multiplier=draw(r.mass_multiplier),
        com_offset_fraction=draw(r.com_offset_fraction),
        friction_multiplier=draw(r.friction_multiplier),
        encoder_noise_std=draw(r.encoder_noise_std),
        ground_slope=draw(r.ground_slope),
    )
