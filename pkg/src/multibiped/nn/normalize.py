"""Running observation normalization (Welford merge), frozen per collection
round so stored log-probs stay exactly replayable during the update."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class RunningNorm:
    dim: int
    mean: np.ndarray = field(default_factory=lambda: np.zeros(0))
    m2: np.ndarray = field(default_factory=lambda: np.zeros(0))
    count: float = 0.0
    clip: float = 10.0
    eps: float = 1e-8
    enabled: bool = True

    def __post_init__(self) -> None:
        if self.mean.size == 0:
            self.mean = np.zeros(self.dim)
        if self.m2.size == 0:
            self.m2 = np.zeros(self.dim)

    @property
    def var(self) -> np.ndarray:
        if self.count < 2:
            return np.ones(self.dim)
        return self.m2 / self.count

    def update(self, batch: np.ndarray) -> None:
        """Merge a (n, dim) batch of raw observations into the statistics."""
        batch = np.asarray(batch, dtype=float).reshape(-1, self.dim)
        n = batch.shape[0]
        if n == 0:
            return
        b_mean = batch.mean(axis=0)
        b_m2 = ((batch - b_mean) ** 2).sum(axis=0)
        delta = b_mean - self.mean
        total = self.count + n
        self.mean = self.mean + delta * (n / total)
        self.m2 = self.m2 + b_m2 + delta**2 * (self.count * n / total)
        self.count = total

    def normalize(self, obs: np.ndarray) -> np.ndarray:
        if not self.enabled or self.count < 2:
            return np.asarray(obs, dtype=float)
        z = (obs - self.mean) / np.sqrt(self.var + self.eps)
        return np.clip(z, -self.clip, self.clip)

    def state_dict(self) -> dict[str, np.ndarray | float | bool]:
        return {
            "mean": self.mean.copy(),
            "m2": self.m2.copy(),
            "count": self.count,
            "enabled": self.enabled,
        }

    @staticmethod
    def from_state(dim: int, state: dict) -> "RunningNorm":
        rn = RunningNorm(dim=dim)
        rn.mean = np.asarray(state["mean"], dtype=float)
        rn.m2 = np.asarray(state["m2"], dtype=float)
        rn.count = float(state["count"])
        rn.enabled = bool(state["enabled"])
        return rn
