"""Per-robot trajectories pooled into one shared on-policy buffer."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Trajectory:
    """One robot's episode under the shared policy, with its own recurrence."""

    observations: np.ndarray  # (T, obs_dim), raw (un-normalized)
    actions: np.ndarray  # (T, action_dim), pre-clip samples
    log_probs: np.ndarray  # (T,)
    rewards: np.ndarray  # (T,)
    values: np.ndarray  # (T,)
    terminal: bool  # True when the episode truly failed (no bootstrap)
    bootstrap_value: float  # critic estimate past the horizon on truncation
    episode_id: int = 0
    robot_idx: int = 0
    reward_terms: dict[str, float] = field(default_factory=dict)  # per-term sums
    # filled by the update pass
    advantages: np.ndarray | None = None
    returns: np.ndarray | None = None

    @property
    def length(self) -> int:
        return self.observations.shape[0]

    @property
    def dones(self) -> np.ndarray:
        d = np.zeros(self.length, dtype=bool)
        if self.terminal:
            d[-1] = True
        return d

    def validate(self) -> None:
        n = self.length
        for name in ("actions", "log_probs", "rewards", "values"):
            arr = getattr(self, name)
            if arr.shape[0] != n:
                raise ValueError(f"{name} length {arr.shape[0]} != observations length {n}")
        if not np.all(np.isfinite(self.log_probs)):
            raise ValueError("non-finite log-probs in trajectory")


@dataclass
class TransitionBatch:
    """The shared replay buffer for one update round."""

    capacity: int = 60_000
    trajectories: list[Trajectory] = field(default_factory=list)
    episodes_seen: int = 0
    faults: int = 0

    @property
    def total_transitions(self) -> int:
        return sum(t.length for t in self.trajectories)

    @property
    def full(self) -> bool:
        return self.total_transitions >= self.capacity

    def add(self, traj: Trajectory) -> None:
        traj.validate()
        self.trajectories.append(traj)

    def mean_episode_length(self) -> float:
        if not self.trajectories:
            return 0.0
        return float(np.mean([t.length for t in self.trajectories]))

    def mean_reward(self) -> float:
        if not self.trajectories:
            return 0.0
        return float(np.mean([t.rewards.sum() for t in self.trajectories]))

    def mean_reward_terms(self) -> dict[str, float]:
        if not self.trajectories:
            return {}
        keys = self.trajectories[0].reward_terms.keys()
        out = {}
        for k in keys:
            out[k] = float(np.mean([t.reward_terms.get(k, 0.0) for t in self.trajectories]))
        return out
