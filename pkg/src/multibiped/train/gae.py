"""Generalized advantage estimation over single-episode arrays."""
from __future__ import annotations

import numpy as np


def compute_gae(
    rewards: np.ndarray,
    values: np.ndarray,
    dones: np.ndarray,
    gamma: float = 0.95,
    lam: float = 1.0,
    bootstrap_value: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Advantages and returns for one trajectory.

    `dones[t]` marks a true terminal at step t (no bootstrap past it);
    `bootstrap_value` is the critic's estimate beyond the last step and is
    only used when the final step is not terminal (truncation). With lam=1
    the advantage reduces to the discounted Monte-Carlo return minus the
    value baseline.
    """
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    dones = np.asarray(dones, dtype=bool)
    n = rewards.shape[0]
    if values.shape[0] != n or dones.shape[0] != n:
        raise ValueError(
            f"length mismatch: rewards {n}, values {values.shape[0]}, dones {dones.shape[0]}"
        )
    advantages = np.zeros(n)
    gae = 0.0
    next_value = float(bootstrap_value)
    for t in range(n - 1, -1, -1):
        nonterminal = 0.0 if dones[t] else 1.0
        delta = rewards[t] + gamma * next_value * nonterminal - values[t]
        gae = delta + gamma * lam * nonterminal * gae
        advantages[t] = gae
        next_value = values[t]
    returns = advantages + values
    return advantages, returns
