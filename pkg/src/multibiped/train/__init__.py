from .buffer import Trajectory, TransitionBatch
from .driver import Trainer, run_curriculum
from .gae import compute_gae
from .ppo import UpdateStats, ppo_update
from .rollout import CollectStats, RolloutCollector, run_episode

__all__ = [
    "CollectStats",
    "RolloutCollector",
    "Trainer",
    "Trajectory",
    "TransitionBatch",
    "UpdateStats",
    "compute_gae",
    "ppo_update",
    "run_curriculum",
    "run_episode",
]
