from .commands import Command, sample_command
from .curriculum import CurriculumStage, curriculum_stage, sample_perturbations
from .mdp import EnvOptions, EpisodeOver, TransportEnv
from .observations import OBS_DIM, observe, relative_yaw
from .rewards import RewardBreakdown, compute_rewards
from .sampling import sample_configuration
from .termination import TerminationReason, check_termination

__all__ = [
    "Command",
    "CurriculumStage",
    "EnvOptions",
    "EpisodeOver",
    "OBS_DIM",
    "RewardBreakdown",
    "TerminationReason",
    "TransportEnv",
    "check_termination",
    "compute_rewards",
    "curriculum_stage",
    "observe",
    "relative_yaw",
    "sample_command",
    "sample_configuration",
    "sample_perturbations",
]
