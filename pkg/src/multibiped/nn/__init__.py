from .checkpoint import load_checkpoint, save_checkpoint
from .normalize import RunningNorm
from .optim import AdamState, TrainingFault, adam_step, clip_global_norm
from .policy import (
    ACTION_DIM,
    HIDDEN_DIM,
    OBS_DIM,
    HiddenState,
    forward_batch_tape,
    forward_sequence,
    gaussian_entropy,
    gaussian_logp,
    init_params,
    lift_params,
    policy_step_np,
    sample_action,
)
from .tensor import Tensor

__all__ = [
    "ACTION_DIM",
    "AdamState",
    "HIDDEN_DIM",
    "HiddenState",
    "OBS_DIM",
    "RunningNorm",
    "Tensor",
    "TrainingFault",
    "adam_step",
    "clip_global_norm",
    "forward_batch_tape",
    "forward_sequence",
    "gaussian_entropy",
    "gaussian_logp",
    "init_params",
    "lift_params",
    "load_checkpoint",
    "policy_step_np",
    "sample_action",
    "save_checkpoint",
]
