"""The recurrent actor-critic: two 64-unit LSTM layers and a linear head per
trunk, a 10-dim Gaussian action head with learned state-independent log-std,
and a parallel critic trunk over the same local input.

Two forward paths share one parameter dict: a plain-numpy step path for
rollouts (no tape) and a batched Tensor path for BPTT training.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tensor import Tensor

OBS_DIM = 26
ACTION_DIM = 10
HIDDEN_DIM = 64

LOG_2PI = math.log(2.0 * math.pi)


@dataclass
class HiddenState:
    """Per-robot recurrent state for both trunks."""

    actor_h1: np.ndarray
    actor_c1: np.ndarray
    actor_h2: np.ndarray
    actor_c2: np.ndarray
    critic_h1: np.ndarray
    critic_c1: np.ndarray
    critic_h2: np.ndarray
    critic_c2: np.ndarray

    @staticmethod
    def zeros(hidden: int = HIDDEN_DIM) -> "HiddenState":
        return HiddenState(*(np.zeros(hidden) for _ in range(8)))

    def copy(self) -> "HiddenState":
        return HiddenState(*(getattr(self, f).copy() for f in self.__dataclass_fields__))


def _lstm_init(rng: np.random.Generator, input_dim: int, hidden: int) -> dict[str, np.ndarray]:
    k = 1.0 / math.sqrt(hidden)
    return {
        "wx": rng.uniform(-k, k, size=(4 * hidden, input_dim)),
        "wh": rng.uniform(-k, k, size=(4 * hidden, hidden)),
        "b": rng.uniform(-k, k, size=4 * hidden),
    }


def init_params(
    rng: np.random.Generator,
    obs_dim: int = OBS_DIM,
    action_dim: int = ACTION_DIM,
    hidden: int = HIDDEN_DIM,
    log_std_init: float = -0.5,
) -> dict[str, np.ndarray]:
    params: dict[str, np.ndarray] = {}
    for trunk in ("actor", "critic"):
        l1 = _lstm_init(rng, obs_dim, hidden)
        l2 = _lstm_init(rng, hidden, hidden)
        for name, arr in l1.items():
            params[f"{trunk}_lstm1_{name}"] = arr
        for name, arr in l2.items():
            params[f"{trunk}_lstm2_{name}"] = arr
    k = 1.0 / math.sqrt(hidden)
    params["actor_head_w"] = rng.uniform(-k, k, size=(action_dim, hidden)) * 0.01
    params["actor_head_b"] = np.zeros(action_dim)
    params["critic_head_w"] = rng.uniform(-k, k, size=(1, hidden))
    params["critic_head_b"] = np.zeros(1)
    params["log_std"] = np.full(action_dim, log_std_init)
    return params


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def _lstm_cell_np(
    params: dict[str, np.ndarray], prefix: str, x: np.ndarray, h: np.ndarray, c: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Standard LSTM cell (gate order i, f, g, o)."""
    gates = params[f"{prefix}_wx"] @ x + params[f"{prefix}_wh"] @ h + params[f"{prefix}_b"]
    hd = h.shape[-1]
    i = _sigmoid(gates[:hd])
    f = _sigmoid(gates[hd : 2 * hd])
    g = np.tanh(gates[2 * hd : 3 * hd])
    o = _sigmoid(gates[3 * hd :])
    c_new = f * c + i * g
    h_new = o * np.tanh(c_new)
    return h_new, c_new


def _check_obs(obs: np.ndarray, params: dict[str, np.ndarray]) -> None:
    expected = params["actor_lstm1_wx"].shape[1]
    if obs.shape[-1] != expected:
        raise ValueError(f"observation dim {obs.shape[-1]} does not match network input {expected}")


def policy_step_np(
    params: dict[str, np.ndarray], obs: np.ndarray, hidden: HiddenState
) -> tuple[np.ndarray, float, HiddenState]:
    """One rollout step: action mean, value, and the next hidden state."""
    _check_obs(obs, params)
    h = hidden.copy()
    h.actor_h1, h.actor_c1 = _lstm_cell_np(params, "actor_lstm1", obs, h.actor_h1, h.actor_c1)
    h.actor_h2, h.actor_c2 = _lstm_cell_np(params, "actor_lstm2", h.actor_h1, h.actor_h2, h.actor_c2)
    mean = params["actor_head_w"] @ h.actor_h2 + params["actor_head_b"]
    h.critic_h1, h.critic_c1 = _lstm_cell_np(params, "critic_lstm1", obs, h.critic_h1, h.critic_c1)
    h.critic_h2, h.critic_c2 = _lstm_cell_np(params, "critic_lstm2", h.critic_h1, h.critic_h2, h.critic_c2)
    value = float((params["critic_head_w"] @ h.critic_h2 + params["critic_head_b"])[0])
    return mean, value, h


def gaussian_logp(mean: np.ndarray, log_std: np.ndarray, action: np.ndarray) -> float:
    z = (action - mean) / np.exp(log_std)
    return float(-0.5 * np.sum(z * z) - np.sum(log_std) - 0.5 * LOG_2PI * mean.shape[-1])


def gaussian_entropy(log_std: np.ndarray) -> float:
    return float(np.sum(log_std + 0.5 * (LOG_2PI + 1.0)))


def sample_action(
    params: dict[str, np.ndarray],
    obs: np.ndarray,
    hidden: HiddenState,
    noise: np.ndarray,
) -> tuple[np.ndarray, float, float, HiddenState]:
    """Sample a pre-clip action given unit-normal noise; log-prob is pre-clip."""
    mean, value, h = policy_step_np(params, obs, hidden)
    std = np.exp(params["log_std"])
    action = mean + std * noise
    logp = gaussian_logp(mean, params["log_std"], action)
    return action, logp, value, h


def forward_sequence(
    params: dict[str, np.ndarray],
    obs_sequence: np.ndarray,
    initial_hidden: HiddenState | None = None,
) -> tuple[np.ndarray, np.ndarray, HiddenState]:
    """Run a (T, obs_dim) sequence; returns action means, values, final hidden."""
    obs_sequence = np.asarray(obs_sequence, dtype=float)
    _check_obs(obs_sequence, params)
    h = (initial_hidden or HiddenState.zeros(params["actor_lstm1_wh"].shape[1])).copy()
    means = np.zeros((obs_sequence.shape[0], params["actor_head_w"].shape[0]))
    values = np.zeros(obs_sequence.shape[0])
    for t, obs in enumerate(obs_sequence):
        mean, value, h = policy_step_np(params, obs, h)
        means[t] = mean
        values[t] = value
    return means, values, h


# ---- batched tape path for BPTT training ------------------------------------------


def _lstm_fused(gates: Tensor, c_prev: Tensor, hidden: int) -> tuple[Tensor, Tensor]:
    """Gate nonlinearity and state update as two tape nodes.

    The cell-state node owns the i/f/g gate gradients; the hidden-state node
    owns the output gate and chains into the cell node, so the tape
    accumulates the full gate gradient across both.
    """
    gv = gates.value
    i = 1.0 / (1.0 + np.exp(-gv[:, :hidden]))
    f = 1.0 / (1.0 + np.exp(-gv[:, hidden : 2 * hidden]))
    g = np.tanh(gv[:, 2 * hidden : 3 * hidden])
    o = 1.0 / (1.0 + np.exp(-gv[:, 3 * hidden :]))
    c_new_v = f * c_prev.value + i * g

    def backward_c(gc):
        dgates = np.empty_like(gv)
        dgates[:, :hidden] = gc * g * i * (1.0 - i)
        dgates[:, hidden : 2 * hidden] = gc * c_prev.value * f * (1.0 - f)
        dgates[:, 2 * hidden : 3 * hidden] = gc * i * (1.0 - g * g)
        dgates[:, 3 * hidden :] = 0.0
        return ((gates, dgates), (c_prev, gc * f))

    c_new = Tensor(c_new_v, requires_grad=True, _parents=(gates, c_prev), _backward_fn=backward_c)

    tanh_c = np.tanh(c_new_v)
    h_new_v = o * tanh_c

    def backward_h(gh):
        dgates = np.zeros_like(gv)
        dgates[:, 3 * hidden :] = gh * tanh_c * o * (1.0 - o)
        return ((gates, dgates), (c_new, gh * o * (1.0 - tanh_c * tanh_c)))

    h_new = Tensor(h_new_v, requires_grad=True, _parents=(gates, c_new), _backward_fn=backward_h)
    return h_new, c_new


def _lstm_cell_tape(
    p: dict[str, Tensor], prefix: str, x: Tensor, h: Tensor, c: Tensor, hidden: int
) -> tuple[Tensor, Tensor]:
    gates = x @ _t(p[f"{prefix}_wx"]) + h @ _t(p[f"{prefix}_wh"]) + p[f"{prefix}_b"]
    return _lstm_fused(gates, c, hidden)


_TRANSPOSED: dict[int, Tensor] = {}


def _t(p: Tensor) -> Tensor:
    """Transpose of a parameter tensor, cached per tape build."""
    key = id(p)
    cached = _TRANSPOSED.get(key)
    if cached is not None:
        return cached

    def backward(g):
        return ((p, g.T),)

    out = Tensor(p.value.T, requires_grad=p.requires_grad, _parents=(p,), _backward_fn=backward)
    _TRANSPOSED[key] = out
    return out


def lift_params(params: dict[str, np.ndarray]) -> dict[str, Tensor]:
    _TRANSPOSED.clear()
    return {k: Tensor.param(v) for k, v in params.items()}


def forward_batch_tape(
    p: dict[str, Tensor],
    obs: np.ndarray,  # (T, B, obs_dim)
    actions: np.ndarray,  # (T, B, action_dim)
    hidden: int = HIDDEN_DIM,
) -> tuple[list[Tensor], list[Tensor]]:
    """Per-step log-probs and values for padded episode batches.

    Episodes all start from zero hidden state; padding steps are masked by
    the caller. Returns lists of (B,) tensors, one per time step.
    """
    t_steps, batch, _ = obs.shape
    zeros = Tensor(np.zeros((batch, hidden)))
    ah1 = ac1 = ah2 = ac2 = zeros
    ch1 = cc1 = ch2 = cc2 = zeros
    log_std = p["log_std"]
    inv_std = (-log_std).exp()
    logps: list[Tensor] = []
    values: list[Tensor] = []
    for t in range(t_steps):
        x = Tensor(obs[t])
        ah1, ac1 = _lstm_cell_tape(p, "actor_lstm1", x, ah1, ac1, hidden)
        ah2, ac2 = _lstm_cell_tape(p, "actor_lstm2", ah1, ah2, ac2, hidden)
        mean = ah2 @ _t(p["actor_head_w"]) + p["actor_head_b"]
        ch1, cc1 = _lstm_cell_tape(p, "critic_lstm1", x, ch1, cc1, hidden)
        ch2, cc2 = _lstm_cell_tape(p, "critic_lstm2", ch1, ch2, cc2, hidden)
        value = ch2 @ _t(p["critic_head_w"]) + p["critic_head_b"]
        z = (Tensor(actions[t]) - mean) * inv_std
        logp = (
            z.square().sum(axis=1) * (-0.5)
            - log_std.sum()
            - 0.5 * LOG_2PI * actions.shape[-1]
        )
        logps.append(logp)
        values.append(value[:, 0])
    return logps, values


def entropy_tape(p: dict[str, Tensor], action_dim: int = ACTION_DIM) -> Tensor:
    return p["log_std"].sum() + 0.5 * (LOG_2PI + 1.0) * action_dim
