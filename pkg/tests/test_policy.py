"""Network checks: fixed points, scalar-loop oracle, path agreement, BPTT."""
import math

import numpy as np
import pytest

from multibiped.nn import (
    HiddenState,
    Tensor,
    forward_batch_tape,
    forward_sequence,
    gaussian_entropy,
    gaussian_logp,
    init_params,
    lift_params,
    policy_step_np,
    sample_action,
)


def scalar_lstm_reference(params, prefix, x, h, c):
    """Element-by-element LSTM cell, the independent oracle implementation."""
    hd = len(h)
    wx, wh, b = params[f"{prefix}_wx"], params[f"{prefix}_wh"], params[f"{prefix}_b"]
    h_new = np.zeros(hd)
    c_new = np.zeros(hd)
    for k in range(hd):
        gi = b[k] + sum(wx[k, j] * x[j] for j in range(len(x))) + sum(wh[k, j] * h[j] for j in range(hd))
        gf = b[hd + k] + sum(wx[hd + k, j] * x[j] for j in range(len(x))) + sum(
            wh[hd + k, j] * h[j] for j in range(hd)
        )
        gg = b[2 * hd + k] + sum(wx[2 * hd + k, j] * x[j] for j in range(len(x))) + sum(
            wh[2 * hd + k, j] * h[j] for j in range(hd)
        )
        go = b[3 * hd + k] + sum(wx[3 * hd + k, j] * x[j] for j in range(len(x))) + sum(
            wh[3 * hd + k, j] * h[j] for j in range(hd)
        )
        i = 1.0 / (1.0 + math.exp(-gi))
        f = 1.0 / (1.0 + math.exp(-gf))
        g = math.tanh(gg)
        o = 1.0 / (1.0 + math.exp(-go))
        c_new[k] = f * c[k] + i * g
        h_new[k] = o * math.tanh(c_new[k])
    return h_new, c_new


def test_zero_weights_zero_input_fixed_point():
    params = init_params(np.random.default_rng(0))
    for k in params:
        if k != "log_std":
            params[k] = np.zeros_like(params[k])
    params["actor_head_b"] = np.array([0.1] * 10)
    mean, value, h = policy_step_np(params, np.zeros(26), HiddenState.zeros())
    assert np.allclose(mean, 0.1)  # head bias only
    assert value == 0.0
    for f in ("actor_h1", "actor_c1", "actor_h2", "actor_c2"):
        assert np.allclose(getattr(h, f), 0.0)


def test_sequence_of_length_one_equals_single_cell():
    params = init_params(np.random.default_rng(1))
    obs = np.random.default_rng(2).normal(size=(1, 26))
    means, values, hf = forward_sequence(params, obs)
    mean1, value1, h1 = policy_step_np(params, obs[0], HiddenState.zeros())
    assert np.array_equal(means[0], mean1)
    assert values[0] == value1
    assert np.array_equal(hf.actor_h2, h1.actor_h2)


def test_forward_matches_scalar_loop_reference():
    # randomized net vs an independent per-element implementation
    rng = np.random.default_rng(3)
    params = init_params(rng, hidden=16)
    x = rng.normal(size=26)
    h = HiddenState.zeros(16)
    mean, value, h_new = policy_step_np(params, x, h)
    h1, c1 = scalar_lstm_reference(params, "actor_lstm1", x, np.zeros(16), np.zeros(16))
    h2, c2 = scalar_lstm_reference(params, "actor_lstm2", h1, np.zeros(16), np.zeros(16))
    mean_ref = params["actor_head_w"] @ h2 + params["actor_head_b"]
    assert np.allclose(h_new.actor_h1, h1, atol=1e-12)
    assert np.allclose(h_new.actor_c2, c2, atol=1e-12)
    assert np.allclose(mean, mean_ref, atol=1e-12)


def test_obs_dim_mismatch_raises_shape_error():
    params = init_params(np.random.default_rng(0))
    with pytest.raises(ValueError, match="does not match"):
        policy_step_np(params, np.zeros(25), HiddenState.zeros())
    with pytest.raises(ValueError, match="does not match"):
        forward_sequence(params, np.zeros((4, 27)))


def test_forward_is_deterministic():
    params = init_params(np.random.default_rng(4))
    obs = np.random.default_rng(5).normal(size=(20, 26))
    a = forward_sequence(params, obs)
    b = forward_sequence(params, obs)
    assert np.array_equal(a[0], b[0])
    assert np.array_equal(a[1], b[1])


def test_tape_path_matches_numpy_path():
    params = init_params(np.random.default_rng(6))
    t_steps, batch = 12, 3
    obs = np.random.default_rng(7).normal(size=(t_steps, batch, 26))
    acts = np.random.default_rng(8).normal(size=(t_steps, batch, 10))
    p = lift_params(params)
    logps, values = forward_batch_tape(p, obs, acts)
    for b in range(batch):
        means_np, values_np, _ = forward_sequence(params, obs[:, b, :])
        for t in range(t_steps):
            assert values[t].value[b] == pytest.approx(values_np[t], abs=1e-12)
            want = gaussian_logp(means_np[t], params["log_std"], acts[t, b])
            assert logps[t].value[b] == pytest.approx(want, abs=1e-12)


def test_bptt_matches_central_differences():
    # 16-step BPTT vs central differences at eps 1e-5: one directional
    # derivative per parameter tensor (checks every gradient entry through a
    # random projection at a numerically meaningful magnitude)
    params = init_params(np.random.default_rng(9))
    t_steps, batch = 16, 2
    obs = np.random.default_rng(10).normal(size=(t_steps, batch, 26))
    acts = np.random.default_rng(11).normal(size=(t_steps, batch, 10))

    def loss_value():
        p = lift_params(params)
        logps, values = forward_batch_tape(p, obs, acts)
        total = Tensor(0.0)
        for t in range(t_steps):
            total = total + logps[t].sum() + values[t].square().sum()
        return total, p

    loss, p = loss_value()
    loss.backward()
    rng = np.random.default_rng(12)
    eps = 1e-5
    for name in sorted(params):
        grad = p[name].grad
        grad = np.zeros_like(params[name]) if grad is None else grad
        direction = rng.normal(size=params[name].shape)
        direction /= np.linalg.norm(direction)
        old = params[name].copy()
        params[name] += eps * direction
        lp, _ = loss_value()
        params[name][:] = old - eps * direction
        lm, _ = loss_value()
        params[name][:] = old
        fd = (lp.value - lm.value) / (2 * eps)
        ad = float(np.sum(grad * direction))
        rel = abs(fd - ad) / max(abs(fd), abs(ad), 1e-6)
        assert rel <= 1e-4, (name, fd, ad)


def test_gaussian_helpers():
    mean = np.zeros(10)
    log_std = np.full(10, -0.5)
    a = np.zeros(10)
    want = -10 * (-0.5) - 0.5 * 10 * math.log(2 * math.pi)
    assert gaussian_logp(mean, log_std, a) == pytest.approx(want)
    assert gaussian_entropy(log_std) == pytest.approx(10 * (-0.5 + 0.5 * (math.log(2 * math.pi) + 1)))


def test_sample_action_logp_is_pre_clip():
    params = init_params(np.random.default_rng(13))
    noise = np.full(10, 3.0)  # pushes samples far outside [-1, 1]
    action, logp, value, _ = sample_action(params, np.zeros(26), HiddenState.zeros(), noise)
    assert np.any(np.abs(action) > 1.0)
    mean, _, _ = policy_step_np(params, np.zeros(26), HiddenState.zeros())
    assert logp == pytest.approx(gaussian_logp(mean, params["log_std"], action), abs=1e-12)
