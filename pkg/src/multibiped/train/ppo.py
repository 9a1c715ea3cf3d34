"""Clipped-surrogate PPO over full-episode recurrent minibatches."""
from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..config import TrainerParams
from ..nn.normalize import RunningNorm
from ..nn.optim import AdamState, TrainingFault, adam_step
from ..nn.policy import entropy_tape, forward_batch_tape, lift_params
from ..nn.tensor import Tensor
from .buffer import TransitionBatch
from .gae import compute_gae


@dataclass
class UpdateStats:
    policy_loss: float = 0.0
    value_loss: float = 0.0
    entropy: float = 0.0
    approx_kl: float = 0.0
    clip_fraction: float = 0.0
    ratio_mean: float = 1.0
    grad_norm: float = 0.0
    minibatches: int = 0
    epoch_value_losses: tuple[float, ...] = ()
    seconds: float = 0.0


def _pad_minibatch(
    trajs, norm: RunningNorm
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    t_max = max(t.length for t in trajs)
    b = len(trajs)
    obs = np.zeros((t_max, b, trajs[0].observations.shape[1]))
    acts = np.zeros((t_max, b, trajs[0].actions.shape[1]))
    logp_old = np.zeros((t_max, b))
    adv = np.zeros((t_max, b))
    ret = np.zeros((t_max, b))
    mask = np.zeros((t_max, b))
    for j, tr in enumerate(trajs):
        n = tr.length
        obs[:n, j] = norm.normalize(tr.observations)
        acts[:n, j] = tr.actions
        logp_old[:n, j] = tr.log_probs
        adv[:n, j] = tr.advantages
        ret[:n, j] = tr.returns
        mask[:n, j] = 1.0
    return obs, acts, logp_old, adv, ret, mask


def ppo_update(
    params: dict[str, np.ndarray],
    adam: AdamState,
    batch: TransitionBatch,
    cfg: TrainerParams,
    norm: RunningNorm,
    rng: np.random.Generator,
    dump_dir: str | Path | None = None,
) -> UpdateStats:
    """Run the configured epochs of minibatch updates over one buffer.

    Episodes replay from their stored (zero) initial hidden states with full
    BPTT; advantages are normalized across the whole update batch.
    """
    t_start = time.time()
    trajs = batch.trajectories
    if not trajs:
        raise ValueError("empty batch")

    all_adv = []
    for tr in trajs:
        adv, ret = compute_gae(
            tr.rewards, tr.values, tr.dones, cfg.gamma, cfg.gae_lambda, tr.bootstrap_value
        )
        tr.advantages = adv
        tr.returns = ret
        all_adv.append(adv)
    flat_adv = np.concatenate(all_adv)
    if cfg.normalize_advantages:
        mean, std = flat_adv.mean(), flat_adv.std()
        for tr in trajs:
            tr.advantages = (tr.advantages - mean) / (std + 1e-8)

    stats = UpdateStats()
    kl_acc, clip_acc, ratio_acc, n_acc = 0.0, 0.0, 0.0, 0
    epoch_vlosses = []

    # a minibatch is `minibatch_episodes` whole episodes; every robot's
    # trajectory from an episode replays in the same batch. Episodes are
    # bucketed by length so padding stays cheap, and the bucket order is
    # reshuffled each epoch.
    groups: dict[int, list[int]] = {}
    for i, tr in enumerate(trajs):
        groups.setdefault(tr.episode_id, []).append(i)
    group_list = sorted(groups.values(), key=lambda idxs: max(trajs[i].length for i in idxs))
    chunks = [
        group_list[start : start + cfg.minibatch_episodes]
        for start in range(0, len(group_list), cfg.minibatch_episodes)
    ]

    order = np.arange(len(chunks))
    for _ in range(cfg.n_epochs):
        rng.shuffle(order)
        epoch_vloss, epoch_count = 0.0, 0
        for ci in order:
            mb = [trajs[i] for group in chunks[ci] for i in group]
            obs, acts, logp_old, adv, ret, mask = _pad_minibatch(mb, norm)
            n_valid = mask.sum()

            p = lift_params(params)
            logps, values = forward_batch_tape(p, obs, acts)

            surr_sum = Tensor(0.0)
            vloss_sum = Tensor(0.0)
            t_steps = obs.shape[0]
            for t in range(t_steps):
                ratio = (logps[t] - logp_old[t]).exp()
                s1 = ratio * adv[t]
                s2 = ratio.clip(1.0 - cfg.clip_range, 1.0 + cfg.clip_range) * adv[t]
                surr_sum = surr_sum + (s1.minimum(s2) * mask[t]).sum()
                vloss_sum = vloss_sum + ((values[t] - ret[t]).square() * mask[t]).sum()

            surrogate = surr_sum * (1.0 / n_valid)
            value_loss = vloss_sum * (1.0 / n_valid)
            entropy = entropy_tape(p)
            loss = -surrogate + cfg.value_coef * value_loss - cfg.entropy_coef * entropy

            if not np.isfinite(loss.value):
                if dump_dir is not None:
                    dump = Path(dump_dir) / "ppo_batch_dump.npz"
                    np.savez_compressed(dump, obs=obs, acts=acts, logp_old=logp_old, adv=adv, ret=ret, mask=mask)
                raise TrainingFault(f"non-finite PPO loss {loss.value}")

            loss.backward()
            grads = {
                k: (t.grad if t.grad is not None else np.zeros_like(t.value))
                for k, t in p.items()
            }
            stats.grad_norm = adam_step(
                params,
                grads,
                adam,
                lr=cfg.learning_rate,
                max_grad_norm=cfg.max_grad_norm,
            )

            # diagnostics from the freshly built tape (pre-update values)
            ratio_vals = np.concatenate(
                [np.exp(logps[t].value - logp_old[t])[mask[t] > 0] for t in range(t_steps)]
            )
            log_ratio = np.concatenate(
                [(logps[t].value - logp_old[t])[mask[t] > 0] for t in range(t_steps)]
            )
            kl_acc += float(np.sum(ratio_vals - 1.0 - log_ratio))
            clip_acc += float(np.sum(np.abs(ratio_vals - 1.0) > cfg.clip_range))
            ratio_acc += float(np.sum(ratio_vals))
            n_acc += ratio_vals.size

            stats.policy_loss = -float(surrogate.value)
            stats.value_loss = float(value_loss.value)
            stats.entropy = float(entropy.value)
            stats.minibatches += 1
            epoch_vloss += float(value_loss.value)
            epoch_count += 1
        epoch_vlosses.append(epoch_vloss / max(1, epoch_count))

    stats.approx_kl = kl_acc / max(1, n_acc)
    stats.clip_fraction = clip_acc / max(1, n_acc)
    stats.ratio_mean = ratio_acc / max(1, n_acc)
    stats.epoch_value_losses = tuple(epoch_vlosses)
    stats.seconds = time.time() - t_start
    return stats
