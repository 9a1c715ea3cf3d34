"""The 4-stage curriculum training driver.

Each cycle collects a fresh buffer under frozen parameters, runs the PPO
update, then folds the round's raw observations into the normalizer. Stages
advance on step budgets, with an optional early advance once episodes run
nearly full length. Checkpoints land at stage boundaries and periodically.
"""
from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..config import RunConfig, config_to_dict, save_config
from ..env.mdp import EnvOptions
from ..nn.checkpoint import load_checkpoint, save_checkpoint
from ..nn.normalize import RunningNorm
from ..nn.optim import AdamState
from ..nn.policy import OBS_DIM, init_params
from .ppo import ppo_update
from .rollout import RolloutCollector

METRIC_COLUMNS = [
    "update", "stage", "env_steps", "episodes", "faults",
    "mean_ep_len", "mean_reward",
    "policy_loss", "value_loss", "entropy", "approx_kl", "clip_fraction",
    "ratio_mean", "grad_norm", "collect_s", "update_s",
]


@dataclass
class Trainer:
    cfg: RunConfig
    run_dir: Path
    params: dict[str, np.ndarray] = field(default_factory=dict)
    adam: AdamState = field(default_factory=AdamState)
    norm: RunningNorm | None = None
    stage: int = 1
    env_steps: int = 0
    stage_env_steps: int = 0
    updates: int = 0
    fixed_options: EnvOptions | None = None  # specialized-policy mode
    log_stream = None

    def __post_init__(self) -> None:
        self.run_dir = Path(self.run_dir)
        self.rng = np.random.default_rng(self.cfg.seed)
        if not self.params:
            self.params = init_params(
                self.rng, log_std_init=self.cfg.trainer.log_std_init
            )
        if self.norm is None:
            self.norm = RunningNorm(OBS_DIM, enabled=self.cfg.trainer.normalize_observations)
        self.collector = RolloutCollector(self.cfg, self.cfg.trainer.n_workers)
        self._recent_ep_lens: list[float] = []

    # ---- persistence ----------------------------------------------------------

    def save(self, name: str) -> Path:
        path = self.run_dir / name
        save_checkpoint(
            path,
            self.params,
            adam=self.adam,
            obs_norm=self.norm,
            stage=self.stage,
            env_steps=self.env_steps,
            updates=self.updates,
            rng_state={
                "master": self.rng.bit_generator.state,
                "episode_counter": self.collector._episode_counter,
                "stage_env_steps": self.stage_env_steps,
            },
            config_snapshot=config_to_dict(self.cfg),
        )
        return path

    @staticmethod
    def resume(cfg: RunConfig, run_dir: str | Path, checkpoint: str | Path) -> "Trainer":
        data = load_checkpoint(checkpoint)
        t = Trainer(cfg, Path(run_dir), params=data["params"], adam=data["adam"], norm=data["obs_norm"])
        t.stage = max(1, data["stage"])
        t.env_steps = data["env_steps"]
        t.updates = data["updates"]
        rng_state = data.get("rng_state") or {}
        if "master" in rng_state:
            t.rng.bit_generator.state = rng_state["master"]
        t.collector._episode_counter = int(rng_state.get("episode_counter", 0))
        t.stage_env_steps = int(rng_state.get("stage_env_steps", 0))
        return t

    # ---- logging ----------------------------------------------------------------

    def _log(self, msg: str) -> None:
        line = f"[{time.strftime('%H:%M:%S')}] {msg}"
        print(line, file=self.log_stream or sys.stderr, flush=True)

    def _append_metrics(self, row: dict) -> None:
        path = self.run_dir / "metrics.tsv"
        term_cols = sorted(k for k in row if k.startswith("rew_"))
        cols = METRIC_COLUMNS + term_cols
        if not path.exists():
            path.write_text("\t".join(cols) + "\n")
        with path.open("a") as fh:
            fh.write("\t".join(f"{row.get(c, 0):.6g}" for c in cols) + "\n")

    # ---- training ------------------------------------------------------------------

    def train_cycle(self) -> dict:
        """One collect + update round at the current stage."""
        t0 = time.time()
        seed_base = int(self.rng.integers(0, 2**62))
        batch, cstats = self.collector.collect(
            self.params,
            self.norm,
            self.stage,
            seed_base,
            capacity=self.cfg.trainer.buffer_size,
            options=self.fixed_options,
        )
        collect_s = time.time() - t0

        ustats = ppo_update(
            self.params, self.adam, batch, self.cfg.trainer, self.norm, self.rng,
            dump_dir=self.run_dir,
        )
        # fold this round's raw observations in after the update so stored
        # log-probs replay exactly
        if self.norm.enabled:
            for tr in batch.trajectories:
                self.norm.update(tr.observations)

        self.env_steps += cstats.env_steps
        self.stage_env_steps += cstats.env_steps
        self.updates += 1
        self._recent_ep_lens.append(cstats.mean_episode_length)
        self._recent_ep_lens = self._recent_ep_lens[-5:]

        row = {
            "update": self.updates,
            "stage": self.stage,
            "env_steps": self.env_steps,
            "episodes": cstats.episodes,
            "faults": cstats.faults,
            "mean_ep_len": cstats.mean_episode_length,
            "mean_reward": batch.mean_reward(),
            "policy_loss": ustats.policy_loss,
            "value_loss": ustats.value_loss,
            "entropy": ustats.entropy,
            "approx_kl": ustats.approx_kl,
            "clip_fraction": ustats.clip_fraction,
            "ratio_mean": ustats.ratio_mean,
            "grad_norm": ustats.grad_norm,
            "collect_s": collect_s,
            "update_s": ustats.seconds,
        }
        for k, v in batch.mean_reward_terms().items():
            row[f"rew_{k}"] = v
        self._append_metrics(row)
        self._log(
            f"update {self.updates} stage {self.stage} steps {self.env_steps} "
            f"ep_len {cstats.mean_episode_length:.1f} reward {batch.mean_reward():.1f} "
            f"kl {ustats.approx_kl:.4f} collect {collect_s:.1f}s update {ustats.seconds:.1f}s"
        )
        return row

    def _stage_done(self) -> bool:
        budget = self.cfg.curriculum.stage_steps[self.stage - 1]
        if self.stage_env_steps >= budget:
            return True
        if (
            self.cfg.curriculum.early_advance
            and self.stage_env_steps >= budget * self.cfg.curriculum.early_advance_min_fraction
            and len(self._recent_ep_lens) >= 3
            and np.mean(self._recent_ep_lens[-3:]) >= self.cfg.curriculum.early_advance_ep_len
        ):
            return True
        return False

    def run_stage(self) -> None:
        self._log(f"=== stage {self.stage} start ({self.stage_env_steps} steps so far) ===")
        while not self._stage_done():
            self.train_cycle()
            if self.updates % self.cfg.trainer.checkpoint_every_updates == 0:
                self.save("ckpt_latest.npz")
        self.save(f"ckpt_stage{self.stage}.npz")


def run_curriculum(trainer: Trainer) -> Path:
    """Advance through stages 1..4 and return the final checkpoint path."""
    trainer.run_dir.mkdir(parents=True, exist_ok=True)
    save_config(trainer.cfg, trainer.run_dir / "config.yaml")
    while trainer.stage <= 4:
        trainer.run_stage()
        trainer._recent_ep_lens.clear()
        if trainer.stage == 4:
            break
        trainer.stage += 1
        trainer.stage_env_steps = 0
    return trainer.save("ckpt_final.npz")
