#!/usr/bin/env python3
"""Desk-scale acceptance training run.

Runs the full 4-stage curriculum at reduced step budgets and writes
checkpoints + metrics into runs/acceptance/. The acceptance suite evaluates
runs/acceptance/ckpt_final.npz (and trains one from scratch if missing, at
the cost of a few hours).
"""
import argparse
import os
import sys
from pathlib import Path

# single-threaded BLAS: the matrices are tiny, rollout workers own the cores,
# and OpenBLAS thread pools are not fork-safe
for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(var, "1")

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from multibiped.config import load_config
from multibiped.train.driver import Trainer, run_curriculum


def acceptance_config(seed: int = 0, workers: int | None = None):
    cfg = load_config()
    cfg.seed = seed
    cfg.trainer.n_workers = workers or max(1, os.cpu_count() or 1)
    # desk-scale budgets: enough for standing + velocity/yaw tracking, hours
    # not days on an 8-core box
    cfg.curriculum.stage_steps = (1_000_000, 600_000, 1_200_000, 1_200_000)
    cfg.curriculum.early_advance = True
    cfg.curriculum.early_advance_ep_len = 475.0
    cfg.curriculum.early_advance_min_fraction = 0.3
    return cfg


def warmup_kernel(cfg) -> None:
    """Compile the substep kernel in the parent so forked workers inherit it."""
    import numpy as np

    from multibiped.sim import AttachmentConfig, build_system, sim_step

    state = build_system(
        AttachmentConfig(1, [(0.0, 0.0)]), params=cfg.sim, initial_height=0.7
    )
    sim_step(state, np.zeros((1, 10)), hold_still=True)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--run-dir", type=str, default="runs/acceptance")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--resume", type=str, default=None)
    args = parser.parse_args()

    cfg = acceptance_config(args.seed, args.workers)
    warmup_kernel(cfg)
    run_dir = Path(args.run_dir)
    if args.resume:
        trainer = Trainer.resume(cfg, run_dir, args.resume)
    else:
        trainer = Trainer(cfg, run_dir)
    final = run_curriculum(trainer)
    print(f"final checkpoint: {final}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
