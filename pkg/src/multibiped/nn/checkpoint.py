"""Versioned .npz checkpoints: parameters, optimizer moments, normalization
statistics, curriculum stage, step counters, and RNG state."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .normalize import RunningNorm
from .optim import AdamState

CHECKPOINT_VERSION = 1


def save_checkpoint(
    path: str | Path,
    params: dict[str, np.ndarray],
    adam: AdamState | None = None,
    obs_norm: RunningNorm | None = None,
    stage: int = 0,
    env_steps: int = 0,
    updates: int = 0,
    rng_state: dict | None = None,
    config_snapshot: dict | None = None,
) -> None:
    arrays: dict[str, np.ndarray] = {}
    for k, v in params.items():
        arrays[f"param/{k}"] = v
    if adam is not None:
        for k, v in adam.m.items():
            arrays[f"adam_m/{k}"] = v
        for k, v in adam.v.items():
            arrays[f"adam_v/{k}"] = v
    meta = {
        "version": CHECKPOINT_VERSION,
        "adam_t": adam.t if adam is not None else 0,
        "stage": stage,
        "env_steps": env_steps,
        "updates": updates,
        "rng_state": rng_state,
        "config": config_snapshot,
        "obs_norm": None,
    }
    if obs_norm is not None:
        arrays["norm/mean"] = obs_norm.mean
        arrays["norm/m2"] = obs_norm.m2
        meta["obs_norm"] = {"count": obs_norm.count, "enabled": obs_norm.enabled, "dim": obs_norm.dim}
    arrays["meta_json"] = np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        np.savez_compressed(fh, **arrays)


def load_checkpoint(path: str | Path) -> dict:
    with np.load(Path(path)) as data:
        meta = json.loads(bytes(data["meta_json"]).decode())
        if meta["version"] != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta['version']}")
        params = {
            k[len("param/") :]: data[k].copy() for k in data.files if k.startswith("param/")
        }
        adam = AdamState(t=int(meta["adam_t"]))
        for k in data.files:
            if k.startswith("adam_m/"):
                adam.m[k[len("adam_m/") :]] = data[k].copy()
            elif k.startswith("adam_v/"):
                adam.v[k[len("adam_v/") :]] = data[k].copy()
        obs_norm = None
        if meta.get("obs_norm"):
            info = meta["obs_norm"]
            obs_norm = RunningNorm.from_state(
                int(info["dim"]),
                {
                    "mean": data["norm/mean"],
                    "m2": data["norm/m2"],
                    "count": info["count"],
                    "enabled": info["enabled"],
                },
            )
    return {
        "params": params,
        "adam": adam,
        "obs_norm": obs_norm,
        "stage": int(meta["stage"]),
        "env_steps": int(meta["env_steps"]),
        "updates": int(meta["updates"]),
        "rng_state": meta.get("rng_state"),
        "config": meta.get("config"),
    }
