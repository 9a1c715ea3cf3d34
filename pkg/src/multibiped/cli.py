"""Command-line entry points: train, eval, replay, teleop."""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .config import load_config
from .evaluation.runner import run_eval
from .evaluation.scenarios import SCENARIO_NAMES
from .nn.checkpoint import load_checkpoint
from .nn.normalize import RunningNorm
from .nn.policy import OBS_DIM
from .replay import replay_log


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multibiped",
        description="Decentralized multi-biped payload transport: training, evaluation, replay, teleop.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run the 4-stage curriculum (or a specialized config)")
    p_train.add_argument("--config", type=str, default=None, help="YAML config file")
    p_train.add_argument("--seed", type=int, default=None)
    p_train.add_argument("--run-dir", type=str, default=None, help="output directory (default runs/<name>)")
    p_train.add_argument("--name", type=str, default="run")
    p_train.add_argument("--resume", type=str, default=None, help="checkpoint to resume from")
    p_train.add_argument("--workers", type=int, default=None)
    p_train.add_argument(
        "--specialize", type=str, default=None,
        help="pin training to one scenario's configuration (specialized-policy mode)",
    )

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint on a scenario")
    p_eval.add_argument("--scenario", type=str, required=True, help=", ".join(SCENARIO_NAMES))
    p_eval.add_argument("--ckpt", type=str, required=True)
    p_eval.add_argument("--config", type=str, default=None)
    p_eval.add_argument("--episodes", type=int, default=None)
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--sweep", action="store_true", help="run the perturbation force sweep")
    p_eval.add_argument("--payload", type=float, default=None, help="payload mass override (kg)")
    p_eval.add_argument("--out", type=str, default=None, help="directory for report files")
    p_eval.add_argument("--workers", type=int, default=None)
    p_eval.add_argument(
        "--save-logs", action="store_true",
        help="also record one unperturbed episode log per command into --out",
    )

    p_replay = sub.add_parser("replay", help="render a trajectory log as text frames")
    p_replay.add_argument("--log", type=str, required=True)
    p_replay.add_argument("--every", type=int, default=25, help="render every Nth step")

    p_teleop = sub.add_parser("teleop", help="serve the live teleoperation session")
    p_teleop.add_argument("--ckpt", type=str, required=True)
    p_teleop.add_argument("--config", type=str, default=None)
    p_teleop.add_argument("--scenario", type=str, default=None)
    p_teleop.add_argument("--port", type=int, default=None)
    p_teleop.add_argument("--host", type=str, default=None)
    p_teleop.add_argument("--seed", type=int, default=0)
    return parser


def _load_policy(ckpt_path: str):
    if not Path(ckpt_path).exists():
        raise FileNotFoundError(f"checkpoint not found: {ckpt_path}")
    data = load_checkpoint(ckpt_path)
    norm = data["obs_norm"] or RunningNorm(OBS_DIM, enabled=False)
    return data["params"], norm, data


def _cmd_train(args) -> int:
    from .env.mdp import EnvOptions
    from .evaluation.scenarios import build_scenario
    from .train.driver import Trainer, run_curriculum

    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    cfg = load_config(args.config, overrides)
    if args.workers is not None:
        cfg.trainer.n_workers = args.workers
    run_dir = Path(args.run_dir) if args.run_dir else Path("runs") / f"{args.name}_seed{cfg.seed}"
    run_dir.mkdir(parents=True, exist_ok=True)

    if args.resume:
        trainer = Trainer.resume(cfg, run_dir, args.resume)
    else:
        trainer = Trainer(cfg, run_dir)
    if args.specialize:
        scenario = build_scenario(args.specialize, cfg.eval)
        trainer.fixed_options = EnvOptions(
            fixed_config=scenario.config, fixed_payload=scenario.payload
        )
    final = run_curriculum(trainer)
    print(f"training complete: {final}")
    return 0


def _cmd_eval(args) -> int:
    cfg = load_config(args.config)
    if args.workers is not None:
        cfg.eval.n_workers = args.workers
    params, norm, _ = _load_policy(args.ckpt)
    grid = cfg.eval.perturbation_grid if args.sweep else None
    report = run_eval(
        cfg,
        params,
        norm,
        args.scenario,
        episodes=args.episodes,
        seed=args.seed,
        perturbation_grid=grid,
        checkpoint_name=args.ckpt,
    )
    sys.stdout.write(report.to_tsv())
    if args.out:
        report.write(args.out)
        print(f"report files written to {args.out}")
    return 0


def _cmd_replay(args) -> int:
    if not Path(args.log).exists():
        raise FileNotFoundError(f"log not found: {args.log}")
    replay_log(args.log, every=args.every)
    return 0


def _cmd_teleop(args) -> int:
    import uvicorn

    from .teleop_server import TeleopSession, build_app

    cfg = load_config(args.config)
    params, norm, _ = _load_policy(args.ckpt)
    session = TeleopSession.create(cfg, params, norm, scenario_name=args.scenario, seed=args.seed)
    static_dir = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    app = build_app(session, static_dir=static_dir if static_dir.is_dir() else None)
    port = args.port or int(os.environ.get("MULTIBIPED_PORT", cfg.teleop.port))
    host = args.host or cfg.teleop.host
    print(f"teleop serving on ws://{host}:{port}/ws (ui at http://{host}:{port}/)")
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "train":
            return _cmd_train(args)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "replay":
            return _cmd_replay(args)
        if args.command == "teleop":
            return _cmd_teleop(args)
    except (FileNotFoundError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
