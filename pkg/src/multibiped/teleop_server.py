"""Live teleoperation service.

One real-time sim loop per session steps the scene at the policy rate,
applies the latest valid command (last-writer-wins by sequence number,
clamped to the command ranges), runs per-robot policy inference, and fans
frames out to websocket subscribers without ever blocking on them. The
browser bundle is served statically next to the `/ws` endpoint.
"""
from __future__ import annotations

import asyncio
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .config import RunConfig
from .env.commands import Command
from .env.mdp import EnvOptions, TransportEnv
from .env.observations import observe
from .env.termination import TerminationReason
from .evaluation.scenarios import build_scenario
from .nn.normalize import RunningNorm
from .nn.policy import HiddenState, policy_step_np
from .so3 import quat_yaw

PROTOCOL_VERSION = 1


@dataclass
class TeleopSession:
    """Live sim + frozen policy + the broadcast command state."""

    cfg: RunConfig
    params: dict[str, np.ndarray]
    norm: RunningNorm
    env: TransportEnv
    command: Command
    command_seq: int = -1
    episode: int = 0
    frames_sent: int = 0
    dropped_messages: int = 0
    hiddens: list[HiddenState] = field(default_factory=list)
    _last_breakdown: dict[str, float] = field(default_factory=dict)
    _terminated_reason: str = "none"

    @staticmethod
    def create(
        cfg: RunConfig,
        params: dict[str, np.ndarray],
        norm: RunningNorm,
        scenario_name: str | None = None,
        seed: int = 0,
    ) -> "TeleopSession":
        scenario = build_scenario(scenario_name or cfg.teleop.scenario, cfg.eval, cfg.teleop.payload_mass)
        command = Command(0.0, 0.0, 0.0, cfg.eval.command_height, duration=1 << 30)
        options = EnvOptions(
            fixed_config=scenario.config,
            fixed_payload=scenario.payload,
            fixed_command=command,
            timeout_steps=1 << 30,  # teleop sessions run until interrupted
            randomize=False,
            random_assembly_yaw=False,
        )
        env = TransportEnv(cfg, seed=seed, stage=None, options=options)
        session = TeleopSession(cfg=cfg, params=params, norm=norm, env=env, command=command)
        session.reset_episode()
        return session

    def reset_episode(self) -> None:
        self.env.options.fixed_command = self.command
        self.env.reset()
        self.hiddens = [HiddenState.zeros() for _ in range(self.env.n_robots)]
        self.episode += 1
        self._terminated_reason = "none"

    def ingest(self, messages: list[dict[str, Any]]) -> None:
        """Apply command messages; highest sequence number wins, bad ones drop."""
        best = None
        for msg in messages:
            try:
                if msg.get("type") != "command":
                    raise ValueError("not a command")
                seq = int(msg["seq"])
                cmd = Command(
                    vx=float(msg["vx"]),
                    vy=float(msg["vy"]),
                    omega=float(msg["omega"]),
                    height=float(msg["h"]),
                    duration=1 << 30,
                )
            except (KeyError, TypeError, ValueError):
                self.dropped_messages += 1
                continue
            if seq > self.command_seq and (best is None or seq > best[0]):
                best = (seq, cmd)
        if best is not None:
            self.command_seq = best[0]
            self.command = best[1].clamped(self.cfg.commands)

    def tick(self, messages: list[dict[str, Any]] | None = None) -> dict[str, Any]:
        """Ingest messages, advance one policy step, and return the frame."""
        if messages:
            self.ingest(messages)
        env = self.env
        env.options.fixed_command = self.command
        env.command = self.command  # broadcast to every robot this step

        actions = np.zeros((env.n_robots, 10))
        for r in range(env.n_robots):
            o_norm = self.norm.normalize(observe(env.sim, r, self.command, noise_rng=None))
            mean, _, self.hiddens[r] = policy_step_np(self.params, o_norm, self.hiddens[r])
            actions[r] = mean

        obs, rewards, reason = env.step(actions)
        frame = self._frame(rewards, reason)
        if reason is not TerminationReason.NONE:
            self._terminated_reason = reason.value
            self.reset_episode()
        self.frames_sent += 1
        return frame

    def _frame(self, rewards, reason) -> dict[str, Any]:
        sim = self.env.sim
        cp = sim.control_point_position()
        cpv = sim.control_point_velocity()
        robots = []
        for r in range(sim.n_robots):
            b = sim.robot(r)
            legs = sim.legs[r]
            robots.append(
                {
                    "x": round(float(b.position[0]), 4),
                    "y": round(float(b.position[1]), 4),
                    "z": round(float(b.position[2]), 4),
                    "yaw": round(float(quat_yaw(b.orientation)), 4),
                    "feet": [
                        {
                            "x": round(float(legs.foot_pos[f][0]), 4),
                            "y": round(float(legs.foot_pos[f][1]), 4),
                            "stance": bool(legs.in_stance[f]),
                        }
                        for f in range(2)
                    ],
                }
            )
        cmd = {
            "seq": self.command_seq,
            "vx": self.command.vx,
            "vy": self.command.vy,
            "omega": self.command.omega,
            "h": self.command.height,
        }
        total = float(np.mean([rb.total for rb in rewards])) if rewards else 0.0
        return {
            "type": "frame",
            "v": PROTOCOL_VERSION,
            "t": round(sim.time, 4),
            "episode": self.episode,
            "carrier": {
                "x": round(float(cp[0]), 4),
                "y": round(float(cp[1]), 4),
                "z": round(float(cp[2]), 4),
                "yaw": round(float(sim.carrier_yaw()), 4),
                "vx": round(float(cpv[0]), 4),
                "vy": round(float(cpv[1]), 4),
                "extent": [[round(float(x), 3), round(float(y), 3)] for x, y in sim.config.carrier_extent],
            },
            "robots": robots,
            "command": cmd,
            "reward": round(total, 4),
            "reward_terms": {k: round(v, 4) for k, v in (rewards[0].as_dict().items() if rewards else [])},
            "terminated": reason is not TerminationReason.NONE,
            "reason": reason.value,
            "dropped_messages": self.dropped_messages,
        }


def build_app(session: TeleopSession, static_dir: str | Path | None = None) -> FastAPI:
    """FastAPI app: /ws for frames+commands, static files for the UI."""
    app = FastAPI(title="multibiped teleop")
    subscribers: set[asyncio.Queue] = set()
    inbox: list[dict[str, Any]] = []

    @app.get("/health")
    async def health() -> JSONResponse:
        return JSONResponse(
            {
                "protocol": PROTOCOL_VERSION,
                "episode": session.episode,
                "frames": session.frames_sent,
                "robots": session.env.n_robots,
            }
        )

    async def sim_loop() -> None:
        dt = 1.0 / session.cfg.teleop.frame_rate_hz
        next_tick = time.monotonic()
        while True:
            messages, inbox[:] = inbox[:], []
            frame = await asyncio.to_thread(session.tick, messages)
            payload = json.dumps(frame)
            for q in list(subscribers):
                if q.qsize() < 4:  # slow consumers drop frames, never block the loop
                    q.put_nowait(payload)
            next_tick += dt
            delay = next_tick - time.monotonic()
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                next_tick = time.monotonic()

    @app.on_event("startup")
    async def _start() -> None:
        app.state.sim_task = asyncio.create_task(sim_loop())

    @app.on_event("shutdown")
    async def _stop() -> None:
        app.state.sim_task.cancel()

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        await ws.send_text(json.dumps({"type": "hello", "v": PROTOCOL_VERSION, "robots": session.env.n_robots}))
        queue: asyncio.Queue = asyncio.Queue()
        subscribers.add(queue)

        async def pump_out() -> None:
            while True:
                await ws.send_text(await queue.get())

        out_task = asyncio.create_task(pump_out())
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    inbox.append(json.loads(raw))
                except json.JSONDecodeError:
                    session.dropped_messages += 1
        except WebSocketDisconnect:
            pass
        finally:
            subscribers.discard(queue)
            out_task.cancel()

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    return app
