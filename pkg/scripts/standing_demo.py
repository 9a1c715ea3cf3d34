#!/usr/bin/env python3
"""Record a short zero-action standing episode and render it as text frames.

Handy smoke test of the sim + log + replay pipeline without any training:

    python3 scripts/standing_demo.py --robots 3 --steps 200
"""
import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from multibiped.env.commands import Command
from multibiped.replay import replay_log
from multibiped.sim import AttachmentConfig, build_system, sim_step
from multibiped.sim.trajlog import TrajectoryWriter

LAYOUTS = {
    1: [(0.0, 0.0)],
    2: [(1.0, 0.0), (1.0, np.pi)],
    3: [(1.5, 0.0), (1.2, 2.2), (1.4, -2.0)],
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--robots", type=int, default=3, choices=(1, 2, 3))
    parser.add_argument("--steps", type=int, default=200)
    parser.add_argument("--out", type=str, default="standing_demo.tsv")
    args = parser.parse_args()

    sim = build_system(
        AttachmentConfig(args.robots, LAYOUTS[args.robots]), initial_height=0.7
    )
    writer = TrajectoryWriter(n_robots=args.robots)
    command = Command(0.0, 0.0, 0.0, 0.7)
    for _ in range(args.steps):
        sim_step(sim, np.zeros((args.robots, 10)), hold_still=True)
        writer.record(sim, command)
    writer.write(args.out)
    print(f"wrote {args.out} ({args.steps} steps); control point at "
          f"{np.round(sim.control_point_position(), 4)}")
    replay_log(args.out, every=max(1, args.steps // 4))
    return 0


if __name__ == "__main__":
    sys.exit(main())
