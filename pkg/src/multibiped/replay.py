"""Top-down ASCII rendering of logged episodes."""
from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from .sim.trajlog import TrajectoryLog, read_trajectory


def render_frame(
    log: TrajectoryLog, step_idx: int, width: int = 61, height: int = 25, scale: float | None = None
) -> str:
    """One text frame: carrier control point (C), robots (digits), feet (.)."""
    row = log.data[step_idx]

    def col(name: str) -> float:
        return row[log.columns.index(name)]

    cx, cy = col("cp_x"), col("cp_y")
    # feet first, robots, then the control point so C always stays visible
    points = []
    for r in range(log.n_robots):
        for side in ("l", "r"):
            points.append((".", col(f"r{r}_foot_{side}x"), col(f"r{r}_foot_{side}y")))
    for r in range(log.n_robots):
        points.append((str(r), col(f"r{r}_x"), col(f"r{r}_y")))
    points.append(("C", cx, cy))

    if scale is None:
        spread = max(max(abs(p[1] - cx) for p in points), max(abs(p[2] - cy) for p in points), 2.0)
        scale = (width // 2 - 2) / spread

    grid = [[" "] * width for _ in range(height)]
    for ch, x, y in points:
        gx = int(round(width / 2 + (x - cx) * scale))
        gy = int(round(height / 2 - (y - cy) * scale * 0.5))  # terminal cells are tall
        if 0 <= gx < width and 0 <= gy < height:
            grid[gy][gx] = ch

    header = (
        f"t={col('time'):6.2f}s  cp=({cx:+.2f},{cy:+.2f},{col('cp_z'):.2f})  "
        f"yaw={np.degrees(col('c_yaw')):+.1f}deg  "
        f"cmd=({col('cmd_vx'):+.2f},{col('cmd_vy'):+.2f},{col('cmd_omega'):+.2f},{col('cmd_h'):.2f})"
    )
    border = "+" + "-" * width + "+"
    body = "\n".join("|" + "".join(line) + "|" for line in grid)
    return f"{header}\n{border}\n{body}\n{border}"


def replay_log(path: str | Path, every: int = 25, out=None) -> int:
    """Render a logged episode as text frames; returns the frame count."""
    out = out or sys.stdout
    log = read_trajectory(path)
    if log.data.shape[0] == 0:
        print("(empty trajectory)", file=out)
        return 0
    count = 0
    for idx in range(0, log.data.shape[0], every):
        print(render_frame(log, idx), file=out)
        print(file=out)
        count += 1
    return count
