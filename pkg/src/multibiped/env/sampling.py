"""Training-time attachment configuration sampling.

One robot sits at the control point; two robots span a bar with the control
point within a meter of one end; three robots form a triangle with the
control point uniform inside. Rejection sampling keeps every polar radius
within its range.
"""
from __future__ import annotations

import numpy as np

from ..config import CurriculumParams
from ..sim.bodies import AttachmentConfig
from ..so3 import wrap_angle
from .curriculum import CurriculumStage, sample_bar_mass


def _polar(p: np.ndarray) -> tuple[float, float]:
    r = float(np.hypot(p[0], p[1]))
    theta = float(np.arctan2(p[1], p[0])) if r > 1e-12 else 0.0
    return r, theta


def _two_robot_points(rng: np.random.Generator, params: CurriculumParams) -> np.ndarray:
    length = float(rng.uniform(*params.two_robot_bar_length))
    d = float(rng.uniform(0.0, min(params.two_robot_cp_max_dist, length)))
    azimuth = float(rng.uniform(-np.pi, np.pi))
    u = np.array([np.cos(azimuth), np.sin(azimuth)])
    near = -d * u
    far = (length - d) * u
    if rng.random() < 0.5:
        near, far = far, near
    return np.stack([near, far])


def _triangle_points(rng: np.random.Generator, params: CurriculumParams) -> np.ndarray | None:
    lo, hi = params.triangle_vertex_radius
    verts = []
    for _ in range(3):
        r = float(rng.uniform(lo, hi))
        a = float(rng.uniform(-np.pi, np.pi))
        verts.append([r * np.cos(a), r * np.sin(a)])
    verts = np.array(verts)
    sides = [np.linalg.norm(verts[i] - verts[(i + 1) % 3]) for i in range(3)]
    if min(sides) < params.triangle_min_side:
        return None
    area = 0.5 * abs(
        (verts[1, 0] - verts[0, 0]) * (verts[2, 1] - verts[0, 1])
        - (verts[2, 0] - verts[0, 0]) * (verts[1, 1] - verts[0, 1])
    )
    if area < params.triangle_min_area:
        return None
    # uniform point inside the triangle, then shift it to the origin
    u, v = rng.random(), rng.random()
    if u + v > 1.0:
        u, v = 1.0 - u, 1.0 - v
    cp = verts[0] + u * (verts[1] - verts[0]) + v * (verts[2] - verts[0])
    return verts - cp


def sample_configuration(
    stage: CurriculumStage,
    rng: np.random.Generator,
    params: CurriculumParams | None = None,
    n_robots: int | None = None,
) -> AttachmentConfig:
    """Draw an attachment layout for the stage; N is drawn uniformly if free."""
    params = params or CurriculumParams()
    n = n_robots if n_robots is not None else int(rng.choice(stage.allowed_n_robots))
    if n not in stage.allowed_n_robots:
        raise ValueError(f"stage {stage.stage} does not allow n_robots={n}")
    bar_mass = sample_bar_mass(stage, n, rng, params)

    if n == 1:
        return AttachmentConfig(n_robots=1, attachments=[(0.0, 0.0)], bar_mass=bar_mass)

    for _ in range(1000):
        pts = _two_robot_points(rng, params) if n == 2 else _triangle_points(rng, params)
        if pts is None:
            continue
        polar = [_polar(p) for p in pts]
        if all(r <= params.attachment_radius_max for r, _ in polar):
            if n == 2 and min(r for r, _ in polar) > params.two_robot_cp_max_dist:
                continue
            sep_ok = all(
                np.linalg.norm(pts[a] - pts[b]) >= 0.05
                for a in range(n)
                for b in range(a + 1, n)
            )
            if not sep_ok:
                continue
            attachments = [(r, wrap_angle(t)) for r, t in polar]
            return AttachmentConfig(n_robots=n, attachments=attachments, bar_mass=bar_mass)
    raise RuntimeError("configuration sampling failed to satisfy ranges after 1000 draws")
