"""Rigid bodies, attachment geometry, and composite carrier assembly."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..so3 import quat_identity, quat_normalize, quat_to_matrix


class ConfigurationError(ValueError):
    """Raised when a scene description violates its geometric contract."""


@dataclass
class RigidBodyState:
    """6-DOF state of one body; position is the center of mass in world."""

    position: np.ndarray
    orientation: np.ndarray  # unit quaternion (w, x, y, z)
    linear_velocity: np.ndarray
    angular_velocity: np.ndarray  # world frame
    mass: float
    inertia: np.ndarray  # 3x3 body-frame tensor about the CoM
    kinematic: bool = False  # anchored body: infinite mass, never integrated

    def __post_init__(self) -> None:
        self.position = np.asarray(self.position, dtype=float)
        self.orientation = quat_normalize(np.asarray(self.orientation, dtype=float))
        self.linear_velocity = np.asarray(self.linear_velocity, dtype=float)
        self.angular_velocity = np.asarray(self.angular_velocity, dtype=float)
        self.inertia = np.asarray(self.inertia, dtype=float)
        self.validate()

    def validate(self) -> None:
        if self.mass <= 0.0:
            raise ConfigurationError(f"body mass must be positive, got {self.mass}")
        if not np.allclose(self.inertia, self.inertia.T, atol=1e-12):
            raise ConfigurationError("inertia tensor must be symmetric")
        eigvals = np.linalg.eigvalsh(self.inertia)
        if np.any(eigvals <= 0.0):
            raise ConfigurationError("inertia tensor must be positive definite")

    @property
    def rotation(self) -> np.ndarray:
        return quat_to_matrix(self.orientation)

    def world_inertia(self) -> np.ndarray:
        r = self.rotation
        return r @ self.inertia @ r.T

    def inv_mass(self) -> float:
        return 0.0 if self.kinematic else 1.0 / self.mass

    def inv_world_inertia(self) -> np.ndarray:
        if self.kinematic:
            return np.zeros((3, 3))
        return np.linalg.inv(self.world_inertia())

    def copy(self) -> "RigidBodyState":
        return RigidBodyState(
            position=self.position.copy(),
            orientation=self.orientation.copy(),
            linear_velocity=self.linear_velocity.copy(),
            angular_velocity=self.angular_velocity.copy(),
            mass=self.mass,
            inertia=self.inertia.copy(),
            kinematic=self.kinematic,
        )


def point_in_polygon(point: np.ndarray, polygon: np.ndarray, tol: float = 1e-9) -> bool:
    """Ray-cast point-in-polygon test; boundary points count as inside."""
    x, y = float(point[0]), float(point[1])
    n = len(polygon)
    inside = False
    for i in range(n):
        x1, y1 = polygon[i]
        x2, y2 = polygon[(i + 1) % n]
        # on-segment check
        d = np.hypot(x2 - x1, y2 - y1)
        if d > 0:
            t = ((x - x1) * (x2 - x1) + (y - y1) * (y2 - y1)) / (d * d)
            t = min(1.0, max(0.0, t))
            px, py = x1 + t * (x2 - x1), y1 + t * (y2 - y1)
            if np.hypot(x - px, y - py) <= tol:
                return True
        if (y1 > y) != (y2 > y):
            xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < xint:
                inside = not inside
    return inside


@dataclass
class AttachmentConfig:
    """Ball-joint attachment layout on the carrier, in control-point polar form."""

    n_robots: int
    attachments: list[tuple[float, float]]  # (R_i, Theta_i)
    bar_mass: float = 0.0
    carrier_extent: np.ndarray | None = None  # planar polygon vertices, CCW

    def __post_init__(self) -> None:
        if self.n_robots < 1:
            raise ConfigurationError(f"need at least one robot, got n_robots={self.n_robots}")
        if len(self.attachments) != self.n_robots:
            raise ConfigurationError(
                f"{self.n_robots} robots but {len(self.attachments)} attachment points"
            )
        if self.bar_mass < 0.0:
            raise ConfigurationError("bar mass must be nonnegative")
        for r, theta in self.attachments:
            if not (0.0 <= r <= 3.5):
                raise ConfigurationError(f"attachment radius {r} outside [0, 3.5] m")
            if not (-np.pi - 1e-9 <= theta <= np.pi + 1e-9):
                raise ConfigurationError(f"attachment angle {theta} outside [-pi, pi]")
        if self.carrier_extent is None:
            self.carrier_extent = self._default_extent()
        self.carrier_extent = np.asarray(self.carrier_extent, dtype=float)
        for i, p in enumerate(self.points()):
            if not point_in_polygon(p, self.carrier_extent, tol=1e-6):
                raise ConfigurationError(f"attachment {i} at {p} lies outside the carrier extent")
        if not point_in_polygon(np.zeros(2), self.carrier_extent, tol=1e-6):
            raise ConfigurationError("carrier control point lies outside the carrier extent")

    def points(self) -> np.ndarray:
        """Attachment points in the carrier frame (control point at origin)."""
        return np.array(
            [[r * np.cos(th), r * np.sin(th)] for r, th in self.attachments]
        ).reshape(self.n_robots, 2)

    def _default_extent(self) -> np.ndarray:
        pts = self.points()
        pad = 0.35
        lo = np.minimum(pts.min(axis=0), [0.0, 0.0]) - pad
        hi = np.maximum(pts.max(axis=0), [0.0, 0.0]) + pad
        return np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])


@dataclass
class PayloadSpec:
    """Payload carried on the plate: fixed point masses and an optional free slider."""

    fixed_masses: list[tuple[float, float, float]] = field(default_factory=list)  # (kg, x, y)
    slider_mass: float = 0.0
    slider_bounds: tuple[float, float, float, float] | None = None  # xmin, xmax, ymin, ymax
    slider_friction: float = 0.2
    slider_restitution: float = 0.3

    @property
    def fixed_total(self) -> float:
        return sum(m for m, _, _ in self.fixed_masses)


def _segment_inertia(mass: float, p0: np.ndarray, p1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """CoM and planar inertia contribution of a uniform thin rod (about origin)."""
    com = 0.5 * (p0 + p1)
    d = p1 - p0
    # second moments of a rod about the origin via its own center + parallel axis
    exx = mass * (d[0] ** 2 / 12.0 + com[0] ** 2)
    eyy = mass * (d[1] ** 2 / 12.0 + com[1] ** 2)
    exy = mass * (d[0] * d[1] / 12.0 + com[0] * com[1])
    return com, np.array([[exx, exy], [exy, eyy]])


def carrier_segments(config: AttachmentConfig) -> list[tuple[np.ndarray, np.ndarray]]:
    """Structural bar segments of the carrier in carrier-frame coordinates."""
    pts = config.points()
    if config.n_robots == 1:
        return []
    if config.n_robots == 2:
        return [(pts[0], pts[1])]
    # ring of bars through the attachment points (triangle for N=3)
    order = np.argsort([np.arctan2(p[1], p[0]) for p in pts])
    ring = [pts[i] for i in order]
    return [(ring[i], ring[(i + 1) % len(ring)]) for i in range(len(ring))]


def build_carrier_body(
    config: AttachmentConfig,
    payload: PayloadSpec,
    sim_params,
    mass_multiplier: float = 1.0,
    com_offset_fraction: float = 0.0,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Compose plate/bars/hub/fixed payload into (mass, com_xy, body inertia).

    The CoM is returned in the carrier frame (origin = control point); the
    inertia tensor is about that CoM with a floor on the diagonal so thin-bar
    carriers keep a finite roll inertia.
    """
    parts: list[tuple[float, np.ndarray, np.ndarray]] = []  # (mass, com, E) E = 2nd moments about origin

    def add_point(mass: float, xy: np.ndarray) -> None:
        xy = np.asarray(xy, dtype=float)
        e = mass * np.array(
            [[xy[0] ** 2, xy[0] * xy[1]], [xy[0] * xy[1], xy[1] ** 2]]
        )
        parts.append((mass, xy, e))

    segs = carrier_segments(config)
    if config.n_robots == 1:
        add_point(sim_params.single_carrier_mass, np.zeros(2))
    else:
        total_len = sum(np.linalg.norm(p1 - p0) for p0, p1 in segs)
        for p0, p1 in segs:
            seg_len = np.linalg.norm(p1 - p0)
            seg_mass = sim_params.carrier_bar_density * seg_len
            seg_mass += config.bar_mass * (seg_len / total_len if total_len > 0 else 0.0)
            com, e = _segment_inertia(seg_mass, p0, p1)
            parts.append((seg_mass, com, e))
        add_point(sim_params.carrier_hub_mass, np.zeros(2))
    if config.n_robots == 1 and config.bar_mass > 0.0:
        add_point(config.bar_mass, np.zeros(2))
    for m, x, y in payload.fixed_masses:
        add_point(m, np.array([x, y]))

    total_mass = sum(m for m, _, _ in parts) * mass_multiplier
    com = sum(m * c for m, c, _ in parts) / sum(m for m, _, _ in parts)
    extent_scale = float(np.max(np.abs(config.carrier_extent)))
    com = com + com_offset_fraction * extent_scale

    e_total = sum(e for _, _, e in parts) * mass_multiplier
    # shift second moments to the CoM
    e_com = e_total - total_mass * np.array(
        [[com[0] ** 2, com[0] * com[1]], [com[0] * com[1], com[1] ** 2]]
    )
    ixx = e_com[1, 1]
    iyy = e_com[0, 0]
    izz = e_com[0, 0] + e_com[1, 1]
    ixy = -e_com[0, 1]
    inertia = np.array([[ixx, ixy, 0.0], [ixy, iyy, 0.0], [0.0, 0.0, izz]])
    # thin-bar carriers are singular about the bar axis: floor the eigenvalues
    # to a finite cross-section inertia
    vals, vecs = np.linalg.eigh(inertia)
    vals = np.maximum(vals, sim_params.min_carrier_inertia)
    inertia = vecs @ np.diag(vals) @ vecs.T
    inertia = 0.5 * (inertia + inertia.T)
    return float(total_mass), com, inertia


def static_load_shares(
    points: np.ndarray, com: np.ndarray, total_weight: float
) -> np.ndarray:
    """Minimum-norm vertical load split of the carrier weight over attachments.

    Solves sum(w) = W, sum(w * p) = W * com in the least-squares sense so
    symmetric layouts carry the plate exactly and lopsided ones get the best
    static approximation (the policy corrects the remainder).
    """
    n = len(points)
    a = np.vstack([np.ones(n), points[:, 0], points[:, 1]])
    b = np.array([total_weight, total_weight * com[0], total_weight * com[1]])
    w, *_ = np.linalg.lstsq(a, b, rcond=None)
    return w
