"""Ball-joint constraint dynamics via a Lagrange-multiplier (KKT) solve.

Each joint pins a point fixed in the carrier frame to a point fixed in a
robot pelvis frame (3 scalar constraints). The accelerations and constraint
forces solve

    [M  -J^T] [a     ]   [f_ext]
    [J   0  ] [lambda] = [-bias]

with Baumgarte stabilization folded into the bias. lambda is reported as the
force the joint applies to the robot pelvis (so a pelvis hanging from a
static carrier reads lambda_z = +m*g, while robots supporting a carrier read
negative lambda_z of magnitude equal to their share of its weight).

The kernels operate on stacked body arrays and exploit the scene structure
(every joint shares the carrier as parent, each pelvis appears once) so the
500 Hz substep loop stays in vectorized numpy.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..so3 import quat_integrate_batch, quat_to_matrix_batch, skew_batch
from .bodies import RigidBodyState


class SolverError(RuntimeError):
    """Raised when the constraint system is singular or inconsistent."""


def cross3(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """np.cross without its axis-juggling overhead; last axis holds xyz."""
    out = np.empty_like(a) if a.shape == b.shape else np.empty(np.broadcast(a, b).shape)
    out[..., 0] = a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1]
    out[..., 1] = a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2]
    out[..., 2] = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    return out


@dataclass
class BallJoint:
    carrier_body: int
    robot_body: int
    anchor_carrier: np.ndarray  # carrier body frame, relative to its CoM
    anchor_robot: np.ndarray  # robot body frame, relative to its CoM

    def __post_init__(self) -> None:
        self.anchor_carrier = np.asarray(self.anchor_carrier, dtype=float)
        self.anchor_robot = np.asarray(self.anchor_robot, dtype=float)


@dataclass
class StackedBodies:
    """Columnar mirror of a body list for the inner integration loop."""

    pos: np.ndarray  # (nb, 3)
    quat: np.ndarray  # (nb, 4)
    vel: np.ndarray  # (nb, 3)
    omg: np.ndarray  # (nb, 3)
    mass: np.ndarray  # (nb,)
    invm: np.ndarray  # (nb,), zero for kinematic bodies
    inertia: np.ndarray  # (nb, 3, 3) body frame
    inv_inertia: np.ndarray  # (nb, 3, 3) body frame, zero for kinematic
    kinematic: np.ndarray  # (nb,) bool
    R: np.ndarray | None = None  # (nb, 3, 3)
    invIw: np.ndarray | None = None  # (nb, 3, 3)

    def refresh_rotations(self) -> None:
        self.R = quat_to_matrix_batch(self.quat)
        self.invIw = np.einsum("nij,njk,nlk->nil", self.R, self.inv_inertia, self.R)

    def gyro_torque(self) -> np.ndarray:
        """-omega x (I_w omega) per body."""
        iw_omega = np.einsum(
            "nij,nj->ni", self.R, np.einsum("nij,nj->ni", self.inertia, np.einsum("nji,nj->ni", self.R, self.omg))
        )
        return -cross3(self.omg, iw_omega)

    @property
    def n_bodies(self) -> int:
        return self.pos.shape[0]


@dataclass
class JointLayout:
    """Constant per-scene joint indexing and body-frame anchors.

    The fast path requires all joints to share one parent body and each
    child body to appear at most once; `build_system` only ever produces
    that shape.
    """

    carrier_idx: np.ndarray  # (nj,)
    robot_idx: np.ndarray  # (nj,)
    anchors_carrier: np.ndarray  # (nj, 3)
    anchors_robot: np.ndarray  # (nj, 3)

    def __post_init__(self) -> None:
        nj = self.carrier_idx.shape[0]
        if nj:
            if not np.all(self.carrier_idx == self.carrier_idx[0]):
                raise SolverError("joints must share a single carrier body")
            if len(set(self.robot_idx.tolist())) != nj:
                raise SolverError("each robot body may carry at most one ball joint")

    @property
    def n_joints(self) -> int:
        return self.carrier_idx.shape[0]


def stack_bodies(bodies: list[RigidBodyState]) -> StackedBodies:
    kin = np.array([b.kinematic for b in bodies])
    inertia = np.stack([b.inertia for b in bodies])
    inv_inertia = np.stack(
        [np.zeros((3, 3)) if b.kinematic else np.linalg.inv(b.inertia) for b in bodies]
    )
    st = StackedBodies(
        pos=np.stack([b.position for b in bodies]).astype(float),
        quat=np.stack([b.orientation for b in bodies]).astype(float),
        vel=np.stack([b.linear_velocity for b in bodies]).astype(float),
        omg=np.stack([b.angular_velocity for b in bodies]).astype(float),
        mass=np.array([b.mass for b in bodies], dtype=float),
        invm=np.array([0.0 if b.kinematic else 1.0 / b.mass for b in bodies]),
        inertia=inertia,
        inv_inertia=inv_inertia,
        kinematic=kin,
    )
    st.refresh_rotations()
    return st


def scatter_bodies(st: StackedBodies, bodies: list[RigidBodyState]) -> None:
    for i, b in enumerate(bodies):
        b.position = st.pos[i].copy()
        b.orientation = st.quat[i].copy()
        b.linear_velocity = st.vel[i].copy()
        b.angular_velocity = st.omg[i].copy()


def joint_layout(joints: list[BallJoint]) -> JointLayout:
    return JointLayout(
        carrier_idx=np.array([j.carrier_body for j in joints], dtype=int),
        robot_idx=np.array([j.robot_body for j in joints], dtype=int),
        anchors_carrier=np.stack([j.anchor_carrier for j in joints]) if joints else np.zeros((0, 3)),
        anchors_robot=np.stack([j.anchor_robot for j in joints]) if joints else np.zeros((0, 3)),
    )


@dataclass
class _Assembled:
    ac: np.ndarray  # (nj, 3) world carrier anchors relative carrier CoM
    ar: np.ndarray  # (nj, 3) world robot anchors relative robot CoM
    sc: np.ndarray  # (nj, 3, 3)
    sr: np.ndarray  # (nj, 3, 3)
    a_mat: np.ndarray  # (3nj, 3nj) Schur complement J M^-1 J^T
    cerr: np.ndarray  # (nj, 3)
    cdot: np.ndarray  # (nj, 3)
    jdotv: np.ndarray  # (nj, 3)


def _assemble(st: StackedBodies, lay: JointLayout) -> _Assembled:
    ci, ri = lay.carrier_idx, lay.robot_idx
    c0 = int(ci[0])
    ac = np.einsum("nij,nj->ni", st.R[ci], lay.anchors_carrier)
    ar = np.einsum("nij,nj->ni", st.R[ri], lay.anchors_robot)
    sc = skew_batch(ac)
    sr = skew_batch(ar)

    nj = lay.n_joints
    invm_c = st.invm[c0]
    inv_ic = st.invIw[c0]
    # carrier couples every joint pair: invm_c*I + Sc_j invI_c Sc_k^T
    blocks = np.einsum("jab,bc,kdc->jkad", sc, inv_ic, sc)
    eye = np.eye(3)
    blocks += invm_c * eye[None, None]
    # robots only touch their own joint: invm_r*I + Sr_j invI_r Sr_j^T
    diag = np.einsum("jab,jbc,jdc->jad", sr, st.invIw[ri], sr)
    diag += st.invm[ri][:, None, None] * eye[None]
    blocks[np.arange(nj), np.arange(nj)] += diag
    a_mat = blocks.transpose(0, 2, 1, 3).reshape(3 * nj, 3 * nj)

    cerr = (st.pos[ri] + ar) - (st.pos[ci] + ac)
    wr, wc = st.omg[ri], st.omg[ci]
    cdot = st.vel[ri] + cross3(wr, ar) - st.vel[ci] - cross3(wc, ac)
    jdotv = cross3(wr, cross3(wr, ar)) - cross3(wc, cross3(wc, ac))
    return _Assembled(ac=ac, ar=ar, sc=sc, sr=sr, a_mat=a_mat, cerr=cerr, cdot=cdot, jdotv=jdotv)


def _jminv_f(st: StackedBodies, lay: JointLayout, asm: _Assembled, f: np.ndarray) -> np.ndarray:
    """J M^-1 f as (nj, 3) for stacked wrenches f (nb, 6)."""
    ci, ri = lay.carrier_idx, lay.robot_idx
    c0 = int(ci[0])
    minv_f_lin = f[:, :3] * st.invm[:, None]
    minv_f_ang = np.einsum("nij,nj->ni", st.invIw, f[:, 3:])
    out = minv_f_lin[ri] - cross3(asm.ar, minv_f_ang[ri])  # (+I, -Sr) robot blocks
    out += -minv_f_lin[c0] + cross3(asm.ac, minv_f_ang[c0])  # (-I, +Sc) carrier blocks
    return out


def _jt_lambda(st: StackedBodies, lay: JointLayout, asm: _Assembled, lam: np.ndarray) -> np.ndarray:
    """J^T lambda scattered onto bodies as wrenches (nb, 6)."""
    ci, ri = lay.carrier_idx, lay.robot_idx
    c0 = int(ci[0])
    out = np.zeros((st.n_bodies, 6))
    out[ri, :3] += lam
    out[ri, 3:] += cross3(asm.ar, lam)  # (-Sr)^T lam = ar x lam
    out[c0, :3] -= lam.sum(axis=0)
    out[c0, 3:] -= cross3(asm.ac, lam).sum(axis=0)  # (Sc)^T lam = -(ac x lam)
    return out


def _apply_minv(st: StackedBodies, f6: np.ndarray) -> np.ndarray:
    out = np.empty_like(f6)
    out[:, :3] = f6[:, :3] * st.invm[:, None]
    out[:, 3:] = np.einsum("nij,nj->ni", st.invIw, f6[:, 3:])
    return out


def kkt_accelerations(
    st: StackedBodies,
    lay: JointLayout,
    wrenches: np.ndarray,
    alpha: float = 0.0,
    beta: float = 0.0,
    residual_tol: float = 1e-8,
) -> tuple[np.ndarray, np.ndarray]:
    """Accelerations (nb, 6) and joint forces (nj, 3) for stacked bodies."""
    f = np.asarray(wrenches, dtype=float).reshape(st.n_bodies, 6).copy()
    f[st.kinematic] = 0.0

    if lay.n_joints == 0:
        return _apply_minv(st, f), np.zeros((0, 3))

    asm = _assemble(st, lay)
    bias = asm.jdotv + alpha * asm.cdot + beta * asm.cerr
    rhs = -(bias + _jminv_f(st, lay, asm, f)).reshape(-1)
    try:
        lam_flat = np.linalg.solve(asm.a_mat, rhs)
    except np.linalg.LinAlgError as exc:
        raise SolverError(_singular_message(lay)) from exc
    if not np.all(np.isfinite(lam_flat)):
        raise SolverError(_singular_message(lay))
    check = asm.a_mat @ lam_flat - rhs
    if np.max(np.abs(check)) > 1e-6 * max(1.0, float(np.max(np.abs(rhs)))):
        raise SolverError(_singular_message(lay))

    lam = lam_flat.reshape(lay.n_joints, 3)
    accel = _apply_minv(st, f + _jt_lambda(st, lay, asm, lam))
    # residual of the constraint row: J a + bias
    ci, ri = lay.carrier_idx, lay.robot_idx
    c0 = int(ci[0])
    ja = accel[ri, :3] - cross3(asm.ar, accel[ri, 3:]) - accel[c0, :3] + cross3(asm.ac, accel[c0, 3:])
    residual = ja + bias
    if np.max(np.abs(residual)) > residual_tol * max(1.0, float(np.max(np.abs(bias)))):
        raise SolverError(
            f"constraint acceleration residual {np.max(np.abs(residual)):.3e} above tolerance"
        )
    return accel, lam


def integrate_semi_implicit(st: StackedBodies, accel: np.ndarray, dt: float) -> None:
    """Velocity then position update; kinematic bodies stay put."""
    free = ~st.kinematic
    st.vel[free] += accel[free, :3] * dt
    st.omg[free] += accel[free, 3:] * dt
    st.pos[free] += st.vel[free] * dt
    st.quat = quat_integrate_batch(st.quat, np.where(free[:, None], st.omg, 0.0), dt)
    st.refresh_rotations()


def project_constraints(st: StackedBodies, lay: JointLayout, iterations: int = 1) -> None:
    """Mass-weighted projection of positions and velocities onto the manifold.

    One Newton step per iteration; run after integration so the joint gap
    stays at round-off instead of the Baumgarte steady state.
    """
    free = ~st.kinematic
    for _ in range(iterations):
        asm = _assemble(st, lay)
        if np.max(np.abs(asm.cerr)) < 1e-12 and np.max(np.abs(asm.cdot)) < 1e-12:
            return
        rhs = np.stack([-asm.cerr.reshape(-1), -asm.cdot.reshape(-1)], axis=1)
        try:
            lam = np.linalg.solve(asm.a_mat, rhs)
        except np.linalg.LinAlgError as exc:
            raise SolverError(_singular_message(lay)) from exc
        dpos = _apply_minv(st, _jt_lambda(st, lay, asm, lam[:, 0].reshape(-1, 3)))
        dvel = _apply_minv(st, _jt_lambda(st, lay, asm, lam[:, 1].reshape(-1, 3)))
        st.pos[free] += dpos[free, :3]
        st.vel[free] += dvel[free, :3]
        st.omg[free] += dvel[free, 3:]
        st.quat = quat_integrate_batch(st.quat, np.where(free[:, None], dpos[:, 3:], 0.0), 1.0)
        st.refresh_rotations()


def _singular_message(lay: JointLayout) -> str:
    # coincident anchors are the only rank-deficiency source build-time checks allow through
    worst = None
    worst_d = np.inf
    for a in range(lay.n_joints):
        for b in range(a + 1, lay.n_joints):
            d = float(np.linalg.norm(lay.anchors_carrier[a] - lay.anchors_carrier[b]))
            if d < worst_d:
                worst_d = d
                worst = (a, b)
    if worst is not None and worst_d < 0.05:
        return (
            f"singular constraint system: ball joints {worst[0]} and {worst[1]} share "
            f"nearly coincident carrier anchors (separation {worst_d:.4f} m)"
        )
    return "singular constraint system: ball joint Jacobian lost rank"


def joint_anchors_world(bodies: list[RigidBodyState], joint: BallJoint) -> tuple[np.ndarray, np.ndarray]:
    bc = bodies[joint.carrier_body]
    br = bodies[joint.robot_body]
    pc = bc.position + bc.rotation @ joint.anchor_carrier
    pr = br.position + br.rotation @ joint.anchor_robot
    return pc, pr


def joint_position_errors(bodies: list[RigidBodyState], joints: list[BallJoint]) -> np.ndarray:
    """Per-joint constraint position residual (robot anchor minus carrier anchor)."""
    errs = np.zeros((len(joints), 3))
    for k, joint in enumerate(joints):
        pc, pr = joint_anchors_world(bodies, joint)
        errs[k] = pr - pc
    return errs


def solve_constrained_dynamics(
    bodies: list[RigidBodyState],
    joints: list[BallJoint],
    applied_wrenches: np.ndarray,
    alpha: float = 0.0,
    beta: float = 0.0,
    residual_tol: float = 1e-8,
) -> tuple[np.ndarray, np.ndarray]:
    """Body-list front end of the KKT solve.

    applied_wrenches is (n_bodies, 6): world-frame force and torque per body.
    Returns (accelerations (n_bodies, 6), lambdas (n_joints, 3)).
    """
    st = stack_bodies(bodies)
    lay = joint_layout(joints)
    return kkt_accelerations(
        st, lay, applied_wrenches, alpha=alpha, beta=beta, residual_tol=residual_tol
    )
