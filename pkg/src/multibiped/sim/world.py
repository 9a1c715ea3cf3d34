"""Scene assembly and the 50 Hz simulation step.

A scene is one free carrier body plus N pelvis bodies ball-jointed to it.
Each policy step advances 10 physics substeps of 2 ms: legs, gravity,
perturbations and payload coupling feed the constrained dynamics solve,
then semi-implicit Euler integration with quaternion renormalization and an
optional projection pass that keeps the joint gaps at round-off.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..config import SimParams
from ..so3 import (
    quat_align_z,
    quat_from_yaw,
    quat_mul,
    quat_rotate,
    quat_yaw,
)
from .bodies import (
    AttachmentConfig,
    ConfigurationError,
    PayloadSpec,
    RigidBodyState,
    build_carrier_body,
    static_load_shares,
)
from ._kernel import NUMBA_AVAILABLE, run_substeps
from .constraints import (
    BallJoint,
    JointLayout,
    integrate_semi_implicit,
    joint_layout,
    joint_position_errors,
    kkt_accelerations,
    project_constraints,
    scatter_bodies,
    stack_bodies,
)
from .legs import GroundPlane, LegState, init_leg_state, step_legs
from .payload import SliderState, step_slider
from .randomize import RandomizedDynamics


class SimulationFault(RuntimeError):
    """Numerical divergence: some state component went non-finite."""


@dataclass
class PerturbationSpec:
    """A timed external push on the carrier or one pelvis."""

    force: np.ndarray  # world frame, N
    torque_z: float = 0.0  # yaw torque on the carrier, N*m
    target: int | str = "carrier"  # "carrier" or robot index
    start_step: int = 0
    duration_steps: int = 50

    def __post_init__(self) -> None:
        self.force = np.asarray(self.force, dtype=float)

    def active(self, step: int) -> bool:
        return self.start_step <= step < self.start_step + self.duration_steps


@dataclass
class SimState:
    """Mutable ground truth owned by a single worker."""

    bodies: list[RigidBodyState]  # [0] carrier, [1..N] pelvises
    joints: list[BallJoint]
    legs: list[LegState]
    config: AttachmentConfig
    payload: PayloadSpec
    dynamics: RandomizedDynamics
    params: SimParams
    ground: GroundPlane
    cp_offset: np.ndarray  # control point in carrier body frame (relative CoM)
    support_shares: np.ndarray  # per robot static share of carrier weight, N
    slider: SliderState | None = None
    time: float = 0.0
    step_count: int = 0
    joint_forces: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    last_actions: np.ndarray = field(default_factory=lambda: np.zeros((0, 10)))
    prev_actions: np.ndarray = field(default_factory=lambda: np.zeros((0, 10)))
    base_accel: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    touchdown_this_step: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=bool))
    airtime_at_touchdown: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))

    _layout_cache: JointLayout | None = None

    @property
    def n_robots(self) -> int:
        return self.config.n_robots

    def _layout(self) -> JointLayout:
        if self._layout_cache is None:
            self._layout_cache = joint_layout(self.joints)
        return self._layout_cache

    @property
    def carrier(self) -> RigidBodyState:
        return self.bodies[0]

    def robot(self, idx: int) -> RigidBodyState:
        return self.bodies[1 + idx]

    def control_point_position(self) -> np.ndarray:
        return self.carrier.position + quat_rotate(self.carrier.orientation, self.cp_offset)

    def control_point_velocity(self) -> np.ndarray:
        arm = quat_rotate(self.carrier.orientation, self.cp_offset)
        return self.carrier.linear_velocity + np.cross(self.carrier.angular_velocity, arm)

    def carrier_yaw(self) -> float:
        return quat_yaw(self.carrier.orientation)

    def robot_height_above_ground(self, idx: int) -> float:
        p = self.robot(idx).position
        return float(p[2] - self.ground.height(p[0], p[1]))

    def carrier_clearance(self) -> float:
        """Vertical gap between the lowest carrier extent corner and the ground."""
        r = self.carrier.rotation
        lows = []
        for vx, vy in self.config.carrier_extent:
            corner_body = self.cp_offset + np.array([vx, vy, 0.0])
            w = self.carrier.position + r @ corner_body
            lows.append(w[2] - self.ground.height(w[0], w[1]))
        return float(min(lows))

    def joint_world_residuals(self) -> np.ndarray:
        return joint_position_errors(self.bodies, self.joints)

    def total_dynamic_weight(self) -> float:
        g = self.params.gravity
        w = sum(b.mass for b in self.bodies if not b.kinematic) * g
        if self.slider is not None:
            w += self.slider.mass * g
        return w

    def snapshot(self) -> "StepSnapshot":
        return StepSnapshot(
            base_velocities=np.stack([self.robot(i).linear_velocity.copy() for i in range(self.n_robots)]),
            prev_actions=self.last_actions.copy(),
            time=self.time,
        )


@dataclass
class StepSnapshot:
    """What reward evaluation needs from the pre-step state."""

    base_velocities: np.ndarray
    prev_actions: np.ndarray
    time: float


def build_system(
    config: AttachmentConfig,
    payload: PayloadSpec | None = None,
    rand: RandomizedDynamics | None = None,
    params: SimParams | None = None,
    initial_height: float = 0.7,
    initial_yaw: float = 0.0,
) -> SimState:
    """Assemble a scene in static double stance with zero constraint residual."""
    params = params or SimParams()
    payload = payload or PayloadSpec()
    rand = rand or RandomizedDynamics()
    n = config.n_robots

    pts = config.points()
    for a in range(n):
        for b in range(a + 1, n):
            d = float(np.linalg.norm(pts[a] - pts[b]))
            if d < params.min_attachment_separation:
                raise ConfigurationError(
                    f"attachments {a} and {b} are {d:.3f} m apart; "
                    f"minimum separation is {params.min_attachment_separation} m"
                )

    ground = GroundPlane(slope=rand.ground_slope, friction=rand.friction_multiplier)

    carrier_mass, carrier_com_xy, carrier_inertia = build_carrier_body(
        config, payload, params, rand.mass_multiplier, rand.com_offset_fraction
    )
    # body origin is the CoM; the control point sits at -com in plate coords,
    # joint posts joint_post_height above the plate mid-plane
    cp_offset = np.array([-carrier_com_xy[0], -carrier_com_xy[1], 0.0])

    q_carrier = quat_mul(quat_align_z(ground.normal()), quat_from_yaw(initial_yaw))

    # place the carrier so every joint anchor sits initial_height above the
    # local ground; with a slope-aligned plate the anchor plane is parallel
    # to the ground plane, so solving it for joint 0 solves it for all
    anchors_body = []
    for i in range(n):
        p = pts[i] - carrier_com_xy
        anchors_body.append(np.array([p[0], p[1], params.joint_post_height]))

    rot = np.array([quat_rotate(q_carrier, a) for a in anchors_body])
    # choose carrier CoM position: joint 0 world z - ground(joint 0 xy) == initial_height
    pos0 = np.zeros(3)
    j0 = pos0 + rot[0]
    offset_z = initial_height - (j0[2] - ground.height(j0[0], j0[1]))
    carrier_pos = pos0 + np.array([0.0, 0.0, offset_z])

    carrier = RigidBodyState(
        position=carrier_pos,
        orientation=q_carrier,
        linear_velocity=np.zeros(3),
        angular_velocity=np.zeros(3),
        mass=carrier_mass,
        inertia=carrier_inertia,
    )

    pelvis_mass = params.pelvis_mass * rand.mass_multiplier
    pelvis_inertia = np.diag(params.pelvis_inertia_diag)
    pelvis_com_shift = np.array([1.0, 1.0, 0.0]) * rand.com_offset_fraction * params.pelvis_com_scale

    bodies = [carrier]
    joints = []
    legs = []
    q_pelvis = quat_from_yaw(initial_yaw)
    for i in range(n):
        anchor_world = carrier_pos + rot[i]
        pelvis = RigidBodyState(
            position=anchor_world - quat_rotate(q_pelvis, pelvis_com_shift),
            orientation=q_pelvis,
            linear_velocity=np.zeros(3),
            angular_velocity=np.zeros(3),
            mass=pelvis_mass,
            inertia=pelvis_inertia,
        )
        bodies.append(pelvis)
        joints.append(
            BallJoint(
                carrier_body=0,
                robot_body=1 + i,
                anchor_carrier=anchors_body[i],
                anchor_robot=pelvis_com_shift.copy(),
            )
        )
        legs.append(init_leg_state(pelvis.position, initial_yaw, ground, params))

    slider = None
    supported = carrier_mass
    if payload.slider_mass > 0.0:
        if payload.slider_bounds is None:
            raise ConfigurationError("slider payload requires bounds")
        slider = SliderState(
            mass=payload.slider_mass,
            pos=np.zeros(2),
            vel=np.zeros(2),
            bounds=payload.slider_bounds,
            friction=payload.slider_friction,
            restitution=payload.slider_restitution,
        )
        supported += payload.slider_mass

    g = params.gravity
    shares = static_load_shares(pts, carrier_com_xy, supported * g)

    state = SimState(
        bodies=bodies,
        joints=joints,
        legs=legs,
        config=config,
        payload=payload,
        dynamics=rand,
        params=params,
        ground=ground,
        cp_offset=cp_offset,
        support_shares=shares,
        slider=slider,
        joint_forces=np.zeros((n, 3)),
        last_actions=np.zeros((n, 10)),
        prev_actions=np.zeros((n, 10)),
        base_accel=np.zeros((n, 3)),
        touchdown_this_step=np.zeros((n, 2), dtype=bool),
        airtime_at_touchdown=np.zeros((n, 2)),
    )

    residual = np.abs(state.joint_world_residuals())
    if residual.size and residual.max() > 1e-9:
        raise ConfigurationError(f"initial constraint residual {residual.max():.2e} is nonzero")
    return state


def _leg_wrenches(state: SimState, actions: np.ndarray, hold_still: bool) -> np.ndarray:
    """One gait-clock advance per policy step; the wrench is held over substeps."""
    g = state.params.gravity
    wrenches = np.zeros((state.n_robots, 6))
    for r in range(state.n_robots):
        pelvis = state.robot(r)
        support = state.support_shares[r] + pelvis.mass * g
        wrench, _ = step_legs(
            pelvis,
            state.legs[r],
            actions[r],
            hold_still,
            support,
            state.ground,
            state.params,
            state.params.policy_dt,
        )
        wrenches[r] = wrench
        if np.any(state.legs[r].touchdown):
            state.touchdown_this_step[r] |= state.legs[r].touchdown
            for f in range(2):
                if state.legs[r].touchdown[f]:
                    state.airtime_at_touchdown[r, f] = state.legs[r].airtime_at_touchdown[f]
    return wrenches


def sim_step(
    state: SimState,
    actions: np.ndarray,
    perturbations: list[PerturbationSpec] | None = None,
    hold_still: bool = False,
) -> SimState:
    """Advance one 0.02 s policy step (10 physics substeps), in place."""
    params = state.params
    perturbations = perturbations or []
    actions = np.clip(np.asarray(actions, dtype=float).reshape(state.n_robots, 10), -1.0, 1.0)

    dt = params.substep_dt
    alpha = params.baumgarte_alpha_scale / dt
    beta = params.baumgarte_beta_scale / (dt * dt)

    for body in state.bodies:
        if not (
            np.all(np.isfinite(body.position))
            and np.all(np.isfinite(body.linear_velocity))
            and np.all(np.isfinite(body.angular_velocity))
        ):
            raise SimulationFault(
                f"non-finite state entering step {state.step_count}: "
                f"pos={body.position}, vel={body.linear_velocity}"
            )

    prev_base_vel = np.stack(
        [state.robot(i).linear_velocity.copy() for i in range(state.n_robots)]
    )
    state.prev_actions = state.last_actions.copy()
    state.touchdown_this_step[:] = False

    leg_wrenches = _leg_wrenches(state, actions, hold_still)

    push = np.zeros((len(state.bodies), 6))
    for spec in perturbations:
        if spec.active(state.step_count):
            if spec.target == "carrier":
                push[0, :3] += spec.force
                push[0, 5] += spec.torque_z
            else:
                push[1 + int(spec.target), :3] += spec.force

    st = stack_bodies(state.bodies)
    lay = state._layout()
    damping = (
        np.concatenate(
            [[params.carrier_angular_damping], np.full(state.n_robots, params.pelvis_angular_damping)]
        )
        * state.dynamics.damping_multiplier
    )
    const_wrench = np.zeros((st.n_bodies, 6))
    const_wrench[:, 2] = -st.mass * params.gravity
    const_wrench += push
    const_wrench[1:, :] += leg_wrenches

    projection_mode = 0
    if params.constraint_projection and lay.n_joints:
        projection_mode = 2 if params.project_every_substep else 1

    lam = state.joint_forces
    if params.use_compiled_kernel and NUMBA_AVAILABLE:
        lam = np.zeros((lay.n_joints, 3))
        slider = state.slider
        if slider is not None:
            slider_state = np.array([slider.pos[0], slider.pos[1], slider.vel[0], slider.vel[1]])
            slider_args = (
                True,
                slider_state,
                np.array(slider.bounds, dtype=float),
                slider.mass,
                slider.friction * 1.0,
                slider.restitution,
            )
        else:
            slider_state = np.zeros(4)
            slider_args = (False, slider_state, np.zeros(4), 0.0, 0.0, 0.0)
        fault = run_substeps(
            st.pos, st.quat, st.vel, st.omg,
            st.mass, st.invm, st.inertia, st.inv_inertia,
            st.kinematic.astype(np.uint8),
            lay.anchors_carrier, lay.anchors_robot,
            const_wrench, damping,
            *slider_args,
            state.cp_offset, params.gravity,
            params.n_substeps, dt, alpha, beta, projection_mode,
            lam,
        )
        if slider is not None:
            slider.pos[0], slider.pos[1] = slider_state[0], slider_state[1]
            slider.vel[0], slider.vel[1] = slider_state[2], slider_state[3]
        if fault != 0:
            scatter_bodies(st, state.bodies)
            raise SimulationFault(
                f"non-finite state after step {state.step_count}: pos={st.pos}, vel={st.vel}"
            )
    else:
        for sub in range(params.n_substeps):
            wrenches = const_wrench.copy()
            # gyroscopic torque and angular damping at the current state
            wrenches[:, 3:] += st.gyro_torque() - damping[:, None] * st.omg
            if state.slider is not None:
                wrenches[0] += step_slider(
                    state.slider, st.R[0], state.cp_offset, params.gravity, dt
                )
            accel, lam = kkt_accelerations(
                st,
                lay,
                wrenches,
                alpha=alpha,
                beta=beta,
                residual_tol=params.kkt_residual_tol,
            )
            integrate_semi_implicit(st, accel, dt)
            if projection_mode == 2 or (projection_mode == 1 and sub == params.n_substeps - 1):
                project_constraints(st, lay)

        if not (
            np.all(np.isfinite(st.pos))
            and np.all(np.isfinite(st.quat))
            and np.all(np.isfinite(st.vel))
            and np.all(np.isfinite(st.omg))
        ):
            scatter_bodies(st, state.bodies)
            raise SimulationFault(
                f"non-finite state after step {state.step_count}: pos={st.pos}, vel={st.vel}"
            )

    scatter_bodies(st, state.bodies)
    state.joint_forces = lam
    state.last_actions = actions
    state.time += params.policy_dt
    state.step_count += 1
    state.base_accel = (st.vel[1:] - prev_base_vel) / params.policy_dt
    return state
