import numpy as np
import pytest

from multibiped.config import SimParams
from multibiped.sim import (
    AttachmentConfig,
    ConfigurationError,
    PayloadSpec,
    PerturbationSpec,
    SimulationFault,
    build_system,
    sim_step,
)
from multibiped.sim.randomize import RandomizedDynamics, randomize_dynamics

TRIANGLE = [(1.5, 0.0), (1.2, 2.2), (1.4, -2.0)]


def test_build_single_robot_at_base():
    cfg = AttachmentConfig(n_robots=1, attachments=[(0.0, 0.0)])
    st = build_system(cfg, initial_height=0.7)
    assert st.n_robots == 1
    assert np.abs(st.joint_world_residuals()).max() == 0.0
    assert st.robot_height_above_ground(0) == pytest.approx(0.7)


def test_build_triangle_with_interior_control_point():
    cfg = AttachmentConfig(n_robots=3, attachments=TRIANGLE)
    st = build_system(cfg, initial_height=0.7)
    assert len(st.joints) == 3
    assert np.abs(st.joint_world_residuals()).max() < 1e-9


def test_coincident_attachments_rejected():
    cfg = AttachmentConfig(n_robots=2, attachments=[(1.0, 0.0), (1.01, 0.0)])
    with pytest.raises(ConfigurationError, match="separation"):
        build_system(cfg)


def test_dt_accounting_500_steps_is_10_seconds():
    cfg = AttachmentConfig(n_robots=1, attachments=[(0.0, 0.0)])
    st = build_system(cfg)
    for _ in range(500):
        sim_step(st, np.zeros((1, 10)), hold_still=True)
    assert st.time == pytest.approx(10.0, abs=1e-12)
    assert st.step_count == 500


def test_equilibrium_regression_500_steps():
    # standing with zero actions: the control point barely moves
    for n, att in [(1, [(0.0, 0.0)]), (2, [(1.0, 0.0), (1.0, np.pi)])]:
        cfg = AttachmentConfig(n_robots=n, attachments=att)
        st = build_system(cfg, initial_height=0.7)
        start = st.control_point_position().copy()
        for _ in range(500):
            sim_step(st, np.zeros((n, 10)), hold_still=True)
        drift = np.linalg.norm(st.control_point_position()[:2] - start[:2])
        assert drift < 0.05


def test_lateral_push_moves_carrier_in_push_direction():
    cfg = AttachmentConfig(n_robots=2, attachments=[(1.0, 0.0), (1.0, np.pi)])
    st = build_system(cfg, initial_height=0.7)
    push = PerturbationSpec(force=np.array([50.0, 0.0, 0.0]), target="carrier", start_step=0, duration_steps=100)
    for _ in range(100):
        sim_step(st, np.zeros((2, 10)), perturbations=[push], hold_still=True)
    assert st.control_point_position()[0] > 0.01


def test_perturbation_window_is_respected():
    cfg = AttachmentConfig(n_robots=1, attachments=[(0.0, 0.0)])
    st = build_system(cfg, initial_height=0.7)
    push = PerturbationSpec(force=np.array([80.0, 0.0, 0.0]), target="carrier", start_step=50, duration_steps=10)
    for _ in range(49):
        sim_step(st, np.zeros((1, 10)), perturbations=[push], hold_still=True)
    before = st.control_point_position()[0]
    assert abs(before) < 1e-6  # untouched before the window opens
    for _ in range(30):
        sim_step(st, np.zeros((1, 10)), perturbations=[push], hold_still=True)
    assert st.control_point_position()[0] > before


def test_determinism_bitwise():
    def run():
        cfg = AttachmentConfig(n_robots=3, attachments=TRIANGLE)
        st = build_system(cfg, rand=RandomizedDynamics(ground_slope=0.02), initial_height=0.7)
        rng = np.random.default_rng(42)
        for _ in range(100):
            sim_step(st, rng.uniform(-1, 1, (3, 10)))
        return np.concatenate([b.position for b in st.bodies] + [b.orientation for b in st.bodies])

    a, b = run(), run()
    assert np.array_equal(a, b)


def test_constraint_residual_under_random_actions():
    rng = np.random.default_rng(3)
    cfg = AttachmentConfig(n_robots=3, attachments=TRIANGLE)
    st = build_system(cfg, rand=randomize_dynamics(rng), initial_height=0.7)
    worst = 0.0
    for _ in range(300):
        sim_step(st, rng.uniform(-1, 1, (3, 10)))
        worst = max(worst, np.abs(st.joint_world_residuals()).max())
        for b in st.bodies:
            assert abs(np.linalg.norm(b.orientation) - 1.0) < 1e-9
    assert worst < 1e-6


def test_static_vertical_force_balance():
    # zero-acceleration scene: ground reactions carry the whole system
    cfg = AttachmentConfig(n_robots=2, attachments=[(1.0, 0.0), (1.0, np.pi)])
    st = build_system(cfg, initial_height=0.7)
    for _ in range(200):
        sim_step(st, np.zeros((2, 10)), hold_still=True)
    total_fz = sum(legs.commanded_grf[:, 2].sum() for legs in st.legs)
    assert total_fz == pytest.approx(st.total_dynamic_weight(), abs=1e-6)


def test_divergence_raises_simulation_fault():
    cfg = AttachmentConfig(n_robots=1, attachments=[(0.0, 0.0)])
    st = build_system(cfg)
    st.robot(0).linear_velocity[0] = np.inf
    with pytest.raises(SimulationFault):
        sim_step(st, np.zeros((1, 10)))


def test_slider_payload_pushes_back_on_carrier():
    cfg = AttachmentConfig(
        n_robots=2, attachments=[(1.0, 0.0), (1.0, np.pi)],
    )
    payload = PayloadSpec(slider_mass=10.0, slider_bounds=(-0.5, 0.5, -0.3, 0.3))
    st = build_system(cfg, payload=payload, initial_height=0.7)
    st.slider.vel[:] = [0.5, 0.0]
    for _ in range(100):
        sim_step(st, np.zeros((2, 10)), hold_still=True)
    # slider friction transfers momentum into the carrier
    assert abs(st.carrier.linear_velocity[0]) > 1e-5
    assert -0.5 - 1e-9 <= st.slider.pos[0] <= 0.5 + 1e-9
