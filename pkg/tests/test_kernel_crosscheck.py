"""Compiled substep kernel vs the reference numpy path."""
import numpy as np
import pytest

from multibiped.config import SimParams
from multibiped.sim import AttachmentConfig, PayloadSpec, build_system, sim_step
from multibiped.sim._kernel import NUMBA_AVAILABLE
from multibiped.sim.randomize import randomize_dynamics

pytestmark = pytest.mark.skipif(not NUMBA_AVAILABLE, reason="numba not installed")

SCENES = [
    (1, [(0.0, 0.0)]),
    (2, [(1.0, 0.0), (1.0, np.pi)]),
    (3, [(1.5, 0.0), (1.2, 2.2), (1.4, -2.0)]),
]


@pytest.mark.parametrize("n,attachments", SCENES)
def test_single_step_agreement(n, attachments):
    rng = np.random.default_rng(n)
    cfg = AttachmentConfig(n_robots=n, attachments=attachments)
    rand = randomize_dynamics(rng)
    fast = build_system(cfg, rand=rand, params=SimParams(use_compiled_kernel=True), initial_height=0.7)
    ref = build_system(cfg, rand=rand, params=SimParams(use_compiled_kernel=False), initial_height=0.7)
    act = rng.uniform(-1, 1, (n, 10))
    sim_step(fast, act.copy())
    sim_step(ref, act.copy())
    for a, b in zip(fast.bodies, ref.bodies):
        assert np.allclose(a.position, b.position, atol=1e-12)
        assert np.allclose(a.orientation, b.orientation, atol=1e-12)
        assert np.allclose(a.linear_velocity, b.linear_velocity, atol=1e-11)
        assert np.allclose(a.angular_velocity, b.angular_velocity, atol=1e-11)
    assert np.allclose(fast.joint_forces, ref.joint_forces, atol=1e-8)


def test_equilibrium_statics_identical():
    cfg = AttachmentConfig(n_robots=2, attachments=[(1.0, 0.0), (1.0, np.pi)])
    fast = build_system(cfg, params=SimParams(use_compiled_kernel=True), initial_height=0.7)
    ref = build_system(cfg, params=SimParams(use_compiled_kernel=False), initial_height=0.7)
    for _ in range(100):
        sim_step(fast, np.zeros((2, 10)), hold_still=True)
        sim_step(ref, np.zeros((2, 10)), hold_still=True)
    assert np.allclose(fast.joint_forces, ref.joint_forces, atol=1e-9)
    assert np.allclose(fast.carrier.position, ref.carrier.position, atol=1e-12)


def test_slider_paths_agree_short_horizon():
    payload = PayloadSpec(slider_mass=10.0, slider_bounds=(-0.5, 0.5, -0.3, 0.3))
    cfg = AttachmentConfig(n_robots=2, attachments=[(1.0, 0.0), (1.0, np.pi)])
    fast = build_system(cfg, payload=payload, params=SimParams(use_compiled_kernel=True), initial_height=0.7)
    ref = build_system(cfg, payload=payload, params=SimParams(use_compiled_kernel=False), initial_height=0.7)
    fast.slider.vel[:] = [0.4, 0.2]
    ref.slider.vel[:] = [0.4, 0.2]
    for _ in range(5):
        sim_step(fast, np.zeros((2, 10)), hold_still=True)
        sim_step(ref, np.zeros((2, 10)), hold_still=True)
    assert np.allclose(fast.slider.pos, ref.slider.pos, atol=1e-10)
    assert np.allclose(fast.carrier.linear_velocity, ref.carrier.linear_velocity, atol=1e-9)


def test_compiled_residual_bound_over_random_actions():
    rng = np.random.default_rng(5)
    cfg = AttachmentConfig(n_robots=3, attachments=[(1.5, 0.0), (1.2, 2.2), (1.4, -2.0)])
    st = build_system(cfg, rand=randomize_dynamics(rng), params=SimParams(), initial_height=0.7)
    worst = 0.0
    for _ in range(300):
        sim_step(st, rng.uniform(-1, 1, (3, 10)))
        worst = max(worst, np.abs(st.joint_world_residuals()).max())
        for b in st.bodies:
            assert abs(np.linalg.norm(b.orientation) - 1.0) < 1e-9
    assert worst < 1e-6
