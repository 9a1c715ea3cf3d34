import numpy as np
import pytest

from multibiped.config import SimParams
from multibiped.sim.bodies import (
    AttachmentConfig,
    ConfigurationError,
    PayloadSpec,
    RigidBodyState,
    build_carrier_body,
    point_in_polygon,
    static_load_shares,
)


def test_rigid_body_validates_mass_and_inertia():
    with pytest.raises(ConfigurationError):
        RigidBodyState(np.zeros(3), np.array([1.0, 0, 0, 0]), np.zeros(3), np.zeros(3), 0.0, np.eye(3))
    with pytest.raises(ConfigurationError):
        RigidBodyState(np.zeros(3), np.array([1.0, 0, 0, 0]), np.zeros(3), np.zeros(3), 1.0, -np.eye(3))
    bad = np.eye(3)
    bad[0, 1] = 0.5  # asymmetric
    with pytest.raises(ConfigurationError):
        RigidBodyState(np.zeros(3), np.array([1.0, 0, 0, 0]), np.zeros(3), np.zeros(3), 1.0, bad)


def test_zero_robots_rejected():
    with pytest.raises(ConfigurationError):
        AttachmentConfig(n_robots=0, attachments=[])


def test_single_robot_at_control_point():
    cfg = AttachmentConfig(n_robots=1, attachments=[(0.0, 0.0)])
    assert np.allclose(cfg.points()[0], [0.0, 0.0])


def test_triangle_configuration_valid():
    cfg = AttachmentConfig(
        n_robots=3, attachments=[(1.5, 0.0), (1.2, 2.2), (1.4, -2.0)]
    )
    assert cfg.points().shape == (3, 2)


def test_radius_range_enforced():
    with pytest.raises(ConfigurationError):
        AttachmentConfig(n_robots=1, attachments=[(3.6, 0.0)])


def test_attachment_outside_extent_rejected():
    extent = np.array([[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]])
    with pytest.raises(ConfigurationError):
        AttachmentConfig(n_robots=1, attachments=[(1.0, 0.0)], carrier_extent=extent)


def test_control_point_outside_extent_rejected():
    extent = np.array([[1.0, -0.5], [2.0, -0.5], [2.0, 0.5], [1.0, 0.5]])
    with pytest.raises(ConfigurationError):
        AttachmentConfig(n_robots=1, attachments=[(1.5, 0.0)], carrier_extent=extent)


def test_point_in_polygon_basics():
    square = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    assert point_in_polygon(np.array([0.5, 0.5]), square)
    assert point_in_polygon(np.array([0.0, 0.5]), square)  # boundary counts
    assert not point_in_polygon(np.array([1.5, 0.5]), square)


def test_carrier_composition_masses_add_up():
    params = SimParams()
    cfg = AttachmentConfig(n_robots=2, attachments=[(1.0, 0.0), (1.0, np.pi)], bar_mass=4.0)
    payload = PayloadSpec(fixed_masses=[(10.0, 0.5, 0.0)])
    mass, com, inertia = build_carrier_body(cfg, payload, params)
    # 2 m bar at 2 kg/m + 4 kg extra bar mass + 2 kg hub + 10 kg payload
    assert mass == pytest.approx(2 * params.carrier_bar_density + 4.0 + params.carrier_hub_mass + 10.0)
    # payload drags the CoM toward +x
    assert com[0] > 0.0
    eig = np.linalg.eigvalsh(inertia)
    assert np.all(eig >= params.min_carrier_inertia - 1e-12)


def test_static_load_shares_symmetric_split():
    pts = np.array([[1.0, 0.0], [-1.0, 0.0]])
    w = static_load_shares(pts, np.zeros(2), 100.0)
    assert np.allclose(w, [50.0, 50.0])


def test_static_load_shares_respect_moment():
    # CoM at 1/4 toward robot 0 -> robot 0 carries 3/4... of a 2-point lever
    pts = np.array([[1.0, 0.0], [-1.0, 0.0]])
    w = static_load_shares(pts, np.array([0.5, 0.0]), 100.0)
    assert w[0] == pytest.approx(75.0)
    assert w[1] == pytest.approx(25.0)
    assert w.sum() == pytest.approx(100.0)


def test_static_load_shares_triangle_exact():
    pts = np.array([[1.0, 0.0], [-0.5, 0.8], [-0.5, -0.8]])
    com = np.array([0.1, 0.05])
    w = static_load_shares(pts, com, 200.0)
    assert w.sum() == pytest.approx(200.0)
    assert np.allclose(pts.T @ w, 200.0 * com)
