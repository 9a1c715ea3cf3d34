from .bodies import AttachmentConfig, ConfigurationError, PayloadSpec, RigidBodyState
from .constraints import BallJoint, SolverError, solve_constrained_dynamics
from .legs import GroundPlane, LegState, clip_to_friction_cone, step_legs
from .randomize import RandomizedDynamics, randomize_dynamics
from .world import PerturbationSpec, SimState, SimulationFault, build_system, sim_step

__all__ = [
    "AttachmentConfig",
    "BallJoint",
    "ConfigurationError",
    "GroundPlane",
    "LegState",
    "PayloadSpec",
    "PerturbationSpec",
    "RandomizedDynamics",
    "RigidBodyState",
    "SimState",
    "SimulationFault",
    "SolverError",
    "build_system",
    "clip_to_friction_cone",
    "randomize_dynamics",
    "sim_step",
    "solve_constrained_dynamics",
    "step_legs",
]
