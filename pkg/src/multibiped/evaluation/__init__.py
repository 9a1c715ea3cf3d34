from .metrics import EpisodeRecord, MetricsCell, drift, expected_pose, failure_rate, power, step_power
from .runner import MetricsReport, run_eval, run_eval_episode
from .scenarios import SCENARIO_NAMES, EvalScenario, build_scenario, fixed_commands, rect_positions

__all__ = [
    "EpisodeRecord",
    "EvalScenario",
    "MetricsCell",
    "MetricsReport",
    "SCENARIO_NAMES",
    "build_scenario",
    "drift",
    "expected_pose",
    "failure_rate",
    "fixed_commands",
    "power",
    "rect_positions",
    "run_eval",
    "run_eval_episode",
    "step_power",
]
