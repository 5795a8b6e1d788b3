"""contshield: a runtime action shield for continuous-control agents.

The package checks each proposed action of a controller against
geometric collision constraints and a loop-avoidance history, replaces
unsafe proposals with the closest safe action, and ships an offline
realizability checker that proves (or refutes, with a concrete witness)
that a safe action exists in every adversarial situation the shield can
face.  Two deterministic simulation environments and an experiment
harness reproduce the safety benchmarks at desk scale.
"""

from .constraints import ConstraintSet, Observation, ShieldHistory, instantiate, satisfies
from .geometry import (
    Action,
    Pose,
    QuantizationGrid,
    RobotGeometry,
    TurnThresholds,
    default_beam_angles,
    precompute_turn_thresholds,
    quantize,
    step_pose,
)
from .realizability import (
    AdversarialDomain,
    RealizabilityStatus,
    RealizabilityVerdict,
    check_realizability,
    confirm_counterexample,
)
from .shield import (
    EpisodeRecord,
    Shield,
    ShieldConfig,
    SolverPath,
    StepOutcome,
    run_episode,
    shield_step,
)
from .solver import SolveResult, SolveStatus, SolverConfig, solve_any, solve_closest
from .world import ObstacleWorld, load_world, raycast_lidar

__version__ = "0.1.0"

__all__ = [
    "Action", "AdversarialDomain", "ConstraintSet", "EpisodeRecord",
    "ObstacleWorld", "Observation", "Pose", "QuantizationGrid",
    "RealizabilityStatus", "RealizabilityVerdict", "RobotGeometry", "Shield",
    "ShieldConfig", "ShieldHistory", "SolveResult", "SolveStatus",
    "SolverConfig", "SolverPath", "StepOutcome", "TurnThresholds",
    "check_realizability", "confirm_counterexample", "default_beam_angles",
    "instantiate", "load_world", "precompute_turn_thresholds", "quantize",
    "raycast_lidar", "run_episode", "satisfies", "shield_step", "solve_any",
    "solve_closest", "step_pose",
]
