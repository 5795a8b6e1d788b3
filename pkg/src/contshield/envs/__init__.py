"""Deterministic simulation environments and scripted policies."""

from .nav import NavConfig, NavEnv
from .particle import (
    N_AGENTS,
    ParticleConfig,
    ParticleEnv,
    goal_velocities,
    naive_velocities,
    separation_constraints,
    shield_velocities,
)
from .policies import POLICY_NAMES, GoalSeekPolicy, make_policy

__all__ = [
    "NavConfig", "NavEnv", "ParticleConfig", "ParticleEnv", "N_AGENTS",
    "goal_velocities", "naive_velocities", "separation_constraints",
    "shield_velocities",
    "GoalSeekPolicy", "make_policy", "POLICY_NAMES",
]
