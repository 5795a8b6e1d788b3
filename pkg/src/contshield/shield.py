"""The shield step function and the shielded episode loop.

Per step: instantiate the ground constraints for the current observation
and history; pass the agent's action through untouched when it already
satisfies them; otherwise ask the optimizer for the closest safe action
(falling back to the plain feasibility solver on timeout).  When no safe
action exists at all, the step is recorded as unsat and the episode
continues with the agent's unmodified proposal.  The executed action's
quantized (pose, action) tuple is enqueued into the history afterward,
whether or not the shield intervened.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Protocol

from .constraints import (
    ConstraintSet,
    Observation,
    ShieldHistory,
    instantiate,
)
from .geometry import (
    SWEEP_MARGIN,
    Action,
    QuantizationGrid,
    RobotGeometry,
    TurnThresholds,
    precompute_turn_thresholds,
)
from .solver import SolveStatus, SolverConfig, solve_any, solve_closest


class SolverPath(Enum):
    PASS_THROUGH = "pass-through"
    OPTIMIZER = "optimizer"
    FALLBACK_SOL = "fallback-sol"
    UNSAT = "unsat"


@dataclass(frozen=True)
class ShieldConfig:
    """Queue length, grid resolutions and feature toggles.

    The three boolean toggles are independent so that the no-shield,
    collision-only, collision+loop and optimizer regimes can all be
    expressed with one type.
    """

    lq: int = 13
    gp: int = 13
    ga: int = 13
    enable_collision: bool = True
    enable_loop: bool = True
    enable_optimizer: bool = True
    solver: SolverConfig = field(default_factory=SolverConfig)
    corridor_margin: float = 0.0
    cap_margin: float = 0.0
    threshold_margin: float = 0.0
    feasible_history: bool = False

    def __post_init__(self):
        if self.lq < 0:
            raise ValueError("queue length must be >= 0")


@dataclass(frozen=True)
class StepOutcome:
    executed: Action
    intervened: bool
    path: SolverPath
    latency_ms: float
    constraints: ConstraintSet | None = None


class Shield:
    """Bundles geometry, thresholds and grids behind the step function."""

    def __init__(self, cfg: ShieldConfig, geom: RobotGeometry,
                 arena: tuple[float, float, float, float] = (0.0, 0.0, 1.0, 1.0),
                 thresholds: TurnThresholds | None = None):
        self.cfg = cfg
        self.geom = geom
        self.arena = arena
        if thresholds is not None:
            self.thresholds = thresholds
        else:
            self.thresholds = precompute_turn_thresholds(
                geom, margin=SWEEP_MARGIN + cfg.threshold_margin)
        self.grid = QuantizationGrid(cfg.gp, cfg.ga, arena, geom.l0, geom.l1)

    def new_history(self) -> ShieldHistory:
        return ShieldHistory(self.cfg.lq, self.cfg.feasible_history)

    def constraints(self, o: Observation, h: ShieldHistory | None) -> ConstraintSet:
        return instantiate(
            o, h, self.geom, self.thresholds, self.grid,
            collision=self.cfg.enable_collision,
            loop=self.cfg.enable_loop,
            corridor_margin=self.cfg.corridor_margin,
            cap_margin=self.cfg.cap_margin,
        )

    def step(self, proposal: Action, o: Observation, h: ShieldHistory) -> StepOutcome:
        t0 = time.perf_counter()
        c = self.constraints(o, h)
        executed = proposal
        path = SolverPath.PASS_THROUGH
        if not c.satisfies(proposal):
            result = None
            if self.cfg.enable_optimizer:
                result = solve_closest(c, proposal, self.cfg.solver)
                if result.status is SolveStatus.SAFE:
                    executed, path = result.action, SolverPath.OPTIMIZER
            if path is SolverPath.PASS_THROUGH:
                fallback = solve_any(c, self.cfg.solver)
                if fallback.status is SolveStatus.SAFE:
                    executed, path = fallback.action, SolverPath.FALLBACK_SOL
                else:
                    path = SolverPath.UNSAT  # continue with the proposal
        if path not in (SolverPath.UNSAT, SolverPath.PASS_THROUGH):
            assert c.satisfies(executed), "solver returned an unsafe action"
        h.push(o.pose, executed, self.grid, self.geom)
        latency = (time.perf_counter() - t0) * 1e3
        return StepOutcome(
            executed=executed,
            intervened=executed != proposal,
            path=path,
            latency_ms=latency,
            constraints=c,
        )


def shield_step(proposal: Action, o: Observation, h: ShieldHistory,
                shield: Shield) -> StepOutcome:
    """Functional form of :meth:`Shield.step`."""
    return shield.step(proposal, o, h)


# ---------------------------------------------------------------------------
# Episode loop
# ---------------------------------------------------------------------------

class Policy(Protocol):
    def reset(self, seed: int) -> None: ...
    def act(self, o: Observation) -> Action: ...


class Environment(Protocol):
    def reset(self, seed: int) -> Observation: ...
    def step(self, a: Action) -> tuple[Observation, float, bool, str | None]: ...


@dataclass
class TrajectoryRow:
    step: int
    x: float
    y: float
    r: float
    a0: float
    a1: float
    intervened: bool
    path: str


@dataclass
class EpisodeRecord:
    seed: int
    outcome: str  # success | collision | timeout
    steps: int
    reward: float
    unsat_count: int
    interventions: int
    path_counts: dict[str, int]
    mean_latency_ms: float
    trajectory: list[TrajectoryRow] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        """Stable, latency-free representation for episode JSONL files."""
        return {
            "seed": self.seed,
            "outcome": self.outcome,
            "steps": self.steps,
            "reward": round(self.reward, 10),
            "unsat_count": self.unsat_count,
            "interventions": self.interventions,
            "path_counts": dict(sorted(self.path_counts.items())),
        }

    def to_json_line(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    def trajectory_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["step", "x", "y", "r", "a0", "a1", "intervened", "path"])
        for row in self.trajectory:
            writer.writerow([
                row.step, repr(row.x), repr(row.y), repr(row.r),
                repr(row.a0), repr(row.a1), int(row.intervened), row.path,
            ])
        return buf.getvalue()


def run_episode(policy: Policy, env: Environment, shield: Shield,
                horizon: int, seed: int) -> EpisodeRecord:
    """Run one shielded episode of at most ``horizon`` steps."""
    obs = env.reset(seed)
    policy.reset(seed)
    h = shield.new_history()
    reward = 0.0
    outcome = "timeout"
    unsat = 0
    interventions = 0
    paths: dict[str, int] = {}
    latencies: list[float] = []
    trajectory: list[TrajectoryRow] = []

    steps = 0
    for t in range(horizon):
        proposal = policy.act(obs)
        so = shield.step(proposal, obs, h)
        trajectory.append(TrajectoryRow(
            t, obs.pose.x, obs.pose.y, obs.pose.r,
            so.executed.a0, so.executed.a1, so.intervened, so.path.value))
        paths[so.path.value] = paths.get(so.path.value, 0) + 1
        latencies.append(so.latency_ms)
        if so.path is SolverPath.UNSAT:
            unsat += 1
        if so.intervened:
            interventions += 1
        obs, r, done, flag = env.step(so.executed)
        reward += r
        steps = t + 1
        if done:
            outcome = flag or "timeout"
            break

    return EpisodeRecord(
        seed=seed,
        outcome=outcome,
        steps=steps,
        reward=reward,
        unsat_count=unsat,
        interventions=interventions,
        path_counts=paths,
        mean_latency_ms=sum(latencies) / len(latencies) if latencies else 0.0,
        trajectory=trajectory,
    )
