"""Four-agent particle world with a pairwise minimum-distance requirement.

Agents live on a square arena, start in a symmetric ring layout and must
reach targets on the opposite side.  Actions are per-step velocity
commands limited per axis.  The safety requirement is that every pair of
agents keeps at least ``d_min`` separation at every step.

The shield reuses the main action solver: for agent ``i`` each other agent
``j`` contributes the half-plane  n_ij . v_i >= -(d_ij - d_min)/2  where
``n_ij`` points from j to i.  If both agents of a pair satisfy their
half-planes the projection bound gives

    |p_i + v_i - p_j - v_j| >= n_ij . (p_i - p_j + v_i - v_j) >= d_min,

so separation is preserved no matter how the other agents move, and the
zero velocity is always feasible.  Agents are solved in fixed index order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ..geometry import Action, QuantizationGrid
from ..solver import SolveStatus, SolverConfig, solve_closest

N_AGENTS = 4


@dataclass(frozen=True)
class ParticleConfig:
    d_min: float = 0.2
    v_max: float = 0.05
    ring_radius: float = 0.8
    success_radius: float = 0.1
    horizon: int = 300
    arena_half: float = 1.0
    detour_gain: float = 1.2    # clockwise swerve strength when crowded
    detour_radius: float = 0.35  # crowding detection range beyond d_min

    def __post_init__(self):
        if not self.v_max < self.d_min / 2:
            raise ValueError("per-axis speed limit must satisfy v_max < d_min/2")


@dataclass(frozen=True)
class SeparationConstraints:
    """Half-plane constraint set over one agent's (vx, vy) command.

    Exposes the same interface the action solver consumes: axis-1 is vx,
    axis-0 is vy.  ``normals``/``offsets`` encode  n . v >= c  rows.
    """

    normals: np.ndarray  # (K, 2) unit vectors
    offsets: np.ndarray  # (K,)
    v_max: float
    grid: QuantizationGrid = field(repr=False, default=None)
    excluded_cells: frozenset = frozenset()

    def __post_init__(self):
        if self.grid is None:
            object.__setattr__(self, "grid", QuantizationGrid(
                1, 1, (-1.0, -1.0, 1.0, 1.0), self.v_max, self.v_max))

    @property
    def l0(self) -> float:
        return self.v_max

    @property
    def l1(self) -> float:
        return self.v_max

    def a1_interval(self) -> tuple[float, float]:
        lo, hi = -self.v_max, self.v_max
        for (nx, ny), c in zip(self.normals, self.offsets):
            if abs(ny) < 1e-12:
                if nx > 0:
                    lo = max(lo, c / nx)
                elif nx < 0:
                    hi = min(hi, c / nx)
                elif c > 0:
                    return (1.0, -1.0)  # infeasible row
        return (lo, hi)

    def a0_interval(self, vx: float) -> tuple[float, float]:
        lo, hi = -self.v_max, self.v_max
        for (nx, ny), c in zip(self.normals, self.offsets):
            rest = c - nx * vx
            if ny > 1e-12:
                lo = max(lo, rest / ny)
            elif ny < -1e-12:
                hi = min(hi, rest / ny)
            elif rest > 1e-12:
                return (1.0, -1.0)
        return (lo, hi)

    def satisfies(self, a: Action) -> bool:
        vx, vy = a.a1, a.a0
        if not (-self.v_max <= vx <= self.v_max and -self.v_max <= vy <= self.v_max):
            return False
        v = np.array([vx, vy])
        return bool(np.all(self.normals @ v >= self.offsets - 1e-12))


# Keeps the separation proof strict under floating-point evaluation: each
# agent concedes this much beyond its half of the pair slack.
SEPARATION_PAD = 1e-7


def separation_constraints(positions: np.ndarray, agent: int,
                           cfg: ParticleConfig) -> SeparationConstraints:
    normals = []
    offsets = []
    p_i = positions[agent]
    for j in range(len(positions)):
        if j == agent:
            continue
        diff = p_i - positions[j]
        d = float(np.linalg.norm(diff))
        if d < 1e-9:
            continue
        normals.append(diff / d)
        offsets.append(-(d - cfg.d_min) / 2.0 + SEPARATION_PAD)
    return SeparationConstraints(
        np.array(normals), np.array(offsets), cfg.v_max)


class ParticleEnv:
    """Synchronous-update particle world; violation ends the episode."""

    def __init__(self, config: ParticleConfig | None = None):
        self.config = config or ParticleConfig()
        self.positions: np.ndarray | None = None
        self.targets: np.ndarray | None = None
        self._done = True
        self._steps = 0

    def reset(self, seed: int) -> np.ndarray:
        cfg = self.config
        rng = np.random.default_rng(seed)
        offset = rng.uniform(0.0, 2 * math.pi)
        angles = offset + np.arange(N_AGENTS) * (2 * math.pi / N_AGENTS)
        ring = cfg.ring_radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
        self.positions = ring.copy()
        self.targets = -ring.copy()  # opposite side of the map
        self._done = False
        self._steps = 0
        return self.positions.copy()

    def min_pairwise_distance(self) -> float:
        return min(
            float(np.linalg.norm(self.positions[i] - self.positions[j]))
            for i, j in itertools.combinations(range(N_AGENTS), 2))

    def step(self, velocities: np.ndarray
             ) -> tuple[np.ndarray, bool, bool, str | None]:
        """Returns (positions, violated, done, outcome)."""
        if self._done:
            raise RuntimeError("step() called on a terminated episode")
        v = np.asarray(velocities, dtype=float)
        if v.shape != (N_AGENTS, 2):
            raise ValueError(f"expected {N_AGENTS}x2 velocity commands")
        if np.any(np.abs(v) > self.config.v_max + 1e-12):
            raise ValueError("velocity command outside per-axis limits")
        self.positions = np.clip(
            self.positions + v, -self.config.arena_half, self.config.arena_half)
        self._steps += 1
        violated = self.min_pairwise_distance() < self.config.d_min
        reached = bool(np.all(np.linalg.norm(
            self.positions - self.targets, axis=1) <= self.config.success_radius))
        if violated:
            self._done = True
            return self.positions.copy(), True, True, "collision"
        if reached:
            self._done = True
            return self.positions.copy(), False, True, "success"
        if self._steps >= self.config.horizon:
            self._done = True
            return self.positions.copy(), False, True, "timeout"
        return self.positions.copy(), False, False, None


def naive_velocities(positions: np.ndarray, targets: np.ndarray,
                     cfg: ParticleConfig) -> np.ndarray:
    """Straight-to-target controller, blind to the other agents."""
    return np.clip(targets - positions, -cfg.v_max, cfg.v_max)


def goal_velocities(positions: np.ndarray, targets: np.ndarray,
                    cfg: ParticleConfig) -> np.ndarray:
    """Goal-seeking controller with a clockwise swerve when crowded.

    The swerve keeps symmetric crossings live (everyone detours the same
    way, forming a roundabout); safety is still entirely the shield's job.
    """
    out = np.zeros_like(positions)
    n = len(positions)
    for i in range(n):
        goal = targets[i] - positions[i]
        dist = float(np.linalg.norm(goal))
        if dist < 1e-12:
            continue
        ghat = goal / dist
        crowd = 0.0
        for j in range(n):
            if j == i:
                continue
            rel = positions[j] - positions[i]
            d = float(np.linalg.norm(rel))
            if d < cfg.d_min + cfg.detour_radius and float(rel @ ghat) > 0:
                crowd = max(crowd,
                            (cfg.d_min + cfg.detour_radius - d) / cfg.detour_radius)
        ang = -cfg.detour_gain * crowd
        c, s = math.cos(ang), math.sin(ang)
        v = np.array([c * goal[0] - s * goal[1], s * goal[0] + c * goal[1]])
        out[i] = np.clip(v, -cfg.v_max, cfg.v_max)
    return out


def shield_velocities(positions: np.ndarray, proposals: np.ndarray,
                      cfg: ParticleConfig,
                      solver: SolverConfig | None = None) -> tuple[np.ndarray, int]:
    """Apply the separation shield to all agents in fixed index order.

    Returns the corrected commands and the number of interventions.
    """
    solver = solver or SolverConfig(
        a1_resolution=cfg.v_max / 100, a0_resolution=cfg.v_max / 100)
    out = proposals.copy()
    interventions = 0
    for i in range(len(positions)):
        cons = separation_constraints(positions, i, cfg)
        proposal = Action(a0=float(proposals[i][1]), a1=float(proposals[i][0]))
        if cons.satisfies(proposal):
            continue
        res = solve_closest(cons, proposal, solver)
        if res.status is not SolveStatus.SAFE:
            # Standing still always satisfies the half-planes.
            res_action = Action(0.0, 0.0)
        else:
            res_action = res.action
        out[i] = (res_action.a1, res_action.a0)
        interventions += 1
    return out, interventions
