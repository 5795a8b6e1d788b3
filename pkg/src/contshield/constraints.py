"""Per-step ground constraints over the two action variables.

``instantiate`` turns one observation plus the shield history into a
``ConstraintSet``: a turn bound derived from per-beam thresholds, forward
and backward translation caps as functions of the candidate rotation, and
a set of excluded action cells contributed by history entries that share
the current pose cell.

The translation cap follows the rotate-then-translate kinematics exactly:
after rotating by ``a1`` a beam's angular position becomes ``theta - a1``,
its reading decomposes into a lateral part ``l*|cos|`` and a forward part
``l*|sin|`` relative to the new heading, and a beam whose lateral part is
inside the body corridor caps the translation at its forward part minus
the body extent and a safety margin.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .geometry import (
    Action,
    Pose,
    QuantizationGrid,
    RobotGeometry,
    TurnThresholds,
    quantize,
    step_pose,
)

# Closed-form margin realizing the strict inequalities of the translation
# requirement; also used by the solver to step just past excluded cells.
SAFETY_MARGIN = 1e-4


class TurnBound(Enum):
    NONE = "none"
    NO_RIGHT = "a1<=0"
    NO_LEFT = "a1>=0"
    FIXED = "a1==0"


@dataclass(frozen=True)
class Observation:
    """Uncontrollable per-step input: scan, pose and target information."""

    lidar: tuple[float, ...]
    pose: Pose
    target: tuple[float, float]
    polar: tuple[float, float]  # (bearing error in radians, distance)

    def as_vector(self, geom: RobotGeometry,
                  arena: tuple[float, float, float, float] = (0.0, 0.0, 1.0, 1.0)
                  ) -> np.ndarray:
        """Normalized observation vector in [0, 1] (lidar, positions,
        compass, polar target), 30 values for the default 23-beam layout."""
        x0, y0, x1, y1 = arena
        diag = math.hypot(x1 - x0, y1 - y0)
        lidar = np.clip(np.asarray(self.lidar) / geom.max_range, 0.0, 1.0)
        rest = np.array([
            (self.pose.x - x0) / (x1 - x0),
            (self.pose.y - y0) / (y1 - y0),
            (self.target[0] - x0) / (x1 - x0),
            (self.target[1] - y0) / (y1 - y0),
            (self.pose.r + math.pi) / (2 * math.pi),
            (self.polar[0] + math.pi) / (2 * math.pi),
            min(self.polar[1] / diag, 1.0),
        ])
        return np.concatenate([lidar, np.clip(rest, 0.0, 1.0)])


@dataclass(frozen=True)
class HistoryEntry:
    pose_cell: tuple[int, int, int]
    action_cell: tuple[int, int]
    pose: Pose
    action: Action


class HistoryInvariantError(RuntimeError):
    pass


class ShieldHistory:
    """Bounded FIFO queue of quantized (pose, action) tuples.

    Single-writer: one episode loop owns the queue.  When ``feasible_mode``
    is on, pushes additionally enforce that entries are pairwise distinct
    and that consecutive raw poses are reachable within one action step.
    """

    def __init__(self, capacity: int, feasible_mode: bool = False):
        if capacity < 0:
            raise ValueError("capacity must be >= 0")
        self.capacity = capacity
        self.feasible_mode = feasible_mode
        self._q: deque[HistoryEntry] = deque(maxlen=capacity if capacity > 0 else 0)

    def __len__(self) -> int:
        return len(self._q)

    @property
    def entries(self) -> tuple[HistoryEntry, ...]:
        return tuple(self._q)

    def push(self, pose: Pose, action: Action, grid: QuantizationGrid,
             geom: RobotGeometry | None = None) -> HistoryEntry:
        pose_cell, action_cell = quantize(pose, action, grid)
        entry = HistoryEntry(pose_cell, action_cell, pose, action)
        if self.capacity == 0:
            return entry
        if self.feasible_mode:
            key = (pose_cell, action_cell)
            if any((e.pose_cell, e.action_cell) == key for e in self._q):
                raise HistoryInvariantError(
                    f"duplicate history entry {key} in feasible mode")
            if self._q and geom is not None:
                prev = self._q[-1]
                succ = step_pose(prev.pose, prev.action)
                if (abs(succ.x - pose.x) > 1e-9 or abs(succ.y - pose.y) > 1e-9
                        or abs(succ.r - pose.r) > 1e-9):
                    raise HistoryInvariantError(
                        "pose not reachable from previous entry in feasible mode")
        self._q.append(entry)
        return entry

    def action_cells_at(self, pose_cell: tuple[int, int, int]) -> frozenset[tuple[int, int]]:
        return frozenset(
            e.action_cell for e in self._q if e.pose_cell == pose_cell)


@dataclass(frozen=True)
class RegionSet:
    """Finite list of axis-aligned regions; each region is a per-axis
    (lo, hi) interval tuple.  Regions may overlap."""

    regions: tuple[tuple[tuple[float, float], ...], ...]

    def __post_init__(self):
        for region in self.regions:
            for lo, hi in region:
                if not lo < hi:
                    raise ValueError("degenerate region interval")

    def contains(self, region_idx: int, point: tuple[float, ...]) -> bool:
        region = self.regions[region_idx]
        if len(point) != len(region):
            raise ValueError("point dimension mismatch")
        return all(lo <= v <= hi for (lo, hi), v in zip(region, point))


@dataclass(frozen=True)
class ConstraintSet:
    """Ground constraints over (a0, a1) for one timestep."""

    thetas: np.ndarray
    lidar: np.ndarray
    turn_bound: TurnBound
    excluded_cells: frozenset[tuple[int, int]]
    grid: QuantizationGrid
    width: float
    hf: float
    hb: float
    l0: float
    l1: float
    collision_enabled: bool = True
    corridor_margin: float = 0.0
    cap_margin: float = 0.0
    # Per-instance memo for caps(); candidate rotations repeat heavily
    # during a solve.  Derived state, excluded from equality.
    _caps_cache: dict = field(default_factory=dict, compare=False, repr=False)

    # -- turn bound ----------------------------------------------------------

    def a1_interval(self) -> tuple[float, float]:
        if self.turn_bound is TurnBound.NO_RIGHT:
            return (-self.l1, 0.0)
        if self.turn_bound is TurnBound.NO_LEFT:
            return (0.0, self.l1)
        if self.turn_bound is TurnBound.FIXED:
            return (0.0, 0.0)
        return (-self.l1, self.l1)

    # -- translation caps ----------------------------------------------------

    def caps(self, a1: float) -> tuple[float, float]:
        """(forward cap F, backward cap B) for a candidate rotation."""
        hit = self._caps_cache.get(a1)
        if hit is None:
            f, b = self.caps_array(np.array([a1]))
            hit = (float(f[0]), float(b[0]))
            self._caps_cache[a1] = hit
        return hit

    def caps_array(self, a1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if not self.collision_enabled:
            full = np.full(len(a1), np.inf)
            return full, full.copy()
        th_hat = self.thetas[None, :] - np.asarray(a1)[:, None]  # (N, B)
        s = np.sin(th_hat)
        lateral = self.lidar[None, :] * np.abs(np.cos(th_hat))
        forward = self.lidar[None, :] * np.abs(s)
        in_corridor = lateral <= self.width / 2 + self.corridor_margin
        front = in_corridor & (s > 0)
        rear = in_corridor & (s < 0)
        f_caps = np.where(front, forward - self.hf - self.cap_margin - SAFETY_MARGIN, np.inf)
        b_caps = np.where(rear, forward - self.hb - self.cap_margin - SAFETY_MARGIN, np.inf)
        return f_caps.min(axis=1), b_caps.min(axis=1)

    def a0_interval(self, a1: float) -> tuple[float, float]:
        """Feasible translation interval at a fixed rotation (always contains 0)."""
        f, b = self.caps(a1)
        hi = min(max(f, 0.0), self.l0)
        lo = -min(max(b, 0.0), self.l0)
        return lo, hi

    # -- full membership test --------------------------------------------------

    def satisfies(self, a: Action) -> bool:
        if not (-self.l0 <= a.a0 <= self.l0 and -self.l1 <= a.a1 <= self.l1):
            return False
        lo1, hi1 = self.a1_interval()
        if not lo1 <= a.a1 <= hi1:
            return False
        if self.collision_enabled:
            f, b = self.caps(a.a1)
            if a.a0 > 0 and a.a0 > f:
                return False
            if a.a0 < 0 and -a.a0 > b:
                return False
        if self.excluded_cells and self.grid.action_cell(a) in self.excluded_cells:
            return False
        return True

    def to_debug_json(self) -> str:
        return json.dumps({
            "turn_bound": self.turn_bound.value,
            "lidar": [round(float(v), 6) for v in self.lidar],
            "beam_angles": [round(float(v), 6) for v in self.thetas],
            "excluded_cells": sorted(self.excluded_cells),
            "grid": {"gp": self.grid.gp, "ga": self.grid.ga},
            "box": {"l0": self.l0, "l1": self.l1},
            "margins": {"corridor": self.corridor_margin, "cap": self.cap_margin,
                        "safety": SAFETY_MARGIN},
            "collision_enabled": self.collision_enabled,
        }, sort_keys=True)


def instantiate(o: Observation, h: ShieldHistory | None, geom: RobotGeometry,
                th: TurnThresholds, grid: QuantizationGrid, *,
                collision: bool = True, loop: bool = True,
                corridor_margin: float = 0.0, cap_margin: float = 0.0
                ) -> ConstraintSet:
    """Build the ground constraint set for one step."""
    lidar = np.asarray(o.lidar, dtype=float)
    if len(lidar) != geom.n_beams:
        raise ValueError("lidar length does not match beam count")

    if collision:
        right_blocked = bool(np.any(lidar <= np.asarray(th.right)))
        left_blocked = bool(np.any(lidar <= np.asarray(th.left)))
    else:
        right_blocked = left_blocked = False
    if right_blocked and left_blocked:
        bound = TurnBound.FIXED
    elif right_blocked:
        bound = TurnBound.NO_RIGHT
    elif left_blocked:
        bound = TurnBound.NO_LEFT
    else:
        bound = TurnBound.NONE

    excluded: frozenset[tuple[int, int]] = frozenset()
    if loop and h is not None and len(h):
        excluded = h.action_cells_at(grid.pose_cell(o.pose))

    return ConstraintSet(
        thetas=np.asarray(geom.beam_angles, dtype=float),
        lidar=lidar,
        turn_bound=bound,
        excluded_cells=excluded,
        grid=grid,
        width=geom.width,
        hf=geom.hf,
        hb=geom.hb,
        l0=geom.l0,
        l1=geom.l1,
        collision_enabled=collision,
        corridor_margin=corridor_margin,
        cap_margin=cap_margin,
    )


def satisfies(a: Action, c: ConstraintSet, grid: QuantizationGrid | None = None) -> bool:
    """Whether an action satisfies every constraint in the set."""
    return c.satisfies(a)
