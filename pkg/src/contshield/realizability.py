"""Offline realizability check: does a safe action exist in every
adversarial situation the shield can face?

The continuous observation/history space is abstracted into a finite
domain.  Per-beam readings are drawn from a ladder of magnitudes whose
bottom rung sits just above the declared standoff (the body-exit distance
plus a clearance the environment is assumed to keep); turn-block classes
enumerate which side thresholds fire.  Histories are over-approximated as
arbitrary multisets of at most ``lq`` action cells recorded at the current
pose cell, so the adversary may exclude up to ``lq`` distinct cells.

A scenario is therefore unrealizable exactly when the set of action cells
containing at least one feasible action can be fully covered by ``lq``
exclusions and the remaining feasible set is empty; the check closes the
loop with a dense action scan so that every emitted counterexample is
replayable and confirmed.  Feasibility is pose-uniform (the loop rule only
compares cells for equality), so pose cells need not be enumerated.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .constraints import Observation, ShieldHistory, instantiate
from .geometry import Action, Pose, RobotGeometry, TurnThresholds
from .shield import Shield, ShieldConfig
from .solver import SolveStatus, brute_force_any, scan_action_grid, solve_any

_BLOCK_EPS = 1e-3  # clearance used to keep a side deliberately unblocked


@dataclass(frozen=True)
class Scenario:
    label: str
    rung: int
    readings: tuple[float, ...]


@dataclass(frozen=True)
class AdversarialDomain:
    """Finite abstraction of the (observation, history) space.

    ``standoff`` declares the minimum clearance between the body and any
    obstacle in states the shield is expected to face; verdicts are
    relative to it.  ``rungs`` is the number of lidar-magnitude ladder
    steps per scenario class.  ``feasible_history`` restricts adversarial
    histories to pairwise-distinct entries (the properties a real queue
    satisfies); the default over-approximates histories as multisets,
    which is sound for realizability and at least as adversarial.
    """

    standoff: float = 0.005
    rungs: int = 8
    feasible_history: bool = False

    def __post_init__(self):
        if self.standoff <= 0:
            raise ValueError("standoff must be positive")
        if self.rungs < 1:
            raise ValueError("need at least one ladder rung")

    def scenarios(self, geom: RobotGeometry,
                  th: TurnThresholds) -> list[Scenario]:
        floors = np.asarray(th.footprint_exit) + self.standoff
        t_r = np.asarray(th.right)
        t_l = np.asarray(th.left)
        if float(floors.max()) >= geom.max_range:
            raise ValueError("standoff exceeds the lidar range")

        bases: list[tuple[str, np.ndarray]] = []
        bases.append(("both-blocked", floors.copy()))
        right_base = np.maximum(floors, np.where(t_l > 0, t_l + _BLOCK_EPS, 0.0))
        if bool(np.any(right_base <= t_r)):
            bases.append(("right-blocked", right_base))
        left_base = np.maximum(floors, np.where(t_r > 0, t_r + _BLOCK_EPS, 0.0))
        if bool(np.any(left_base <= t_l)):
            bases.append(("left-blocked", left_base))
        open_base = np.maximum(floors, np.maximum(t_r, t_l) + _BLOCK_EPS)
        bases.append(("open", open_base))

        out: list[Scenario] = []
        for label, base in bases:
            base = np.minimum(base, geom.max_range)
            for k in range(self.rungs):
                readings = base + (geom.max_range - base) * (k / self.rungs)
                out.append(Scenario(label, k, tuple(float(v) for v in readings)))
        return out

    def size(self, geom: RobotGeometry, th: TurnThresholds) -> int:
        return len(self.scenarios(geom, th))


class RealizabilityStatus(Enum):
    REALIZABLE = "realizable"
    UNREALIZABLE = "unrealizable"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Witness:
    """A concrete adversarial situation with an empty feasible action set."""

    lidar: tuple[float, ...]
    pose: tuple[float, float, float]
    excluded_cells: tuple[tuple[int, int], ...]
    scenario: str

    def to_json_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "pose": list(self.pose),
            "lidar": [round(v, 9) for v in self.lidar],
            "excluded_cells": [list(c) for c in self.excluded_cells],
        }


@dataclass(frozen=True)
class RealizabilityVerdict:
    status: RealizabilityStatus
    domain_size: int
    cells_checked: int
    witness: Witness | None
    wall_time_s: float
    config: dict

    @property
    def realizable(self) -> bool:
        return self.status is RealizabilityStatus.REALIZABLE

    def to_json_dict(self) -> dict:
        return {
            "status": self.status.value,
            "domain_size": self.domain_size,
            "cells_checked": self.cells_checked,
            "witness": self.witness.to_json_dict() if self.witness else None,
            "wall_time_s": round(self.wall_time_s, 4),
            "config": self.config,
        }


def _witness_pose(arena: tuple[float, float, float, float]) -> Pose:
    x0, y0, x1, y1 = arena
    return Pose((x0 + x1) / 2, (y0 + y1) / 2, 0.0)


def _witness_observation(w: Witness) -> Observation:
    pose = Pose(*w.pose)
    return Observation(lidar=w.lidar, pose=pose,
                       target=(pose.x, pose.y), polar=(0.0, 0.0))


def _witness_history(w: Witness, shield: Shield) -> ShieldHistory:
    h = ShieldHistory(max(shield.cfg.lq, len(w.excluded_cells)))
    pose = Pose(*w.pose)
    for (i0, i1) in w.excluded_cells:
        b0 = shield.grid.a0_cell_bounds(i0)
        b1 = shield.grid.a1_cell_bounds(i1)
        action = Action((b0[0] + b0[1]) / 2, (b1[0] + b1[1]) / 2)
        h.push(pose, action, shield.grid)
    return h


def _feasible_cells(c, n: int = 700) -> set[tuple[int, int]]:
    a0s, a1s, mask = scan_action_grid(c, n, n)
    if not mask.any():
        return set()
    i_idx, j_idx = np.nonzero(mask)
    cells0 = c.grid.a0_cells_array(a0s)[i_idx]
    cells1 = c.grid.a1_cells_array(a1s)[j_idx]
    return set(zip(cells0.tolist(), cells1.tolist()))


def check_realizability(cfg: ShieldConfig, geom: RobotGeometry,
                        domain: AdversarialDomain | None = None,
                        budget: int | None = None,
                        arena: tuple[float, float, float, float] = (0.0, 0.0, 1.0, 1.0),
                        ) -> RealizabilityVerdict:
    """Sweep the adversarial domain; realizable iff every cell is feasible.

    The first infeasible cell is returned as a confirmed, replayable
    counterexample; ``budget`` limits how many abstract cells are examined
    before giving up with UNKNOWN.  Cells are independent work items; the
    sequential scan makes the winning counterexample (lowest cell index)
    deterministic.
    """
    t0 = time.perf_counter()
    domain = domain or AdversarialDomain()
    shield = Shield(cfg, geom, arena)
    scenarios = domain.scenarios(geom, shield.thresholds)
    config_echo = {
        "lq": cfg.lq, "gp": cfg.gp, "ga": cfg.ga,
        "collision": cfg.enable_collision, "loop": cfg.enable_loop,
        "standoff": domain.standoff, "rungs": domain.rungs,
        "feasible_history": domain.feasible_history,
    }
    pose = _witness_pose(arena)

    def verdict(status, checked, witness=None):
        return RealizabilityVerdict(
            status, len(scenarios), checked, witness,
            time.perf_counter() - t0, config_echo)

    for idx, sc in enumerate(scenarios):
        if budget is not None and idx >= budget:
            return verdict(RealizabilityStatus.UNKNOWN, idx)
        obs = Observation(lidar=sc.readings, pose=pose,
                          target=(pose.x, pose.y), polar=(0.0, 0.0))
        base = instantiate(
            obs, None, geom, shield.thresholds, shield.grid,
            collision=cfg.enable_collision, loop=False,
            corridor_margin=cfg.corridor_margin, cap_margin=cfg.cap_margin)

        if not cfg.enable_loop or cfg.lq == 0:
            if solve_any(base, cfg.solver).status is SolveStatus.SAFE \
                    or brute_force_any(base) is not None:
                continue
            witness = Witness(sc.readings, (pose.x, pose.y, pose.r), (),
                              f"{sc.label}/rung{sc.rung}")
            return verdict(RealizabilityStatus.UNREALIZABLE, idx + 1, witness)

        touched = _feasible_cells(base)
        while True:
            if len(touched) > cfg.lq:
                break  # cannot be covered by lq exclusions
            excluded = frozenset(touched)
            c1 = dataclasses.replace(base, excluded_cells=excluded)
            survivor = brute_force_any(c1)
            if survivor is None:
                solved = solve_any(c1, cfg.solver)
                survivor = solved.action if solved.status is SolveStatus.SAFE else None
            if survivor is None:
                witness = Witness(
                    sc.readings, (pose.x, pose.y, pose.r),
                    tuple(sorted(excluded)), f"{sc.label}/rung{sc.rung}")
                return verdict(RealizabilityStatus.UNREALIZABLE, idx + 1, witness)
            touched.add(shield.grid.action_cell(survivor))
    return verdict(RealizabilityStatus.REALIZABLE, len(scenarios))


def confirm_counterexample(v: RealizabilityVerdict, cfg: ShieldConfig,
                           geom: RobotGeometry,
                           arena: tuple[float, float, float, float] = (0.0, 0.0, 1.0, 1.0),
                           n: int = 1000) -> bool:
    """Independently validate an Unrealizable verdict by dense action scan.

    Reconstructs the witness observation and history, instantiates the
    constraints and scans an ``n x n`` action grid; returns True exactly
    when the scan finds zero safe actions.
    """
    if v.status is not RealizabilityStatus.UNREALIZABLE or v.witness is None:
        raise ValueError("verdict is not Unrealizable with a witness")
    w = v.witness
    if len(w.lidar) != geom.n_beams:
        raise ValueError("witness lidar does not match the beam count")
    if any(not (0.0 <= r <= geom.max_range) for r in w.lidar):
        raise ValueError("witness lidar outside the declared range")
    x0, y0, x1, y1 = arena
    if not (x0 <= w.pose[0] <= x1 and y0 <= w.pose[1] <= y1):
        raise ValueError("witness pose outside the arena")

    shield = Shield(cfg, geom, arena)
    obs = _witness_observation(w)
    history = _witness_history(w, shield)
    c = instantiate(
        obs, history, geom, shield.thresholds, shield.grid,
        collision=cfg.enable_collision, loop=cfg.enable_loop,
        corridor_margin=cfg.corridor_margin, cap_margin=cfg.cap_margin)
    return brute_force_any(c, n, n) is None
