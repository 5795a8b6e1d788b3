"""Feasibility and closest-safe-action solving over a constraint set.

The constraint structure is one-dimensional in the rotation: for any fixed
``a1`` the feasible translations form an interval minus excluded-cell
slabs, all computable in closed form.  Both solvers therefore sweep a
finite, deterministic set of rotation candidates (a uniform grid plus the
boundaries of excluded cells nudged by the safety margin) and solve the
translation axis exactly.  Every returned action is re-verified against
the constraint set before being reported safe.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .constraints import SAFETY_MARGIN, ConstraintSet
from .geometry import Action


class SolveStatus(Enum):
    SAFE = "safe"
    UNSAT = "unsat"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class SolveResult:
    status: SolveStatus
    action: Action | None = None

    @property
    def is_safe(self) -> bool:
        return self.status is SolveStatus.SAFE


@dataclass(frozen=True)
class SolverConfig:
    """Sweep resolutions and the optimizer deadline."""

    a1_resolution: float = math.pi / 6 / 200
    a0_resolution: float = 0.05 / 200
    timeout_ms: float = 50.0
    tie_break: str = "a0-then-smaller-a1"

    def __post_init__(self):
        if self.a1_resolution <= 0 or self.a0_resolution <= 0:
            raise ValueError("sweep resolutions must be positive")
        if self.timeout_ms <= 0:
            raise ValueError("timeout must be positive")
        if self.tie_break != "a0-then-smaller-a1":
            raise ValueError(f"unknown tie-break rule {self.tie_break!r}")


def _excluded_rows_by_column(c: ConstraintSet) -> dict[int, frozenset[int]]:
    cols: dict[int, set[int]] = {}
    for (i0, i1) in c.excluded_cells:
        cols.setdefault(i1, set()).add(i0)
    return {k: frozenset(v) for k, v in cols.items()}


def _a1_candidates(c: ConstraintSet, cfg: SolverConfig,
                   extra: tuple[float, ...] = ()) -> list[float]:
    lo, hi = c.a1_interval()
    if hi < lo:
        return []
    if hi == lo:
        vals = {lo}
    else:
        n = max(1, int(math.ceil((hi - lo) / cfg.a1_resolution)))
        vals = {lo + (hi - lo) * k / n for k in range(n + 1)}
    for (_, i1) in c.excluded_cells:
        for b in c.grid.a1_cell_bounds(i1):
            for v in (b - SAFETY_MARGIN, b + SAFETY_MARGIN):
                if lo <= v <= hi:
                    vals.add(v)
    for v in extra:
        if lo <= v <= hi:
            vals.add(v)
    return sorted(vals)


def _a0_spans(c: ConstraintSet, a1: float,
              excluded_rows: frozenset[int]) -> list[tuple[float, float]]:
    """Feasible a0 sub-intervals at a fixed rotation, centered pieces first."""
    lo, hi = c.a0_interval(a1)
    if hi < lo:
        return []
    if not excluded_rows:
        return [(lo, hi)]
    spans = []
    for i0 in range(c.grid.ga):
        if i0 in excluded_rows:
            continue
        b0, b1 = c.grid.a0_cell_bounds(i0)
        s_lo, s_hi = max(lo, b0), min(hi, b1)
        if s_lo <= s_hi:
            spans.append((s_lo, s_hi))
    spans.sort(key=lambda s: (abs(s[0] + s[1]) / 2.0, s[0]))
    return spans


def solve_any(c: ConstraintSet, cfg: SolverConfig) -> SolveResult:
    """Return any constraint-satisfying action.

    The scan visits rotation candidates by increasing magnitude (gentlest
    rotation first) and returns the midpoint of the first nonempty
    translation interval, so an unconstrained set yields the null action.
    """
    cols = _excluded_rows_by_column(c)
    for a1 in sorted(_a1_candidates(c, cfg), key=lambda v: (abs(v), v)):
        rows = cols.get(c.grid.a1_cell_of(a1), frozenset())
        for (s_lo, s_hi) in _a0_spans(c, a1, rows):
            for a0 in _span_candidates(s_lo, s_hi, (s_lo + s_hi) / 2.0):
                a = Action(a0, a1)
                if c.satisfies(a):
                    return SolveResult(SolveStatus.SAFE, a)
    return SolveResult(SolveStatus.UNSAT)


def _span_candidates(s_lo: float, s_hi: float, preferred: float) -> list[float]:
    """Candidate translations inside a span, preferred point first.

    Cell-boundary endpoints quantize into the neighbouring cell, so nudged
    variants are tried before giving up on a span.
    """
    out = [min(max(preferred, s_lo), s_hi)]
    for v in (s_lo + SAFETY_MARGIN, s_hi - SAFETY_MARGIN):
        if s_lo <= v <= s_hi and v not in out:
            out.append(v)
    return out


def solve_closest(c: ConstraintSet, proposal: Action,
                  cfg: SolverConfig) -> SolveResult:
    """Return the feasible action minimizing |a1 - proposal.a1|.

    Rotation optimality is exact to within the sweep resolution; the
    translation axis is an exact interval projection.  Ties on the rotation
    distance break toward smaller |a0 - proposal.a0|, then the smaller
    rotation.  Returns TIMEOUT when the deadline expires mid-scan.
    """
    deadline = time.monotonic() + cfg.timeout_ms / 1000.0
    lo, hi = c.a1_interval()
    if hi < lo:
        return SolveResult(SolveStatus.UNSAT)
    clamped = min(max(proposal.a1, lo), hi)
    candidates = _a1_candidates(c, cfg, extra=(clamped,))
    candidates.sort(key=lambda v: (abs(v - proposal.a1), v))
    cols = _excluded_rows_by_column(c)

    best: tuple[float, float, float, Action] | None = None
    for a1 in candidates:
        if time.monotonic() > deadline:
            return SolveResult(SolveStatus.TIMEOUT)
        d1 = abs(a1 - proposal.a1)
        if best is not None and d1 > best[0] + 1e-15:
            break
        rows = cols.get(c.grid.a1_cell_of(a1), frozenset())
        for (s_lo, s_hi) in _a0_spans(c, a1, rows):
            target = min(max(proposal.a0, s_lo), s_hi)
            for a0 in _span_candidates(s_lo, s_hi, target):
                a = Action(a0, a1)
                if not c.satisfies(a):
                    continue
                key = (d1, abs(a0 - proposal.a0), a1)
                if best is None or key < (best[0], best[1], best[2]):
                    best = (*key, a)
                break  # first verified candidate in a span is the closest one
    if best is None:
        return SolveResult(SolveStatus.UNSAT)
    return SolveResult(SolveStatus.SAFE, best[3])


# ---------------------------------------------------------------------------
# Dense reference scans (test oracle and counterexample confirmation)
# ---------------------------------------------------------------------------

def scan_action_grid(c: ConstraintSet, n0: int = 1000, n1: int = 1000
                     ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized feasibility mask over an n0 x n1 grid of the action box.

    Returns (a0 values, a1 values, mask) with mask[i, j] true when
    (a0[i], a1[j]) satisfies the constraint set.
    """
    a0s = np.linspace(-c.l0, c.l0, n0)
    a1s = np.linspace(-c.l1, c.l1, n1)
    lo1, hi1 = c.a1_interval()
    turn_ok = (a1s >= lo1) & (a1s <= hi1)
    f, b = c.caps_array(a1s)
    hi0 = np.minimum(np.maximum(f, 0.0), c.l0)
    lo0 = -np.minimum(np.maximum(b, 0.0), c.l0)
    mask = (a0s[:, None] >= lo0[None, :]) & (a0s[:, None] <= hi0[None, :])
    mask &= turn_ok[None, :]
    if c.excluded_cells:
        ex = np.zeros((c.grid.ga, c.grid.ga), dtype=bool)
        for (i0, i1) in c.excluded_cells:
            ex[i0, i1] = True
        cells0 = c.grid.a0_cells_array(a0s)
        cells1 = c.grid.a1_cells_array(a1s)
        mask &= ~ex[cells0[:, None], cells1[None, :]]
    return a0s, a1s, mask


def brute_force_any(c: ConstraintSet, n0: int = 1000, n1: int = 1000) -> Action | None:
    """First feasible grid point of a dense scan, or None."""
    a0s, a1s, mask = scan_action_grid(c, n0, n1)
    idx = np.argwhere(mask)
    if len(idx) == 0:
        return None
    i, j = idx[0]
    return Action(float(a0s[i]), float(a1s[j]))


def brute_force_closest(c: ConstraintSet, proposal: Action,
                        n0: int = 1000, n1: int = 1000) -> Action | None:
    """Dense-grid argmin of (|a1 - p.a1|, |a0 - p.a0|) over feasible points."""
    a0s, a1s, mask = scan_action_grid(c, n0, n1)
    if not mask.any():
        return None
    d1 = np.abs(a1s - proposal.a1)[None, :]
    d0 = np.abs(a0s - proposal.a0)[:, None]
    cost = np.where(mask, d1 * 1e6 + d0, np.inf)
    i, j = np.unravel_index(np.argmin(cost), cost.shape)
    return Action(float(a0s[i]), float(a1s[j]))
