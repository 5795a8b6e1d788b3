import dataclasses

import numpy as np

from contshield.constraints import Observation, ShieldHistory, instantiate
from contshield.geometry import Action, Pose, QuantizationGrid
from contshield.solver import (
    SolveStatus,
    SolverConfig,
    brute_force_any,
    brute_force_closest,
    scan_action_grid,
    solve_any,
    solve_closest,
)

POSE = Pose(0.5, 0.5, 0.0)
# Generous deadline: these tests exercise solver logic, not the host's
# scheduling; the timeout path has its own dedicated test.
CFG = SolverConfig(timeout_ms=5000.0)


def _grid(geom, ga=3):
    return QuantizationGrid(13, ga, (0.0, 0.0, 1.0, 1.0), geom.l0, geom.l1)


def _constraints(geom, thresholds, lidar=None, ga=3, history=None,
                 collision=True):
    lidar = lidar if lidar is not None else [geom.max_range] * geom.n_beams
    obs = Observation(tuple(float(v) for v in lidar), POSE, (0.9, 0.9),
                      (0.0, 0.5))
    return instantiate(obs, history, geom, thresholds, _grid(geom, ga),
                       collision=collision, loop=history is not None)


def _wedged(geom, thresholds, ga=3, exclude_all=True):
    """Both turn bounds firing, near-zero caps, center cells excluded."""
    lidar = [e + 5e-4 for e in thresholds.footprint_exit]
    grid = _grid(geom, ga)
    h = ShieldHistory(ga * ga)
    if exclude_all:
        for i0 in range(ga):
            for i1 in range(ga):
                b0 = grid.a0_cell_bounds(i0)
                b1 = grid.a1_cell_bounds(i1)
                h.push(POSE, Action((b0[0] + b0[1]) / 2, (b1[0] + b1[1]) / 2),
                       grid)
    return _constraints(geom, thresholds, lidar, ga=ga, history=h)


# ---------------------------------------------------------------------------
# solve_any
# ---------------------------------------------------------------------------

def test_any_unconstrained_returns_null_action(geom, thresholds):
    c = _constraints(geom, thresholds)
    r = solve_any(c, CFG)
    assert r.status is SolveStatus.SAFE
    assert r.action == Action(0.0, 0.0)
    assert c.satisfies(r.action)


def test_any_unsat_on_fully_excluded_wedge(geom, thresholds):
    c = _wedged(geom, thresholds, ga=3)
    assert solve_any(c, CFG).status is SolveStatus.UNSAT
    # dense scan agrees the feasible set is empty
    assert brute_force_any(c) is None


def test_any_respects_bound_and_exclusions(geom, thresholds):
    i = max(range(geom.n_beams),
            key=lambda k: thresholds.right[k] - thresholds.left[k])
    lidar = [geom.max_range] * geom.n_beams
    lidar[i] = (thresholds.right[i] + thresholds.left[i]) / 2
    grid = _grid(geom, 3)
    h = ShieldHistory(4)
    h.push(POSE, Action(0.0, 0.0), grid)  # exclude the center cell
    c = _constraints(geom, thresholds, lidar, ga=3, history=h)
    r = solve_any(c, CFG)
    assert r.status is SolveStatus.SAFE
    assert r.action.a1 <= 0.0
    assert grid.action_cell(r.action) not in c.excluded_cells
    assert c.satisfies(r.action)


def test_any_deterministic(geom, thresholds):
    c = _wedged(geom, thresholds, ga=5, exclude_all=False)
    first = solve_any(c, CFG)
    for _ in range(5):
        again = solve_any(c, CFG)
        assert again == first


# ---------------------------------------------------------------------------
# solve_closest
# ---------------------------------------------------------------------------

def test_closest_returns_feasible_proposal_exactly(geom, thresholds):
    c = _constraints(geom, thresholds)
    p = Action(0.033, 0.21)
    r = solve_closest(c, p, CFG)
    assert r.status is SolveStatus.SAFE and r.action == p


def test_closest_projects_rotation_to_bound(geom, thresholds):
    i = max(range(geom.n_beams),
            key=lambda k: thresholds.right[k] - thresholds.left[k])
    lidar = [geom.max_range] * geom.n_beams
    lidar[i] = (thresholds.right[i] + thresholds.left[i]) / 2
    c = _constraints(geom, thresholds, lidar)
    r = solve_closest(c, Action(0.05, 0.3), CFG)
    assert r.status is SolveStatus.SAFE
    assert r.action == Action(0.05, 0.0)


def test_closest_timeout_sentinel_distinct_from_unsat(geom, thresholds):
    c = _constraints(geom, thresholds)
    tiny = dataclasses.replace(CFG, timeout_ms=1e-7)
    r = solve_closest(c, Action(0.0, 0.0), tiny)
    assert r.status is SolveStatus.TIMEOUT
    assert r.status is not SolveStatus.UNSAT
    assert r.action is None


def test_closest_unsat_on_wedge(geom, thresholds):
    c = _wedged(geom, thresholds, ga=3)
    assert solve_closest(c, Action(0.0, 0.0), CFG).status is SolveStatus.UNSAT


def _random_case(geom, thresholds, rng, ga=13):
    lidar = rng.uniform(0.09, geom.max_range, geom.n_beams)
    grid = _grid(geom, ga)
    h = ShieldHistory(10)
    for _ in range(int(rng.integers(0, 10))):
        h.push(POSE,
               Action(float(rng.uniform(-geom.l0, geom.l0)),
                      float(rng.uniform(-geom.l1, geom.l1))), grid)
    c = _constraints(geom, thresholds, lidar, ga=ga, history=h)
    p = Action(float(rng.uniform(-geom.l0, geom.l0)),
               float(rng.uniform(-geom.l1, geom.l1)))
    return c, p


def test_closest_matches_dense_grid_optimum(geom, thresholds):
    """Rotation distance is optimal to within the sweep resolution,
    checked against a 10x finer brute-force grid."""
    rng = np.random.default_rng(17)
    n1 = 4001  # a1 spacing = l1/2000 = resolution/10
    for _ in range(150):
        c, p = _random_case(geom, thresholds, rng)
        mine = solve_closest(c, p, CFG)
        ref = brute_force_closest(c, p, n0=601, n1=n1)
        assert mine.status is SolveStatus.SAFE and ref is not None
        d_mine = abs(mine.action.a1 - p.a1)
        d_ref = abs(ref.a1 - p.a1)
        assert d_mine <= d_ref + CFG.a1_resolution + 1e-12


def test_closest_completeness_with_witness(geom, thresholds):
    """Whenever a comfortably feasible action exists the solver never
    reports UNSAT (randomized feasible-set construction)."""
    rng = np.random.default_rng(23)
    for _ in range(200):
        c, p = _random_case(geom, thresholds, rng)
        witness = brute_force_any(c, n0=301, n1=301)
        if witness is None:
            continue
        r = solve_closest(c, p, CFG)
        assert r.status is SolveStatus.SAFE
        assert c.satisfies(r.action)


def test_scan_action_grid_consistent_with_satisfies(geom, thresholds):
    rng = np.random.default_rng(29)
    c, _ = _random_case(geom, thresholds, rng)
    a0s, a1s, mask = scan_action_grid(c, 101, 101)
    for _ in range(400):
        i = int(rng.integers(0, 101))
        j = int(rng.integers(0, 101))
        assert mask[i, j] == c.satisfies(Action(float(a0s[i]), float(a1s[j])))
