import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contshield.geometry import (
    Action,
    Pose,
    QuantizationGrid,
    RobotGeometry,
    convex_hull,
    default_beam_angles,
    point_in_convex,
    precompute_turn_thresholds,
    quantize,
    ray_poly_exit,
    step_pose,
    swept_hull,
    wrap_angle,
)


# ---------------------------------------------------------------------------
# step_pose
# ---------------------------------------------------------------------------

def test_step_identity():
    assert step_pose(Pose(0, 0, 0), Action(0, 0)) == Pose(0, 0, 0)


def test_step_pure_forward():
    p = step_pose(Pose(0, 0, 0), Action(1.0, 0))
    assert p.x == pytest.approx(1.0) and p.y == pytest.approx(0.0)
    assert p.r == 0.0


def test_step_max_right_turn_then_translate():
    # Rotation first (heading drops by pi/2), then translation along the
    # new heading: the robot ends one unit below the origin.
    p = step_pose(Pose(0, 0, 0), Action(1.0, math.pi / 2))
    assert p.x == pytest.approx(0.0, abs=1e-12)
    assert p.y == pytest.approx(-1.0)
    assert p.r == pytest.approx(-math.pi / 2)


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-20, 20),
       st.floats(-0.05, 0.05), st.floats(-0.6, 0.6))
def test_step_heading_always_wrapped(x, y, r, a0, a1):
    p = step_pose(Pose(x, y, r), Action(a0, a1))
    assert -math.pi <= p.r < math.pi


def test_step_continuity_in_action():
    base = step_pose(Pose(0.3, 0.4, 1.0), Action(0.04, 0.2))
    eps = 1e-9
    pert = step_pose(Pose(0.3, 0.4, 1.0), Action(0.04 + eps, 0.2 + eps))
    assert abs(pert.x - base.x) < 1e-6
    assert abs(pert.y - base.y) < 1e-6
    assert abs(pert.r - base.r) < 1e-6


def test_wrap_angle_edges():
    assert wrap_angle(math.pi) == -math.pi
    assert wrap_angle(-math.pi) == -math.pi
    assert wrap_angle(3 * math.pi) == pytest.approx(-math.pi)
    assert wrap_angle(0.5) == pytest.approx(0.5)


# ---------------------------------------------------------------------------
# Beam layouts
# ---------------------------------------------------------------------------

def test_default_beams_23_at_15_degrees():
    angles = default_beam_angles()
    assert len(angles) == 23
    steps = np.diff(angles)
    assert np.allclose(steps, math.radians(15.0))
    # symmetric about the forward axis
    for i, theta in enumerate(angles):
        assert theta + angles[22 - i] == pytest.approx(math.pi)


def test_ring_layout_closes_the_circle():
    angles = default_beam_angles(96, span_degrees=360)
    assert len(angles) == 96
    gap = 2 * math.pi / 96
    assert np.allclose(np.diff(angles), gap)
    # wrap-around pitch equals the inner pitch
    assert (angles[0] + 2 * math.pi) - angles[-1] == pytest.approx(gap)


# ---------------------------------------------------------------------------
# Convex helpers
# ---------------------------------------------------------------------------

def test_hull_and_ray_exit_unit_square():
    pts = np.array([[1, 1], [-1, 1], [-1, -1], [1, -1], [0, 0]])
    hull = convex_hull(pts)
    assert len(hull) == 4
    assert ray_poly_exit(hull, 0.0) == pytest.approx(1.0)
    assert ray_poly_exit(hull, math.pi / 4) == pytest.approx(math.sqrt(2))
    inside = point_in_convex(hull, np.array([[0.5, 0.5], [2.0, 0.0]]))
    assert inside.tolist() == [True, False]


def test_swept_hull_contains_rotated_footprints(geom):
    hull = swept_hull(geom, geom.l1, "right")
    for alpha in np.linspace(0, geom.l1, 7):
        c, s = math.cos(-alpha), math.sin(-alpha)
        rot = np.array([[c, -s], [s, c]])
        pts = geom.footprint() @ rot.T
        assert point_in_convex(hull, pts, tol=1e-9).all()


# ---------------------------------------------------------------------------
# Turn thresholds
# ---------------------------------------------------------------------------

def test_thresholds_zero_when_no_turn():
    g = RobotGeometry(l1=0.0)
    th = precompute_turn_thresholds(g)
    assert all(v == 0.0 for v in th.right + th.left)


def test_thresholds_mirror_symmetry(geom, thresholds):
    n = geom.n_beams
    for i in range(n):
        assert thresholds.left[i] == pytest.approx(thresholds.right[n - 1 - i],
                                                   abs=1e-6)


def test_thresholds_nonnegative_and_beyond_body(geom, thresholds):
    for i in range(geom.n_beams):
        assert thresholds.right[i] >= 0.0
        if thresholds.right[i] > 0.0:
            assert thresholds.right[i] > thresholds.footprint_exit[i]


def _maxturn_safety_trials(geom, thresholds, n_trials, rng, margin_beyond=0.0):
    """Monte-Carlo check: a point placed on a beam past its threshold is
    never swept by the maximal right turn.  Returns the number of overlaps."""
    hull = swept_hull(geom, geom.l1, "right")
    beams = rng.integers(0, geom.n_beams, n_trials)
    fracs = rng.uniform(0.0, 1.0, n_trials)
    t_right = np.asarray(thresholds.right)
    t_body = np.asarray(thresholds.footprint_exit)
    t_min = np.maximum(t_right, t_body)[beams] + 1e-9 + margin_beyond
    d = t_min + fracs * np.maximum(geom.max_range - t_min, 0.0)
    rays = math.pi / 2 - np.asarray(geom.beam_angles)[beams]
    pts = np.stack([d * np.cos(rays), d * np.sin(rays)], axis=1)
    valid = t_min < geom.max_range
    return int(np.count_nonzero(point_in_convex(hull, pts) & valid))


def test_thresholds_sound_monte_carlo(geom, thresholds):
    rng = np.random.default_rng(13)
    assert _maxturn_safety_trials(geom, thresholds, 20000, rng) == 0


def test_thresholds_tight_below(geom, thresholds):
    """Some points below the threshold really are swept (the margin is a
    margin, not dead weight)."""
    hull = swept_hull(geom, geom.l1, "right")
    hits = 0
    for b in range(geom.n_beams):
        if thresholds.right[b] == 0.0:
            continue
        d = thresholds.right[b] - 0.011  # just inside, beyond the body
        if d <= thresholds.footprint_exit[b]:
            continue
        ray = math.pi / 2 - geom.beam_angles[b]
        pt = np.array([[d * math.cos(ray), d * math.sin(ray)]])
        hits += int(point_in_convex(hull, pt).all())
    assert hits > 0


# ---------------------------------------------------------------------------
# Quantization
# ---------------------------------------------------------------------------

def _grid(ga=3, gp=4):
    return QuantizationGrid(gp, ga, (0.0, 0.0, 1.0, 1.0), l0=0.05, l1=1.0)


def test_action_axis_cells_examples():
    grid = _grid(ga=3)
    assert grid.a1_cell_of(-1.0) == 0
    assert grid.a1_cell_of(0.0) == 1
    assert grid.a1_cell_of(1.0) == 2


def test_boundary_maps_to_lower_cell():
    grid = QuantizationGrid(4, 4, (0.0, 0.0, 1.0, 1.0), l0=1.0, l1=1.0)
    # 0.5 is exactly the boundary between cells 2 and 3 on [-1, 1] / 4
    assert grid.a1_cell_of(0.5) == 2
    assert grid.a1_cell_of(0.5 + 1e-9) == 3
    assert grid.a1_cell_of(-1.0) == 0
    assert grid.a1_cell_of(1.0) == 3


def test_quantize_rejects_out_of_domain():
    grid = _grid()
    with pytest.raises(ValueError):
        grid.action_cell(Action(0.06, 0.0))
    with pytest.raises(ValueError):
        grid.pose_cell(Pose(1.2, 0.5, 0.0))


def test_quantize_joint_tuple(geom):
    grid = QuantizationGrid(10, 5, (0.0, 0.0, 1.0, 1.0), geom.l0, geom.l1)
    pc, ac = quantize(Pose(0.51, 0.49, 0.1), Action(0.01, -0.2), grid)
    assert len(pc) == 3 and len(ac) == 2
    assert all(0 <= v < 10 for v in pc)
    assert all(0 <= v < 5 for v in ac)


@given(st.floats(-0.05, 0.05), st.floats(-1.0, 1.0))
@settings(max_examples=300)
def test_quantize_partitions_domain(a0, a1):
    grid = _grid(ga=30)
    i0, i1 = grid.action_cell(Action(a0, a1))
    b0 = grid.a0_cell_bounds(i0)
    b1 = grid.a1_cell_bounds(i1)
    assert b0[0] - 1e-12 <= a0 <= b0[1] + 1e-12
    assert b1[0] - 1e-12 <= a1 <= b1[1] + 1e-12


def test_quantize_constant_on_cell_interiors():
    grid = _grid(ga=30)
    rng = np.random.default_rng(5)
    for _ in range(2000):
        i0 = int(rng.integers(0, 30))
        lo, hi = grid.a0_cell_bounds(i0)
        v = rng.uniform(lo + 1e-9, hi - 1e-9)
        assert grid.action_cell(Action(float(v), 0.0))[0] == i0
