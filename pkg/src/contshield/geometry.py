"""Robot kinematics, footprint geometry, turn thresholds and quantization.

Conventions used across the package:

* world headings are radians, counterclockwise positive, wrapped to
  [-pi, pi);
* a step first rotates then translates; positive ``a1`` is a right turn,
  so the heading decreases by ``a1``;
* lidar beam angles are measured clockwise from the robot's left side
  (0 = left, pi/2 = straight ahead, pi = right);
* all beams originate at the pose point, which is the center of rotation,
  so a rotation changes a beam's angular position (theta - a1) but not the
  distance of a fixed world point from the origin of the scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi

# Margin added to turn thresholds on top of the exact swept-area distance.
SWEEP_MARGIN = 0.01
# Angular step used to discretize the rotation sweep (radians).
SWEEP_STEP = math.radians(0.5)


def wrap_angle(r: float) -> float:
    """Wrap an angle to [-pi, pi)."""
    return (r + math.pi) % TWO_PI - math.pi


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    r: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("pose coordinates must be finite")
        object.__setattr__(self, "r", wrap_angle(self.r))


@dataclass(frozen=True)
class Action:
    a0: float  # translation, arena units per step
    a1: float  # rotation, radians per step; positive turns right


def default_beam_angles(count: int = 23, span_degrees: float = 330.0
                        ) -> tuple[float, ...]:
    """Evenly spaced beams symmetric about the forward axis.

    The default 23-beam layout spans 330 degrees at a 15 degree pitch,
    leaving a blind wedge directly behind the robot; beam i is the mirror
    of beam count-1-i.  ``span_degrees=360`` gives a gapless ring (the
    last pitch closes the circle), which denser sensor configurations use
    so that backward motion is covered too.
    """
    if count < 2:
        raise ValueError("need at least two beams")
    if span_degrees >= 360.0:
        step = TWO_PI / count
        start = math.pi / 2 - (count - 1) * step / 2
    else:
        span = math.radians(span_degrees)
        step = span / (count - 1)
        start = math.pi / 2 - span / 2
    return tuple(start + i * step for i in range(count))


@dataclass(frozen=True)
class RobotGeometry:
    """Body shape, step limits and lidar layout.

    The footprint is the rectangle [-hb, hf] x [-width/2, width/2] in the
    robot frame; ``hf``/``hb`` are the forward/backward body extents from
    the pose point and double as the translation margins.
    """

    width: float = 0.1
    hf: float = 0.03
    hb: float = 0.03
    l0: float = 0.05           # max translation per step
    l1: float = math.pi / 6    # max rotation per step
    max_range: float = 0.3
    beam_angles: tuple[float, ...] = field(default_factory=default_beam_angles)

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("robot width must be positive")
        if self.hf <= 0 or self.hb <= 0:
            raise ValueError("body extents must be positive")
        if self.l0 <= 0 or self.l1 < 0:
            raise ValueError("step limits must be positive")
        if self.max_range <= 0:
            raise ValueError("lidar range must be positive")
        angles = tuple(float(a) for a in self.beam_angles)
        if any(b <= a for a, b in zip(angles, angles[1:])):
            raise ValueError("beam angles must be strictly increasing")
        object.__setattr__(self, "beam_angles", angles)

    @property
    def body_length(self) -> float:
        return self.hf + self.hb

    @property
    def n_beams(self) -> int:
        return len(self.beam_angles)

    def footprint(self) -> np.ndarray:
        """Corner points of the body rectangle in the robot frame (4x2, CCW)."""
        return np.array([
            [self.hf, -self.width / 2],
            [self.hf, self.width / 2],
            [-self.hb, self.width / 2],
            [-self.hb, -self.width / 2],
        ])

    def beam_dirs(self, heading: float) -> np.ndarray:
        """World-frame unit direction of each beam for a given heading (n x 2)."""
        ang = heading + math.pi / 2 - np.asarray(self.beam_angles)
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)


def step_pose(p: Pose, a: Action) -> Pose:
    """Rotate by a1 (right positive), then translate a0 along the new heading."""
    r = wrap_angle(p.r - a.a1)
    return Pose(p.x + a.a0 * math.cos(r), p.y + a.a0 * math.sin(r), r)


def footprint_polygon(geom: RobotGeometry, p: Pose) -> np.ndarray:
    """World-frame corner points of the body at pose ``p`` (4x2)."""
    c, s = math.cos(p.r), math.sin(p.r)
    rot = np.array([[c, -s], [s, c]])
    return geom.footprint() @ rot.T + np.array([p.x, p.y])


# ---------------------------------------------------------------------------
# Convex polygon helpers (robot-frame, origin inside)
# ---------------------------------------------------------------------------

def convex_hull(points: np.ndarray) -> np.ndarray:
    """Andrew's monotone chain; returns hull vertices in CCW order."""
    pts = np.unique(np.round(points, 12), axis=0)
    if len(pts) < 3:
        return pts
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[np.ndarray] = []
    for pt in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], pt) <= 0:
            lower.pop()
        lower.append(pt)
    upper: list[np.ndarray] = []
    for pt in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], pt) <= 0:
            upper.pop()
        upper.append(pt)
    return np.array(lower[:-1] + upper[:-1])


def ray_poly_exit(poly: np.ndarray, angle: float) -> float:
    """Distance from the origin to where a ray leaves a convex polygon.

    The origin must lie inside (or on the boundary of) the polygon.
    Returns 0.0 if the polygon is degenerate.
    """
    if len(poly) < 3:
        return 0.0
    d = np.array([math.cos(angle), math.sin(angle)])
    best = 0.0
    n = len(poly)
    for i in range(n):
        a = poly[i]
        b = poly[(i + 1) % n]
        e = b - a
        denom = d[0] * e[1] - d[1] * e[0]
        if abs(denom) < 1e-15:
            continue
        t = (a[0] * e[1] - a[1] * e[0]) / denom
        u = (a[0] * d[1] - a[1] * d[0]) / denom
        if t >= 0 and -1e-12 <= u <= 1 + 1e-12:
            best = max(best, t)
    return best


def point_in_convex(poly: np.ndarray, pts: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """Vectorized membership test for points against a CCW convex polygon."""
    inside = np.ones(len(pts), dtype=bool)
    n = len(poly)
    for i in range(n):
        a = poly[i]
        b = poly[(i + 1) % n]
        e = b - a
        rel = pts - a
        cross = e[0] * rel[:, 1] - e[1] * rel[:, 0]
        inside &= cross >= -tol
    return inside


def _rotate_cw(points: np.ndarray, alpha: float) -> np.ndarray:
    c, s = math.cos(alpha), math.sin(alpha)
    return points @ np.array([[c, -s], [s, c]])  # clockwise by alpha


def swept_hull(geom: RobotGeometry, max_turn: float, direction: str,
               step: float = SWEEP_STEP) -> np.ndarray:
    """Convex hull of the footprint rotated in place by up to ``max_turn``.

    ``direction`` is "right" (clockwise) or "left".  The hull contains the
    union of all intermediate footprints, so staying outside it is
    sufficient to survive any partial turn in that direction.
    """
    foot = geom.footprint()
    if max_turn <= 0:
        return convex_hull(foot)
    n_steps = max(1, int(math.ceil(max_turn / step)))
    alphas = np.linspace(0.0, max_turn, n_steps + 1)
    sign = 1.0 if direction == "right" else -1.0
    pts = np.concatenate([_rotate_cw(foot, sign * a) for a in alphas])
    return convex_hull(pts)


@dataclass(frozen=True)
class TurnThresholds:
    """Per-beam distances below which a turn toward that side is unsafe."""

    right: tuple[float, ...]
    left: tuple[float, ...]
    footprint_exit: tuple[float, ...]

    def __post_init__(self):
        if len(self.right) != len(self.left) or len(self.right) != len(self.footprint_exit):
            raise ValueError("threshold arrays must have equal length")


def precompute_turn_thresholds(geom: RobotGeometry,
                               margin: float = SWEEP_MARGIN) -> TurnThresholds:
    """Compute conservative per-beam turn thresholds.

    For each beam the threshold is the farthest point of the maximal-turn
    swept area along the beam, plus ``margin``; 0 when the sweep does not
    extend past the standing footprint along that beam (such beams can
    never veto the turn, since readings are positive).
    """
    foot = convex_hull(geom.footprint())
    hull_r = swept_hull(geom, geom.l1, "right")
    hull_l = swept_hull(geom, geom.l1, "left")
    right, left, fexit = [], [], []
    for theta in geom.beam_angles:
        ray = math.pi / 2 - theta  # robot frame: forward = +x
        base = ray_poly_exit(foot, ray)
        er = ray_poly_exit(hull_r, ray)
        el = ray_poly_exit(hull_l, ray)
        fexit.append(float(base))
        right.append(float(er + margin) if er > base + 1e-12 else 0.0)
        left.append(float(el + margin) if el > base + 1e-12 else 0.0)
    return TurnThresholds(tuple(right), tuple(left), tuple(fexit))


# ---------------------------------------------------------------------------
# Quantization
# ---------------------------------------------------------------------------

def _cell_index(v: float, lo: float, hi: float, n: int) -> int:
    """Uniform cell index with boundary values assigned to the lower cell."""
    if not lo <= v <= hi:
        raise ValueError(f"value {v} outside domain [{lo}, {hi}]")
    if n == 1:
        return 0
    u = (v - lo) * n / (hi - lo)
    k = math.floor(u)
    if k == u and k > 0:
        k -= 1
    return min(int(k), n - 1)


@dataclass(frozen=True)
class QuantizationGrid:
    """Uniform grids over the pose domain and the action box.

    ``gp`` cells per pose axis (x, y and heading), ``ga`` cells per action
    axis.  Boundary values map to the lower-index cell.
    """

    gp: int
    ga: int
    arena: tuple[float, float, float, float] = (0.0, 0.0, 1.0, 1.0)
    l0: float = 0.05
    l1: float = math.pi / 6

    def __post_init__(self):
        if self.gp < 1 or self.ga < 1:
            raise ValueError("grid resolutions must be >= 1")

    def pose_cell(self, p: Pose) -> tuple[int, int, int]:
        x0, y0, x1, y1 = self.arena
        return (
            _cell_index(p.x, x0, x1, self.gp),
            _cell_index(p.y, y0, y1, self.gp),
            _cell_index(p.r, -math.pi, math.pi, self.gp),
        )

    def action_cell(self, a: Action) -> tuple[int, int]:
        return (
            _cell_index(a.a0, -self.l0, self.l0, self.ga),
            _cell_index(a.a1, -self.l1, self.l1, self.ga),
        )

    def a0_cell_bounds(self, i: int) -> tuple[float, float]:
        w = 2 * self.l0 / self.ga
        return (-self.l0 + i * w, -self.l0 + (i + 1) * w)

    def a1_cell_bounds(self, i: int) -> tuple[float, float]:
        w = 2 * self.l1 / self.ga
        return (-self.l1 + i * w, -self.l1 + (i + 1) * w)

    def a1_cell_of(self, a1: float) -> int:
        return _cell_index(a1, -self.l1, self.l1, self.ga)

    def a0_cells_array(self, a0: np.ndarray) -> np.ndarray:
        return self._cells_array(a0, -self.l0, self.l0)

    def a1_cells_array(self, a1: np.ndarray) -> np.ndarray:
        return self._cells_array(a1, -self.l1, self.l1)

    def _cells_array(self, v: np.ndarray, lo: float, hi: float) -> np.ndarray:
        u = (v - lo) * self.ga / (hi - lo)
        k = np.floor(u)
        k = np.where((k == u) & (k > 0), k - 1, k)
        return np.clip(k, 0, self.ga - 1).astype(np.int64)


def quantize(p: Pose, a: Action, grid: QuantizationGrid
             ) -> tuple[tuple[int, int, int], tuple[int, int]]:
    """Map a pose/action pair to its (pose-cell, action-cell) index tuples."""
    return grid.pose_cell(p), grid.action_cell(a)
