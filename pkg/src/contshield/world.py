"""Obstacle worlds, exact lidar raycasting and collision tests.

The arena is an axis-aligned rectangle whose walls count as obstacles.
Obstacles are axis-aligned rectangles and circles; the world is immutable
after construction.  Raycasts return exact ray-segment / ray-circle
intersection distances, never sampled approximations.

World file format (``#`` comments allowed)::

    shieldworld v1
    arena 0.0 0.0 1.0 1.0
    rect 0.2 0.3 0.1 0.25
    circle 0.7 0.6 0.08
    start 0.1 0.1 0.0
    target 0.9 0.9
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Pose, RobotGeometry, footprint_polygon

WORLD_HEADER = "shieldworld v1"


@dataclass(frozen=True)
class Rect:
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise ValueError("rectangle sides must be positive")

    def segments(self) -> np.ndarray:
        x0, y0, x1, y1 = self.x, self.y, self.x + self.w, self.y + self.h
        return np.array([
            [x0, y0, x1, y0],
            [x1, y0, x1, y1],
            [x1, y1, x0, y1],
            [x0, y1, x0, y0],
        ])


@dataclass(frozen=True)
class Circle:
    x: float
    y: float
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("circle radius must be positive")


@dataclass(frozen=True)
class ObstacleWorld:
    arena: tuple[float, float, float, float] = (0.0, 0.0, 1.0, 1.0)
    rects: tuple[Rect, ...] = ()
    circles: tuple[Circle, ...] = ()
    start: tuple[float, float, float] | None = None
    target: tuple[float, float] | None = None
    # Cached geometry arrays; derived, not part of equality.
    _segments: np.ndarray = field(init=False, repr=False, compare=False)
    _circles: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        x0, y0, x1, y1 = self.arena
        if not (x0 < x1 and y0 < y1):
            raise ValueError("arena must have positive extent")
        walls = np.array([
            [x0, y0, x1, y0],
            [x1, y0, x1, y1],
            [x1, y1, x0, y1],
            [x0, y1, x0, y0],
        ])
        segs = [walls] + [r.segments() for r in self.rects]
        object.__setattr__(self, "_segments", np.concatenate(segs, axis=0))
        circ = np.array([[c.x, c.y, c.radius] for c in self.circles]) \
            if self.circles else np.zeros((0, 3))
        object.__setattr__(self, "_circles", circ)

    def contains(self, x: float, y: float) -> bool:
        x0, y0, x1, y1 = self.arena
        return x0 <= x <= x1 and y0 <= y <= y1


def raycast_lidar(p: Pose, world: ObstacleWorld, geom: RobotGeometry) -> np.ndarray:
    """Distance along each beam to the nearest obstacle or wall.

    Beams originate at the pose point (the center of rotation); readings
    are clamped to ``geom.max_range``.
    """
    if not world.contains(p.x, p.y):
        raise ValueError("pose outside arena")
    origin = np.array([p.x, p.y])
    dirs = geom.beam_dirs(p.r)  # (B, 2)
    best = np.full(len(dirs), float(geom.max_range))

    segs = world._segments  # (S, 4)
    a = segs[:, 0:2]
    e = segs[:, 2:4] - a
    rel = a[None, :, :] - origin[None, None, :]  # (1, S, 2) broadcast later
    # cross(d, e) per beam/segment
    denom = dirs[:, 0:1] * e[None, :, 1] - dirs[:, 1:2] * e[None, :, 0]  # (B, S)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (rel[:, :, 0] * e[None, :, 1] - rel[:, :, 1] * e[None, :, 0]) / denom
        u = (rel[:, :, 0] * dirs[:, 1:2] - rel[:, :, 1] * dirs[:, 0:1]) / denom
    hit = (np.abs(denom) > 1e-15) & (t >= 0) & (u >= -1e-12) & (u <= 1 + 1e-12)
    t = np.where(hit, t, np.inf)
    best = np.minimum(best, t.min(axis=1))

    if len(world._circles):
        centers = world._circles[:, 0:2]
        radii = world._circles[:, 2]
        oc = origin[None, :] - centers  # (C, 2)
        b = 2.0 * (dirs @ oc.T)  # (B, C)
        c = (oc ** 2).sum(axis=1)[None, :] - (radii ** 2)[None, :]
        disc = b * b - 4.0 * c
        with np.errstate(invalid="ignore"):
            sq = np.sqrt(np.maximum(disc, 0.0))
            t1 = (-b - sq) / 2.0
            t2 = (-b + sq) / 2.0
        t_near = np.where(t1 >= 0, t1, np.where(t2 >= 0, t2, np.inf))
        t_near = np.where(disc >= 0, t_near, np.inf)
        best = np.minimum(best, t_near.min(axis=1))

    return np.minimum(best, geom.max_range)


# ---------------------------------------------------------------------------
# Collision tests
# ---------------------------------------------------------------------------

def _rect_overlap_obb(corners: np.ndarray, rect: Rect) -> bool:
    """Separating-axis test between a convex quad and an axis-aligned rect."""
    rx = np.array([rect.x, rect.x + rect.w])
    ry = np.array([rect.y, rect.y + rect.h])
    # Axis-aligned axes
    if corners[:, 0].max() < rx[0] or corners[:, 0].min() > rx[1]:
        return False
    if corners[:, 1].max() < ry[0] or corners[:, 1].min() > ry[1]:
        return False
    # Quad edge normals
    rect_pts = np.array([[rx[0], ry[0]], [rx[1], ry[0]], [rx[1], ry[1]], [rx[0], ry[1]]])
    n = len(corners)
    for i in range(n):
        edge = corners[(i + 1) % n] - corners[i]
        axis = np.array([-edge[1], edge[0]])
        p1 = corners @ axis
        p2 = rect_pts @ axis
        if p1.max() < p2.min() or p1.min() > p2.max():
            return False
    return True


def _circle_overlap_obb(corners: np.ndarray, circle: Circle) -> bool:
    """Circle vs convex quad overlap (exact)."""
    center = np.array([circle.x, circle.y])
    n = len(corners)
    inside = True
    closest_d2 = np.inf
    for i in range(n):
        a = corners[i]
        b = corners[(i + 1) % n]
        e = b - a
        rel = center - a
        cross = e[0] * rel[1] - e[1] * rel[0]
        if cross < 0:
            inside = False
        t = np.clip(np.dot(rel, e) / np.dot(e, e), 0.0, 1.0)
        closest = a + t * e
        closest_d2 = min(closest_d2, float(((center - closest) ** 2).sum()))
    if inside:
        return True
    return closest_d2 <= circle.radius ** 2


def footprint_collides(p: Pose, world: ObstacleWorld, geom: RobotGeometry) -> bool:
    """Exact overlap test of the body rectangle against walls and obstacles."""
    corners = footprint_polygon(geom, p)
    x0, y0, x1, y1 = world.arena
    if (corners[:, 0].min() < x0 or corners[:, 0].max() > x1
            or corners[:, 1].min() < y0 or corners[:, 1].max() > y1):
        return True
    for r in world.rects:
        if _rect_overlap_obb(corners, r):
            return True
    for c in world.circles:
        if _circle_overlap_obb(corners, c):
            return True
    return False


def point_collides(x: float, y: float, world: ObstacleWorld,
                   inflate: float = 0.0) -> bool:
    """Whether a point lies inside (or within ``inflate`` of) any obstacle."""
    ax0, ay0, ax1, ay1 = world.arena
    if not (ax0 + inflate <= x <= ax1 - inflate and ay0 + inflate <= y <= ay1 - inflate):
        return True
    for r in world.rects:
        if (r.x - inflate <= x <= r.x + r.w + inflate
                and r.y - inflate <= y <= r.y + r.h + inflate):
            return True
    for c in world.circles:
        if (x - c.x) ** 2 + (y - c.y) ** 2 <= (c.radius + inflate) ** 2:
            return True
    return False


# ---------------------------------------------------------------------------
# World file IO
# ---------------------------------------------------------------------------

def dump_world(world: ObstacleWorld) -> str:
    lines = [WORLD_HEADER]
    lines.append("arena " + " ".join(repr(v) for v in world.arena))
    for r in world.rects:
        lines.append(f"rect {r.x!r} {r.y!r} {r.w!r} {r.h!r}")
    for c in world.circles:
        lines.append(f"circle {c.x!r} {c.y!r} {c.radius!r}")
    if world.start is not None:
        lines.append("start " + " ".join(repr(v) for v in world.start))
    if world.target is not None:
        lines.append("target " + " ".join(repr(v) for v in world.target))
    return "\n".join(lines) + "\n"


def load_world(text: str) -> ObstacleWorld:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or lines[0] != WORLD_HEADER:
        raise ValueError(f"world file must start with {WORLD_HEADER!r}")
    arena = (0.0, 0.0, 1.0, 1.0)
    rects: list[Rect] = []
    circles: list[Circle] = []
    start = None
    target = None
    for ln in lines[1:]:
        parts = ln.split()
        kind, vals = parts[0], [float(v) for v in parts[1:]]
        if kind == "arena" and len(vals) == 4:
            arena = (vals[0], vals[1], vals[2], vals[3])
        elif kind == "rect" and len(vals) == 4:
            rects.append(Rect(*vals))
        elif kind == "circle" and len(vals) == 3:
            circles.append(Circle(*vals))
        elif kind == "start" and len(vals) == 3:
            start = (vals[0], vals[1], vals[2])
        elif kind == "target" and len(vals) == 2:
            target = (vals[0], vals[1])
        else:
            raise ValueError(f"unrecognized world line: {ln!r}")
    return ObstacleWorld(arena, tuple(rects), tuple(circles), start, target)
