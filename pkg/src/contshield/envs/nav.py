"""Mapless navigation environment: lidar robot, random obstacles, a target.

Each reset draws a fresh world from the episode seed: obstacle placements,
the start pose and the target position all change.  Worlds keep a minimum
obstacle size (so obstacles stay visible to the finite beam set), a
minimum clearance between obstacles (no pockets narrower than a body
length) and collision-free spawn points.

Rewards: +1 on reaching the target, -1 on collision, -0.01 per step
otherwise.  Episodes are deterministic given the seed and action stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..constraints import Observation
from ..geometry import Action, Pose, RobotGeometry, step_pose, wrap_angle
from ..world import (
    Circle,
    ObstacleWorld,
    Rect,
    footprint_collides,
    point_collides,
    raycast_lidar,
)


@dataclass(frozen=True)
class NavConfig:
    horizon: int = 300
    success_radius: float = 0.05
    n_rects: int = 4
    n_circles: int = 2
    min_size: float = 0.08
    max_size: float = 0.18
    obstacle_clearance: float = 0.2
    spawn_clearance: float = 0.09
    start_target_min_dist: float = 0.5


class NavEnv:
    """Deterministic seeded navigation environment."""

    def __init__(self, geom: RobotGeometry | None = None,
                 config: NavConfig | None = None,
                 arena: tuple[float, float, float, float] = (0.0, 0.0, 1.0, 1.0)):
        self.geom = geom or RobotGeometry()
        self.config = config or NavConfig()
        self.arena = arena
        self.world: ObstacleWorld | None = None
        self.pose: Pose | None = None
        self.target: tuple[float, float] | None = None
        self._done = True
        self._steps = 0

    # -- world sampling -------------------------------------------------------

    def _sample_world(self, rng: np.random.Generator) -> ObstacleWorld:
        cfg = self.config
        x0, y0, x1, y1 = self.arena
        rects: list[Rect] = []
        circles: list[Circle] = []

        def clearance_ok(cx, cy, half) -> bool:
            pad = cfg.obstacle_clearance
            if not (x0 + pad <= cx - half and cx + half <= x1 - pad
                    and y0 + pad <= cy - half and cy + half <= y1 - pad):
                return False
            for r in rects:
                rcx, rcy = r.x + r.w / 2, r.y + r.h / 2
                rhalf = max(r.w, r.h) / 2
                if max(abs(cx - rcx), abs(cy - rcy)) < half + rhalf + pad:
                    return False
            for c in circles:
                if max(abs(cx - c.x), abs(cy - c.y)) < half + c.radius + pad:
                    return False
            return True

        for _ in range(cfg.n_rects):
            for _attempt in range(60):
                w = rng.uniform(cfg.min_size, cfg.max_size)
                h = rng.uniform(cfg.min_size, cfg.max_size)
                cx = rng.uniform(x0, x1)
                cy = rng.uniform(y0, y1)
                if clearance_ok(cx, cy, max(w, h) / 2):
                    rects.append(Rect(cx - w / 2, cy - h / 2, w, h))
                    break
        for _ in range(cfg.n_circles):
            for _attempt in range(60):
                rad = rng.uniform(cfg.min_size / 2, cfg.max_size / 2)
                cx = rng.uniform(x0, x1)
                cy = rng.uniform(y0, y1)
                if clearance_ok(cx, cy, rad):
                    circles.append(Circle(cx, cy, rad))
                    break
        return ObstacleWorld(self.arena, tuple(rects), tuple(circles))

    def _sample_free_point(self, rng: np.random.Generator,
                           world: ObstacleWorld) -> tuple[float, float]:
        x0, y0, x1, y1 = self.arena
        for _ in range(1000):
            x = rng.uniform(x0, x1)
            y = rng.uniform(y0, y1)
            if not point_collides(x, y, world, inflate=self.config.spawn_clearance):
                return (x, y)
        raise RuntimeError("could not sample a free point")

    # -- environment protocol --------------------------------------------------

    def reset(self, seed: int) -> Observation:
        rng = np.random.default_rng(seed)
        world = self._sample_world(rng)
        start = self._sample_free_point(rng, world)
        for _ in range(1000):
            target = self._sample_free_point(rng, world)
            if math.dist(start, target) >= self.config.start_target_min_dist:
                break
        heading = rng.uniform(-math.pi, math.pi)
        self.world = ObstacleWorld(world.arena, world.rects, world.circles,
                                   (start[0], start[1], heading), target)
        self.pose = Pose(start[0], start[1], heading)
        self.target = target
        self._done = False
        self._steps = 0
        return self._observe()

    def reset_world(self, world: ObstacleWorld) -> Observation:
        """Start an episode in a fixed world (its start/target fields)."""
        if world.start is None or world.target is None:
            raise ValueError("world must carry start and target")
        self.world = world
        self.arena = world.arena
        self.pose = Pose(*world.start)
        self.target = world.target
        if footprint_collides(self.pose, world, self.geom):
            raise ValueError("start pose collides with the world")
        self._done = False
        self._steps = 0
        return self._observe()

    def _observe(self) -> Observation:
        scan = raycast_lidar(self.pose, self.world, self.geom)
        tx, ty = self.target
        bearing = math.atan2(ty - self.pose.y, tx - self.pose.x)
        err = wrap_angle(bearing - self.pose.r)
        dist = math.hypot(tx - self.pose.x, ty - self.pose.y)
        return Observation(
            lidar=tuple(float(v) for v in scan),
            pose=self.pose,
            target=(tx, ty),
            polar=(err, dist),
        )

    def step(self, a: Action) -> tuple[Observation, float, bool, str | None]:
        if self._done:
            raise RuntimeError("step() called on a terminated episode")
        g = self.geom
        if not (-g.l0 <= a.a0 <= g.l0 and -g.l1 <= a.a1 <= g.l1):
            raise ValueError("action outside the declared limits")
        self.pose = step_pose(self.pose, a)
        self._steps += 1
        if not self.world.contains(self.pose.x, self.pose.y) \
                or footprint_collides(self.pose, self.world, g):
            self._done = True
            # Clamp so the terminal observation stays inside the arena.
            x0, y0, x1, y1 = self.arena
            self.pose = Pose(min(max(self.pose.x, x0), x1),
                             min(max(self.pose.y, y0), y1), self.pose.r)
            return self._observe(), -1.0, True, "collision"
        if math.dist((self.pose.x, self.pose.y), self.target) <= self.config.success_radius:
            self._done = True
            return self._observe(), 1.0, True, "success"
        if self._steps >= self.config.horizon:
            self._done = True
            return self._observe(), -0.01, True, "timeout"
        return self._observe(), -0.01, False, None
