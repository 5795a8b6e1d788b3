"""Scripted controllers of graded safety for the navigation environment.

``expert`` steers toward the target with a proportional heading controller,
swerves toward the more open side when the forward cone tightens and brakes
on obstacle proximity; ``moderate`` runs the same controller with the
avoidance terms at half strength; ``unsafe`` is the expert with the lidar
terms removed entirely, which makes it drive straight through anything in
its path.  All are deterministic functions of the observation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..constraints import Observation
from ..geometry import Action, RobotGeometry


@dataclass
class GoalSeekPolicy:
    geom: RobotGeometry
    heading_gain: float = 2.0
    steer_gain: float = 3.0
    brake_distance: float = 0.25
    avoidance: float = 1.0  # 1 = expert, 0.5 = moderate, 0 = unsafe
    dither: float = 0.05    # seeded exploration jitter, fraction of the limits
    _thetas: np.ndarray = field(init=False, repr=False)
    _sin: np.ndarray = field(init=False, repr=False)
    _rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self._thetas = np.asarray(self.geom.beam_angles)
        self._sin = np.sin(self._thetas)
        self._rng = np.random.default_rng(0)

    def reset(self, seed: int) -> None:
        # Per-episode stream; keeps the policy a deterministic function of
        # the seed while breaking the exact limit cycles a purely reactive
        # controller falls into against a deterministic shield.
        self._rng = np.random.default_rng((seed, 0x5eed))

    def act(self, o: Observation) -> Action:
        g = self.geom
        err, dist = o.polar
        # err > 0 means the target lies counterclockwise; turn left (a1 < 0).
        a1 = float(np.clip(-self.heading_gain * err, -g.l1, g.l1))
        brake = 1.0
        if self.avoidance > 0.0:
            lidar = np.asarray(o.lidar)
            near = np.clip((self.brake_distance - lidar) / self.brake_distance,
                           0.0, 1.0)
            left = near[(self._thetas < math.pi / 2 - 0.1) & (self._sin > 0.1)]
            right = near[(self._thetas > math.pi / 2 + 0.1) & (self._sin > 0.1)]
            crowd_left = float(left.max()) if len(left) else 0.0
            crowd_right = float(right.max()) if len(right) else 0.0
            steer = self.avoidance * self.steer_gain * (crowd_left - crowd_right)
            a1 = float(np.clip(a1 + g.l1 * steer, -g.l1, g.l1))
            front = lidar[self._sin > 0.3]
            gap = float(front.min()) if len(front) else g.max_range
            brake = float(np.clip(
                (gap - g.hf - 0.01) / (self.avoidance * self.brake_distance),
                0.0, 1.0))
        speed = g.l0 * brake * max(0.2, math.cos(err))
        speed = min(speed, max(dist - 0.5 * g.hf, 0.0))
        if self.dither > 0.0:
            jit = self._rng.uniform(-1.0, 1.0, size=2)
            speed += self.dither * g.l0 * float(jit[0])
            a1 += self.dither * g.l1 * float(jit[1])
        return Action(float(np.clip(speed, -g.l0, g.l0)),
                      float(np.clip(a1, -g.l1, g.l1)))


def make_policy(name: str, geom: RobotGeometry) -> GoalSeekPolicy:
    if name == "expert":
        return GoalSeekPolicy(geom)
    if name == "moderate":
        return GoalSeekPolicy(geom, avoidance=0.5)
    if name == "unsafe":
        return GoalSeekPolicy(geom, avoidance=0.0)
    raise ValueError(f"unknown policy {name!r}; expected expert, moderate or unsafe")


POLICY_NAMES = ("expert", "moderate", "unsafe")
