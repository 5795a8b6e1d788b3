"""JSON configuration files with dotted-path CLI overrides.

Schema (all sections optional; unknown keys rejected)::

    {
      "geometry":   {"width": 0.1, "hf": 0.03, "hb": 0.03, "l0": 0.05,
                     "l1": 0.5235987755982988, "max_range": 0.3,
                     "beams": 23, "beam_span_degrees": 330.0},
      "shield":     {"lq": 13, "gp": 13, "ga": 30, "collision": true,
                     "loop": true, "optimizer": true,
                     "corridor_margin": 0.0, "cap_margin": 0.0,
                     "threshold_margin": 0.0, "feasible_history": false},
      "solver":     {"a1_resolution": null, "a0_resolution": null,
                     "timeout_ms": 50.0},
      "nav":        {"horizon": 300, "success_radius": 0.05, "n_rects": 4,
                     "n_circles": 2, "min_size": 0.08, "max_size": 0.18,
                     "obstacle_clearance": 0.2, "spawn_clearance": 0.09,
                     "start_target_min_dist": 0.5},
      "particle":   {"d_min": 0.2, "v_max": 0.05, "ring_radius": 0.8,
                     "success_radius": 0.1, "horizon": 200},
      "experiment": {"env": "nav", "policy": "expert",
                     "seeds": [1, 2, 3, 4, 5], "episodes_per_seed": 100,
                     "workers": 1},
      "realizability": {"standoff": 0.005, "rungs": 8, "budget": null,
                        "feasible_history": false}
    }

Null solver resolutions default to limit/200.  Overrides are given as
``section.key=json-value`` strings on the command line.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

from ..envs import NavConfig, ParticleConfig
from ..geometry import RobotGeometry, default_beam_angles
from ..realizability import AdversarialDomain
from ..shield import ShieldConfig
from ..solver import SolverConfig

_DEFAULTS: dict[str, dict[str, Any]] = {
    "geometry": {
        "width": 0.1, "hf": 0.03, "hb": 0.03, "l0": 0.05,
        "l1": math.pi / 6, "max_range": 0.3,
        "beams": 23, "beam_span_degrees": 330.0,
    },
    "shield": {
        "lq": 13, "gp": 13, "ga": 30, "collision": True, "loop": True,
        "optimizer": True, "corridor_margin": 0.0, "cap_margin": 0.0,
        "threshold_margin": 0.0, "feasible_history": False,
    },
    "solver": {"a1_resolution": None, "a0_resolution": None, "timeout_ms": 50.0},
    "nav": {
        "horizon": 300, "success_radius": 0.05, "n_rects": 4, "n_circles": 2,
        "min_size": 0.08, "max_size": 0.18, "obstacle_clearance": 0.2,
        "spawn_clearance": 0.09, "start_target_min_dist": 0.5,
    },
    "particle": {
        "d_min": 0.2, "v_max": 0.05, "ring_radius": 0.8,
        "success_radius": 0.1, "horizon": 200,
    },
    "experiment": {
        "env": "nav", "policy": "expert", "seeds": [1, 2, 3, 4, 5],
        "episodes_per_seed": 100, "workers": 1,
    },
    "realizability": {
        "standoff": 0.005, "rungs": 8, "budget": None,
        "feasible_history": False,
    },
}


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    sections: dict[str, dict[str, Any]] = field(default_factory=dict)

    def section(self, name: str) -> dict[str, Any]:
        return self.sections[name]

    # -- constructors for package objects -------------------------------------

    def geometry(self) -> RobotGeometry:
        geo = self.section("geometry")
        return RobotGeometry(
            width=geo["width"], hf=geo["hf"], hb=geo["hb"],
            l0=geo["l0"], l1=geo["l1"], max_range=geo["max_range"],
            beam_angles=default_beam_angles(geo["beams"], geo["beam_span_degrees"]),
        )

    def solver_config(self) -> SolverConfig:
        sol = self.section("solver")
        geo = self.section("geometry")
        return SolverConfig(
            a1_resolution=sol["a1_resolution"] or geo["l1"] / 200.0,
            a0_resolution=sol["a0_resolution"] or geo["l0"] / 200.0,
            timeout_ms=sol["timeout_ms"],
        )

    def shield_config(self) -> ShieldConfig:
        sh = self.section("shield")
        return ShieldConfig(
            lq=sh["lq"], gp=sh["gp"], ga=sh["ga"],
            enable_collision=sh["collision"], enable_loop=sh["loop"],
            enable_optimizer=sh["optimizer"],
            solver=self.solver_config(),
            corridor_margin=sh["corridor_margin"],
            cap_margin=sh["cap_margin"],
            threshold_margin=sh["threshold_margin"],
            feasible_history=sh["feasible_history"],
        )

    def nav_config(self) -> NavConfig:
        return NavConfig(**self.section("nav"))

    def particle_config(self) -> ParticleConfig:
        return ParticleConfig(**self.section("particle"))

    def adversarial_domain(self) -> AdversarialDomain:
        r = self.section("realizability")
        return AdversarialDomain(
            standoff=r["standoff"], rungs=r["rungs"],
            feasible_history=r["feasible_history"],
        )


def _merge(base: dict[str, dict[str, Any]], overlay: dict[str, Any],
           origin: str) -> None:
    for section, values in overlay.items():
        if section not in base:
            raise ConfigError(f"{origin}: unknown config section {section!r}")
        if not isinstance(values, dict):
            raise ConfigError(f"{origin}: section {section!r} must be an object")
        for key, value in values.items():
            if key not in base[section]:
                raise ConfigError(f"{origin}: unknown key {section}.{key}")
            base[section][key] = value


def load_config(path: str | None = None,
                overrides: list[str] | None = None) -> Config:
    sections = {name: dict(vals) for name, vals in _DEFAULTS.items()}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as e:
                raise ConfigError(f"{path}: {e}") from None
        _merge(sections, data, path)
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like section.key=value")
        dotted, raw = item.split("=", 1)
        parts = dotted.split(".")
        if len(parts) != 2:
            raise ConfigError(f"override key {dotted!r} must be section.key")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw  # bare strings allowed
        _merge(sections, {parts[0]: {parts[1]: value}}, "--set")
    return Config(sections)
