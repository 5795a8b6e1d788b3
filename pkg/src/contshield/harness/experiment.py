"""Batch experiment runner and metrics aggregation.

Experiments run ``episodes_per_seed`` episodes for each seed; episode i of
seed s uses the derived stream ``s * 100000 + i`` so results are
reproducible episode by episode and identical across shield variants
(common random numbers).  Episode work can be spread over a process pool;
all file writes happen in the parent, ordered by (seed, episode), so the
JSONL output is byte-identical for identical configs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from ..envs import (
    NavConfig,
    NavEnv,
    ParticleConfig,
    ParticleEnv,
    goal_velocities,
    make_policy,
    naive_velocities,
    shield_velocities,
)
from ..geometry import RobotGeometry
from ..shield import EpisodeRecord, Shield, ShieldConfig, run_episode


@dataclass(frozen=True)
class ExperimentConfig:
    env: str  # "nav" or "particle"
    policy: str
    shield: ShieldConfig
    geometry: RobotGeometry
    nav: NavConfig = field(default_factory=NavConfig)
    particle: ParticleConfig = field(default_factory=ParticleConfig)
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    episodes_per_seed: int = 100
    output_dir: str | None = None
    workers: int = 1
    save_trajectories: bool = False

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("need at least one seed")
        if self.env not in ("nav", "particle"):
            raise ValueError(f"unknown environment {self.env!r}")


def episode_stream(seed: int, index: int) -> int:
    return seed * 100000 + index


@dataclass
class SeedStats:
    seed: int
    episodes: int
    success: int
    collision: int
    timeout: int
    unsat_episodes: int
    unsat_events: int
    interventions: int
    steps: int
    reward: float
    latency_ms_total: float

    @property
    def rates(self) -> tuple[float, float, float]:
        n = self.episodes
        return (self.success / n, self.collision / n, self.timeout / n)


@dataclass
class MetricsReport:
    config_echo: dict
    per_seed: list[SeedStats]
    success_rate: float | None
    success_std: float | None
    collision_rate: float | None
    collision_std: float | None
    timeout_rate: float | None
    unsat_episodes: int
    unsat_events: int
    intervention_rate: float | None
    mean_steps: float | None
    mean_latency_ms: float | None

    def to_json_dict(self) -> dict:
        return {
            "config": self.config_echo,
            "success_rate": self.success_rate,
            "success_std": self.success_std,
            "collision_rate": self.collision_rate,
            "collision_std": self.collision_std,
            "timeout_rate": self.timeout_rate,
            "unsat_episodes": self.unsat_episodes,
            "unsat_events": self.unsat_events,
            "intervention_rate": self.intervention_rate,
            "mean_steps": self.mean_steps,
            "mean_latency_ms": self.mean_latency_ms,
            "per_seed": [{
                "seed": s.seed, "episodes": s.episodes, "success": s.success,
                "collision": s.collision, "timeout": s.timeout,
                "unsat_episodes": s.unsat_episodes,
            } for s in self.per_seed],
        }


def _run_nav_episode(cfg: ExperimentConfig, stream: int) -> EpisodeRecord:
    env = NavEnv(cfg.geometry, cfg.nav)
    shield = Shield(cfg.shield, cfg.geometry)
    policy = make_policy(cfg.policy, cfg.geometry)
    return run_episode(policy, env, shield, cfg.nav.horizon, stream)


def _run_particle_episode(cfg: ExperimentConfig, stream: int) -> EpisodeRecord:
    env = ParticleEnv(cfg.particle)
    env.reset(stream)
    shielded = cfg.shield.enable_collision
    interventions = 0
    outcome = "timeout"
    steps = 0
    for t in range(cfg.particle.horizon):
        if shielded:
            proposals = goal_velocities(env.positions, env.targets, cfg.particle)
            proposals, n = shield_velocities(env.positions, proposals, cfg.particle)
            interventions += n
        else:
            proposals = naive_velocities(env.positions, env.targets, cfg.particle)
        _, violated, done, flag = env.step(proposals)
        steps = t + 1
        if done:
            outcome = flag or "timeout"
            break
    return EpisodeRecord(
        seed=stream, outcome=outcome, steps=steps, reward=0.0,
        unsat_count=0, interventions=interventions, path_counts={},
        mean_latency_ms=0.0, trajectory=[])


def _run_seed_batch(args: tuple) -> tuple[int, list[EpisodeRecord]]:
    cfg, seed = args
    runner = _run_nav_episode if cfg.env == "nav" else _run_particle_episode
    records = []
    for i in range(cfg.episodes_per_seed):
        records.append(runner(cfg, episode_stream(seed, i)))
    return seed, records


def _aggregate_seed(seed: int, records: list[EpisodeRecord]) -> SeedStats:
    return SeedStats(
        seed=seed,
        episodes=len(records),
        success=sum(r.outcome == "success" for r in records),
        collision=sum(r.outcome == "collision" for r in records),
        timeout=sum(r.outcome == "timeout" for r in records),
        unsat_episodes=sum(r.unsat_count > 0 for r in records),
        unsat_events=sum(r.unsat_count for r in records),
        interventions=sum(r.interventions for r in records),
        steps=sum(r.steps for r in records),
        reward=sum(r.reward for r in records),
        latency_ms_total=sum(r.mean_latency_ms * max(r.steps, 1) for r in records),
    )


def run_experiment(cfg: ExperimentConfig) -> MetricsReport:
    """Run the full seed x episode grid and aggregate per-seed statistics."""
    tasks = [(cfg, seed) for seed in cfg.seeds]
    if cfg.workers > 1:
        with get_context("spawn").Pool(processes=cfg.workers) as pool:
            results = pool.map(_run_seed_batch, tasks)
    else:
        results = [_run_seed_batch(t) for t in tasks]
    results.sort(key=lambda sr: cfg.seeds.index(sr[0]))

    per_seed = [_aggregate_seed(seed, recs) for seed, recs in results]
    all_records: list[tuple[int, list[EpisodeRecord]]] = results

    n_eps = sum(s.episodes for s in per_seed)
    if n_eps == 0:
        report = MetricsReport(
            config_echo=_echo(cfg), per_seed=per_seed,
            success_rate=None, success_std=None, collision_rate=None,
            collision_std=None, timeout_rate=None, unsat_episodes=0,
            unsat_events=0, intervention_rate=None, mean_steps=None,
            mean_latency_ms=None)
    else:
        succ = np.array([s.rates[0] for s in per_seed])
        coll = np.array([s.rates[1] for s in per_seed])
        tout = np.array([s.rates[2] for s in per_seed])
        total_steps = sum(s.steps for s in per_seed)
        report = MetricsReport(
            config_echo=_echo(cfg),
            per_seed=per_seed,
            success_rate=float(succ.mean()),
            success_std=float(succ.std()),  # population std over seed means
            collision_rate=float(coll.mean()),
            collision_std=float(coll.std()),
            timeout_rate=float(tout.mean()),
            unsat_episodes=sum(s.unsat_episodes for s in per_seed),
            unsat_events=sum(s.unsat_events for s in per_seed),
            intervention_rate=(sum(s.interventions for s in per_seed) / total_steps
                               if total_steps else None),
            mean_steps=total_steps / n_eps,
            mean_latency_ms=(sum(s.latency_ms_total for s in per_seed) / total_steps
                             if total_steps else None),
        )

    if cfg.output_dir is not None:
        _write_outputs(cfg, report, all_records)
    return report


def _echo(cfg: ExperimentConfig) -> dict:
    sh = cfg.shield
    return {
        "env": cfg.env, "policy": cfg.policy,
        "seeds": list(cfg.seeds), "episodes_per_seed": cfg.episodes_per_seed,
        "shield": {
            "lq": sh.lq, "gp": sh.gp, "ga": sh.ga,
            "collision": sh.enable_collision, "loop": sh.enable_loop,
            "optimizer": sh.enable_optimizer,
            "corridor_margin": sh.corridor_margin,
            "cap_margin": sh.cap_margin,
            "threshold_margin": sh.threshold_margin,
        },
    }


MATRIX_LQS = (1, 13, 100)
MATRIX_GAS = (3, 5, 30)

# Cluttered stress protocol used by the unsat-matrix mode: tighter passages
# and a mid-grade policy keep shielded episodes alive long enough to reach
# the wedged states where loop exclusions can empty the feasible set.
MATRIX_NAV = NavConfig(n_rects=6, n_circles=3, min_size=0.1, max_size=0.22,
                       obstacle_clearance=0.16)
MATRIX_POLICY = "moderate"


@dataclass
class MatrixCell:
    lq: int
    ga: int
    verdict: str
    unsat_episodes: int
    episodes: int


def run_unsat_matrix(geometry: RobotGeometry, base_shield: ShieldConfig,
                     episodes: int = 100, seeds: tuple[int, ...] = (1,),
                     nav: NavConfig | None = None, policy: str = MATRIX_POLICY,
                     lqs: tuple[int, ...] = MATRIX_LQS,
                     gas: tuple[int, ...] = MATRIX_GAS,
                     domain=None, workers: int = 1) -> list[MatrixCell]:
    """Empirical unsat counts and offline verdicts over an (lq, ga) grid."""
    import dataclasses as _dc

    from ..realizability import check_realizability

    nav = nav or MATRIX_NAV
    per_seed = max(1, episodes // len(seeds))
    cells: list[MatrixCell] = []
    for lq in lqs:
        for ga in gas:
            shield_cfg = _dc.replace(base_shield, lq=lq, ga=ga)
            verdict = check_realizability(shield_cfg, geometry, domain)
            ecfg = ExperimentConfig(
                env="nav", policy=policy, shield=shield_cfg,
                geometry=geometry, nav=nav, seeds=seeds,
                episodes_per_seed=per_seed, workers=workers)
            report = run_experiment(ecfg)
            cells.append(MatrixCell(
                lq=lq, ga=ga, verdict=verdict.status.value,
                unsat_episodes=report.unsat_episodes,
                episodes=per_seed * len(seeds)))
    return cells


def render_unsat_matrix(cells: list[MatrixCell]) -> str:
    lqs = sorted({c.lq for c in cells})
    gas = sorted({c.ga for c in cells})
    by_key = {(c.lq, c.ga): c for c in cells}
    n = by_key[(lqs[0], gas[0])].episodes
    lines = [f"unsat episodes out of {n}; R = realizable, U = unrealizable"]
    header = f"{'':>8s}" + "".join(f"{'ga=' + str(g):>12s}" for g in gas)
    lines.append(header)
    for lq in lqs:
        row = f"{'lq=' + str(lq):>8s}"
        for ga in gas:
            c = by_key[(lq, ga)]
            mark = "R" if c.verdict == "realizable" else \
                ("U" if c.verdict == "unrealizable" else "?")
            row += f"{mark + ' ' + str(c.unsat_episodes):>12s}"
        lines.append(row)
    return "\n".join(lines) + "\n"


def _write_outputs(cfg: ExperimentConfig, report: MetricsReport,
                   results: list[tuple[int, list[EpisodeRecord]]]) -> None:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = []
    for seed, records in results:
        for i, rec in enumerate(records):
            d = rec.to_json_dict()
            d["experiment_seed"] = seed
            d["episode_index"] = i
            lines.append(json.dumps(d, sort_keys=True))
    (out / "episodes.jsonl").write_text("\n".join(lines) + ("\n" if lines else ""),
                                        encoding="utf-8")
    (out / "report.json").write_text(
        json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    if cfg.save_trajectories:
        traj_dir = out / "trajectories"
        traj_dir.mkdir(exist_ok=True)
        for seed, records in results:
            for i, rec in enumerate(records):
                if rec.trajectory:
                    name = f"seed{seed}_ep{i:04d}.csv"
                    (traj_dir / name).write_text(rec.trajectory_csv(),
                                                 encoding="utf-8")
