"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as the
criteria complete.  The navigation criteria share one deterministic batch
(5 seeds x 100 episodes per cell) built once per session.
"""

import time

import numpy as np
import pytest

from contshield.constraints import Observation, ShieldHistory
from contshield.envs import (
    NavConfig,
    ParticleConfig,
    ParticleEnv,
    goal_velocities,
    naive_velocities,
    shield_velocities,
)
from contshield.geometry import (
    Action,
    Pose,
    RobotGeometry,
    default_beam_angles,
)
from contshield.harness import ExperimentConfig, run_experiment, run_unsat_matrix
from contshield.harness.experiment import MATRIX_GAS, MATRIX_LQS
from contshield.realizability import (
    AdversarialDomain,
    RealizabilityStatus,
    check_realizability,
    confirm_counterexample,
)
from contshield.shield import Shield, ShieldConfig, SolverPath
from contshield.solver import SolverConfig, brute_force_closest, solve_closest
from contshield.speclang import (
    FragmentClass,
    classify_fragment,
    eval_bounded,
    format_spec,
    rewrite_anticipation,
)

from gen_specs import consistent_traces, random_anticipation_spec
from test_geometry import _maxturn_safety_trials

SEEDS = (1, 2, 3, 4, 5)
EPISODES = 100
POLICIES = ("expert", "moderate", "unsafe")
REGIMES = ("noshield", "collision", "c+loop", "optimizer")

# Deployment configuration for the navigation benchmarks: dense sensor ring
# plus conservative margins that cover what can hide between beams.
ACCEPT_MARGIN = 0.012


def _accept_geom() -> RobotGeometry:
    return RobotGeometry(beam_angles=default_beam_angles(96, span_degrees=360))


def _regime_cfg(regime: str) -> ShieldConfig:
    base = dict(lq=13, gp=13, ga=30, corridor_margin=ACCEPT_MARGIN,
                cap_margin=ACCEPT_MARGIN, threshold_margin=ACCEPT_MARGIN,
                solver=SolverConfig(timeout_ms=1000.0))
    if regime == "noshield":
        return ShieldConfig(enable_collision=False, enable_loop=False,
                            enable_optimizer=False, **base)
    if regime == "collision":
        return ShieldConfig(enable_loop=False, enable_optimizer=False, **base)
    if regime == "c+loop":
        return ShieldConfig(enable_optimizer=False, **base)
    return ShieldConfig(**base)


def _report(criterion: int, ok: bool, detail: str) -> bool:
    print(f"ACCEPTANCE {criterion} {'PASS' if ok else 'FAIL'}: {detail}")
    return ok


@pytest.fixture(scope="session")
def nav_batch():
    """(policy, regime) -> MetricsReport over 5 seeds x 100 episodes."""
    geom = _accept_geom()
    reports = {}
    cell_times = {}
    for policy in POLICIES:
        for regime in REGIMES:
            if regime == "noshield" and policy != "unsafe":
                continue
            ecfg = ExperimentConfig(
                env="nav", policy=policy, shield=_regime_cfg(regime),
                geometry=geom, nav=NavConfig(), seeds=SEEDS,
                episodes_per_seed=EPISODES, workers=2)
            t0 = time.monotonic()
            reports[(policy, regime)] = run_experiment(ecfg)
            cell_times[(policy, regime)] = time.monotonic() - t0
    reports["cell_times"] = cell_times
    return reports


def test_criterion_1_zero_collisions_with_shield(nav_batch):
    collisions = {p: nav_batch[(p, "optimizer")].collision_rate
                  for p in POLICIES}
    # the deployed full-shield batch: 3 policies x 5 seeds x 100 episodes
    elapsed = sum(nav_batch["cell_times"][(p, "optimizer")] for p in POLICIES)
    shielded_regimes = [(p, r) for p in POLICIES
                        for r in ("collision", "c+loop", "optimizer")]
    side = {pr: nav_batch[pr].collision_rate for pr in shielded_regimes}
    ok = all(v == 0.0 for v in collisions.values()) \
        and all(v == 0.0 for v in side.values()) \
        and elapsed < 300.0
    assert _report(
        1, ok,
        f"collision rates {collisions} across every shielded regime "
        f"{sorted(set(side.values()))}; 1500-episode batch in {elapsed:.0f}s "
        f"(< 300s)")


def test_criterion_2_unsafe_needs_the_shield(nav_batch):
    rate = nav_batch[("unsafe", "noshield")].collision_rate
    ok = rate >= 0.5
    assert _report(2, ok, f"unshielded unsafe-policy collision rate {rate:.2f} "
                          f">= 0.5")


def test_criterion_3_loop_shield_never_hurts_success(nav_batch):
    deltas = {}
    ok = True
    for p in POLICIES:
        with_loop = nav_batch[(p, "c+loop")].success_rate
        without = nav_batch[(p, "collision")].success_rate
        deltas[p] = (without, with_loop)
        ok &= with_loop >= without
    assert _report(3, ok, "success collision-only vs collision+loop: " +
                   ", ".join(f"{p}: {a:.2f}->{b:.2f}" for p, (a, b) in deltas.items()))


def test_criterion_4_optimizer_optimality_and_benefit(nav_batch, geom, thresholds):
    # (a) the closest-action solver matches a 10x finer dense grid optimum
    from test_solver import _random_case
    rng = np.random.default_rng(41)
    cfg = SolverConfig()
    worst_excess = 0.0
    for _ in range(1000):
        c, p = _random_case(geom, thresholds, rng)
        mine = solve_closest(c, p, cfg)
        ref = brute_force_closest(c, p, n0=401, n1=4001)
        assert mine.is_safe and ref is not None
        excess = abs(mine.action.a1 - p.a1) - abs(ref.a1 - p.a1)
        worst_excess = max(worst_excess, excess)
    opt_ok = worst_excess <= cfg.a1_resolution + 1e-12

    # (b) the optimizer column is never worse than the plain solver column
    sol = nav_batch[("unsafe", "c+loop")].success_rate
    opt = nav_batch[("unsafe", "optimizer")].success_rate
    bench_ok = opt >= sol
    assert _report(
        4, opt_ok and bench_ok,
        f"grid-optimality worst excess {worst_excess:.2e} <= eps1 "
        f"{cfg.a1_resolution:.2e}; unsafe success Sol {sol:.2f} vs "
        f"Optimizer {opt:.2f}")


def test_criterion_5_realizability_unsat_correspondence():
    geom = RobotGeometry()  # default 23-beam probe configuration
    base = ShieldConfig(lq=13, gp=13, ga=30)
    cells = run_unsat_matrix(geom, base, episodes=EPISODES, seeds=(1,),
                             workers=2)
    by_key = {(c.lq, c.ga): c for c in cells}

    monotone = True
    for ga in MATRIX_GAS:
        col = [by_key[(lq, ga)].unsat_episodes for lq in MATRIX_LQS]
        monotone &= all(a <= b for a, b in zip(col, col[1:]))
    for lq in MATRIX_LQS:
        row = [by_key[(lq, ga)].unsat_episodes for ga in MATRIX_GAS]
        monotone &= all(a >= b for a, b in zip(row, row[1:]))

    confirmed = True
    green_clean = True
    for c in cells:
        cfg = ShieldConfig(lq=c.lq, gp=13, ga=c.ga)
        if c.verdict == "unrealizable":
            v = check_realizability(cfg, geom)
            confirmed &= confirm_counterexample(v, cfg, geom)
        elif c.verdict == "realizable":
            green_clean &= c.unsat_episodes == 0

    grid_txt = {f"lq{c.lq}/ga{c.ga}": f"{c.verdict[0].upper()}:{c.unsat_episodes}"
                for c in cells}
    ok = monotone and confirmed and green_clean
    assert _report(5, ok, f"matrix {grid_txt}; monotone={monotone}, "
                          f"witnesses confirmed={confirmed}, "
                          f"realizable cells clean={green_clean}")


def test_criterion_6_rewriter_equivalence():
    rng = np.random.default_rng(6)
    specs = traces = 0
    for _ in range(200):
        doc, length = random_anticipation_spec(rng)
        assert classify_fragment(doc) is FragmentClass.ANTICIPATION
        rw = rewrite_anticipation(doc)
        assert classify_fragment(rw) is FragmentClass.NCS
        assert "prev(" not in format_spec(rw)
        specs += 1
        for trace in consistent_traces(doc, length):
            traces += 1
            assert eval_bounded(doc, trace) == eval_bounded(rw, trace), \
                f"disagreement on {trace} for\n{format_spec(doc)}"
    ok = specs == 200
    assert _report(6, ok, f"{specs} rewritten specs agree with the original "
                          f"on all {traces} enumerated traces; no prev() "
                          f"markers remain")


def test_criterion_7_threshold_soundness(geom, thresholds):
    t0 = time.monotonic()
    rng = np.random.default_rng(7)
    overlaps = _maxturn_safety_trials(geom, thresholds, 100000, rng)
    elapsed = time.monotonic() - t0
    ok = overlaps == 0 and elapsed < 60.0
    assert _report(7, ok, f"100000 max-turn trials, {overlaps} footprint "
                          f"overlaps beyond thresholds, {elapsed:.1f}s (< 60s)")


def test_criterion_8_particle_world():
    cfg = ParticleConfig()
    env = ParticleEnv(cfg)
    violations = successes = 0
    for seed in range(100):
        env.reset(seed)
        for _ in range(cfg.horizon):
            v = goal_velocities(env.positions, env.targets, cfg)
            v2, _ = shield_velocities(env.positions, v, cfg)
            _, violated, done, flag = env.step(v2)
            violations += violated
            if done:
                successes += flag == "success"
                break
    head_on = 0
    for seed in range(10):
        env.reset(seed)
        for _ in range(cfg.horizon):
            _, violated, done, _ = env.step(
                naive_velocities(env.positions, env.targets, cfg))
            head_on += violated
            if done:
                break
    ok = violations == 0 and successes >= 90 and head_on >= 1
    assert _report(8, ok, f"shielded: {violations} violations, "
                          f"{successes}/100 successes (>= 90); unshielded "
                          f"head-on violations {head_on} (>= 1)")


def test_criterion_9_offline_online_contract(geom, thresholds):
    domain = AdversarialDomain()
    configs = [ShieldConfig(lq=1, gp=13, ga=30),
               ShieldConfig(lq=13, gp=13, ga=30, enable_loop=False)]
    floors = np.asarray(thresholds.footprint_exit) + domain.standoff
    rng = np.random.default_rng(9)
    pose = Pose(0.5, 0.5, 0.0)
    total_unsat = 0
    checked = 0
    for cfg in configs:
        verdict = check_realizability(cfg, geom, domain)
        assert verdict.status is RealizabilityStatus.REALIZABLE
        shield = Shield(cfg, geom)
        for _ in range(5000):
            lidar = rng.uniform(floors, geom.max_range)
            h = ShieldHistory(cfg.lq)
            for _ in range(int(rng.integers(0, cfg.lq + 1))):
                h.push(pose, Action(float(rng.uniform(-geom.l0, geom.l0)),
                                    float(rng.uniform(-geom.l1, geom.l1))),
                       shield.grid)
            obs = Observation(tuple(float(x) for x in lidar), pose,
                              (0.9, 0.9), (0.0, 0.5))
            proposal = Action(float(rng.uniform(-geom.l0, geom.l0)),
                              float(rng.uniform(-geom.l1, geom.l1)))
            out = shield.step(proposal, obs, h)
            checked += 1
            total_unsat += out.path is SolverPath.UNSAT
    ok = total_unsat == 0 and checked == 10000
    assert _report(9, ok, f"{checked} random shielded steps across verified-"
                          f"realizable configs, {total_unsat} unsat events")
