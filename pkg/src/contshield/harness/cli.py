"""Command-line interface.

Subcommands:

* ``check-spec FILE``   parse, classify and (when applicable) rewrite a
  ``.shieldspec`` file;
* ``realizability``     offline verdict for one shield configuration, or a
  full (lq x ga) sweep with empirical unsat counts (``--sweep``);
* ``run``               batch experiments with metrics reports;
* ``replay``            re-run one recorded episode and emit its
  trajectory CSV;
* ``thresholds``        print the per-beam turn-threshold table.

Exit codes: 0 success, 1 validation/usage error, 2 unrealizable verdict
(so CI pipelines can gate deployments on it).
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import json
import sys
from pathlib import Path

from ..envs import POLICY_NAMES
from ..geometry import SWEEP_MARGIN, precompute_turn_thresholds
from ..realizability import (
    RealizabilityStatus,
    check_realizability,
    confirm_counterexample,
)
from ..shield import Shield, run_episode
from ..speclang import (
    FragmentClass,
    SpecError,
    classify_fragment,
    format_spec,
    parse_spec,
    rewrite_anticipation,
)
from .config import ConfigError, load_config
from .experiment import (
    ExperimentConfig,
    episode_stream,
    render_unsat_matrix,
    run_experiment,
    run_unsat_matrix,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNREALIZABLE = 2


class _ArgumentParser(argparse.ArgumentParser):
    """Exit with code 1 on usage errors; 2 is reserved for unrealizable."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--set", dest="overrides", action="append", default=[],
                   metavar="SECTION.KEY=VALUE", help="override a config key")


def _build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="contshield",
        description="Runtime action shield: spec tooling, offline "
                    "realizability checking and simulation benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_ArgumentParser)

    p = sub.add_parser("check-spec", help="parse/classify/rewrite a spec file")
    p.add_argument("file")

    p = sub.add_parser("realizability", help="offline realizability verdict")
    _add_common(p)
    p.add_argument("--lq", type=int, help="override queue length")
    p.add_argument("--ga", type=int, help="override action grid")
    p.add_argument("--gp", type=int, help="override pose grid")
    p.add_argument("--budget", type=int, help="abstract-cell budget")
    p.add_argument("--sweep", action="store_true",
                   help="run the full (lq x ga) matrix with empirical counts")
    p.add_argument("--episodes", type=int, default=100,
                   help="episodes per sweep cell")
    p.add_argument("--out", help="output directory for reports")

    p = sub.add_parser("run", help="run a batch experiment")
    _add_common(p)
    p.add_argument("--env", choices=("nav", "particle"))
    p.add_argument("--policy", choices=POLICY_NAMES + ("goal",))
    p.add_argument("--seeds", type=int, nargs="+")
    p.add_argument("--episodes", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--quick", action="store_true",
                   help="2 seeds x 20 episodes smoke protocol")
    p.add_argument("--out", help="output directory")
    p.add_argument("--save-trajectories", action="store_true")
    p.add_argument("--require-realizable", action="store_true",
                   help="refuse to run when the shield config is unrealizable")

    p = sub.add_parser("replay", help="re-run one episode, write its CSV")
    _add_common(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--episode", type=int, default=0)
    p.add_argument("--policy", choices=POLICY_NAMES)
    p.add_argument("--out", required=True, help="CSV path")

    p = sub.add_parser("thresholds", help="print the turn-threshold table")
    _add_common(p)
    return parser


def _cmd_check_spec(args) -> int:
    try:
        text = Path(args.file).read_text(encoding="utf-8")
        doc = parse_spec(text)
    except FileNotFoundError:
        print(f"error: no such file {args.file!r}", file=sys.stderr)
        return EXIT_ERROR
    except SpecError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    for w in doc.warnings:
        print(f"warning: {w}", file=sys.stderr)
    cls = classify_fragment(doc)
    print(f"fragment class: {cls.value}")
    print(f"declarations: {len(doc.declarations)}  assumptions: "
          f"{len(doc.assumptions)}  guarantees: {len(doc.guarantees)}")
    if cls is FragmentClass.ANTICIPATION:
        print("rewritten without prev():")
        print(format_spec(rewrite_anticipation(doc)), end="")
    elif cls is FragmentClass.CROSS_STATE:
        print("document relates values across steps and cannot be rewritten")
        return EXIT_ERROR
    return EXIT_OK


def _cmd_realizability(args) -> int:
    cfg = load_config(args.config, args.overrides)
    geom = cfg.geometry()
    domain = cfg.adversarial_domain()
    shield_cfg = cfg.shield_config()
    overrides = {k: getattr(args, k) for k in ("lq", "ga", "gp")
                 if getattr(args, k) is not None}
    if overrides:
        shield_cfg = dataclasses.replace(shield_cfg, **overrides)
    out_dir = Path(args.out) if args.out else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)

    if args.sweep:
        print(f"domain size per cell: "
              f"{domain.size(geom, precompute_turn_thresholds(geom))}")
        cells = run_unsat_matrix(geom, shield_cfg, episodes=args.episodes,
                                 domain=domain)
        text = render_unsat_matrix(cells)
        print(text, end="")
        if out_dir:
            (out_dir / "unsat_matrix.txt").write_text(text, encoding="utf-8")
            data = [dataclasses.asdict(c) for c in cells]
            (out_dir / "unsat_matrix.json").write_text(
                json.dumps(data, indent=2) + "\n", encoding="utf-8")
        return EXIT_OK

    th = precompute_turn_thresholds(geom)
    print(f"domain size: {domain.size(geom, th)} abstract cells")
    verdict = check_realizability(shield_cfg, geom, domain, budget=args.budget)
    print(json.dumps(verdict.to_json_dict(), indent=2))
    if out_dir:
        (out_dir / "verdict.json").write_text(
            json.dumps(verdict.to_json_dict(), indent=2) + "\n",
            encoding="utf-8")
    if verdict.status is RealizabilityStatus.UNREALIZABLE:
        confirmed = confirm_counterexample(verdict, shield_cfg, geom)
        print(f"counterexample confirmed by dense scan: {confirmed}")
        return EXIT_UNREALIZABLE
    return EXIT_OK


def _cmd_run(args) -> int:
    cfg = load_config(args.config, args.overrides)
    exp = cfg.section("experiment")
    env = args.env or exp["env"]
    policy = args.policy or exp["policy"]
    seeds = tuple(args.seeds if args.seeds else exp["seeds"])
    episodes = args.episodes if args.episodes is not None \
        else exp["episodes_per_seed"]
    workers = args.workers if args.workers is not None else exp["workers"]
    if args.quick:
        seeds = seeds[:2]
        episodes = min(episodes, 20)

    geom = cfg.geometry()
    shield_cfg = cfg.shield_config()
    if args.require_realizable:
        verdict = check_realizability(shield_cfg, geom, cfg.adversarial_domain())
        if verdict.status is not RealizabilityStatus.REALIZABLE:
            print(f"refusing to run: shield config verdict is "
                  f"{verdict.status.value}", file=sys.stderr)
            return EXIT_UNREALIZABLE

    ecfg = ExperimentConfig(
        env=env, policy=policy if env == "nav" else "goal",
        shield=shield_cfg, geometry=geom,
        nav=cfg.nav_config(), particle=cfg.particle_config(),
        seeds=seeds, episodes_per_seed=episodes,
        output_dir=args.out, workers=workers,
        save_trajectories=args.save_trajectories)
    report = run_experiment(ecfg)
    print(json.dumps(report.to_json_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_replay(args) -> int:
    cfg = load_config(args.config, args.overrides)
    exp = cfg.section("experiment")
    geom = cfg.geometry()
    from ..envs import NavEnv, make_policy
    env = NavEnv(geom, cfg.nav_config())
    shield = Shield(cfg.shield_config(), geom)
    policy = make_policy(args.policy or exp["policy"], geom)
    stream = episode_stream(args.seed, args.episode)
    rec = run_episode(policy, env, shield, cfg.nav_config().horizon, stream)
    Path(args.out).write_text(rec.trajectory_csv(), encoding="utf-8")
    print(f"episode seed={args.seed} index={args.episode}: outcome="
          f"{rec.outcome} steps={rec.steps} -> {args.out}")
    return EXIT_OK


def _cmd_thresholds(args) -> int:
    cfg = load_config(args.config, args.overrides)
    geom = cfg.geometry()
    sh = cfg.shield_config()
    th = precompute_turn_thresholds(
        geom, margin=SWEEP_MARGIN + sh.threshold_margin)
    print(f"{'beam':>4s} {'angle(deg)':>10s} {'T_right':>9s} "
          f"{'T_left':>9s} {'body_exit':>9s}")
    for i, theta in enumerate(geom.beam_angles):
        print(f"{i:>4d} {math.degrees(theta):>10.2f} {th.right[i]:>9.4f} "
              f"{th.left[i]:>9.4f} {th.footprint_exit[i]:>9.4f}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "check-spec":
            return _cmd_check_spec(args)
        if args.command == "realizability":
            return _cmd_realizability(args)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "replay":
            return _cmd_replay(args)
        if args.command == "thresholds":
            return _cmd_thresholds(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
