import json

import pytest

from contshield.harness import (
    ConfigError,
    ExperimentConfig,
    MatrixCell,
    episode_stream,
    load_config,
    render_unsat_matrix,
    run_experiment,
)
from contshield.harness.cli import main


# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------

def test_defaults_construct_everything():
    cfg = load_config()
    geom = cfg.geometry()
    assert geom.n_beams == 23
    sh = cfg.shield_config()
    assert (sh.lq, sh.gp, sh.ga) == (13, 13, 30)
    assert cfg.solver_config().a1_resolution == pytest.approx(geom.l1 / 200)
    cfg.nav_config()
    cfg.particle_config()
    cfg.adversarial_domain()


def test_config_file_and_overrides(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"shield": {"lq": 7}, "geometry": {"beams": 31}}))
    cfg = load_config(str(p), overrides=["shield.ga=5", "experiment.policy=unsafe"])
    assert cfg.shield_config().lq == 7
    assert cfg.shield_config().ga == 5
    assert cfg.geometry().n_beams == 31
    assert cfg.section("experiment")["policy"] == "unsafe"


def test_config_rejects_unknown_keys(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"shield": {"lqq": 7}}))
    with pytest.raises(ConfigError, match="unknown key"):
        load_config(str(p))
    with pytest.raises(ConfigError, match="unknown config section"):
        load_config(None, overrides=["nope.x=1"])
    with pytest.raises(ConfigError, match="section.key"):
        load_config(None, overrides=["justakey=1"])


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

def _tiny_experiment(geom, out=None, **kw):
    cfg = load_config()
    return ExperimentConfig(
        env="nav", policy="expert", shield=cfg.shield_config(),
        geometry=geom, nav=cfg.nav_config(),
        seeds=(1, 2), episodes_per_seed=3, output_dir=out, **kw)


def test_report_rates_sum_to_one_per_seed(geom):
    report = run_experiment(_tiny_experiment(geom))
    for s in report.per_seed:
        assert s.success + s.collision + s.timeout == s.episodes
        sr, cr, tr = s.rates
        assert sr + cr + tr == pytest.approx(1.0)


def test_empty_batch_reports_null_rates(geom):
    cfg = load_config()
    ecfg = ExperimentConfig(
        env="nav", policy="expert", shield=cfg.shield_config(),
        geometry=geom, nav=cfg.nav_config(), seeds=(1,), episodes_per_seed=0)
    report = run_experiment(ecfg)
    assert report.success_rate is None
    assert report.collision_rate is None
    assert report.unsat_episodes == 0


def test_jsonl_byte_identical_across_runs(geom, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    run_experiment(_tiny_experiment(geom, out=str(out1)))
    run_experiment(_tiny_experiment(geom, out=str(out2)))
    b1 = (out1 / "episodes.jsonl").read_bytes()
    b2 = (out2 / "episodes.jsonl").read_bytes()
    assert b1 == b2 and len(b1) > 0
    assert json.loads((out1 / "report.json").read_text())["success_rate"] is not None


def test_worker_pool_matches_serial(geom, tmp_path):
    out1, out2 = tmp_path / "serial", tmp_path / "pool"
    run_experiment(_tiny_experiment(geom, out=str(out1), workers=1))
    run_experiment(_tiny_experiment(geom, out=str(out2), workers=2))
    assert (out1 / "episodes.jsonl").read_bytes() == \
        (out2 / "episodes.jsonl").read_bytes()


def test_particle_experiment_runs(geom):
    cfg = load_config()
    ecfg = ExperimentConfig(
        env="particle", policy="goal", shield=cfg.shield_config(),
        geometry=geom, particle=cfg.particle_config(),
        seeds=(0,), episodes_per_seed=3)
    report = run_experiment(ecfg)
    assert report.collision_rate == 0.0


def test_render_unsat_matrix_layout():
    cells = [MatrixCell(1, 3, "unrealizable", 4, 100),
             MatrixCell(1, 30, "realizable", 0, 100)]
    text = render_unsat_matrix(cells)
    assert "U 4" in text and "R 0" in text
    assert "lq=1" in text and "ga=30" in text


def test_trajectory_files_written(geom, tmp_path):
    out = tmp_path / "t"
    run_experiment(_tiny_experiment(geom, out=str(out), save_trajectories=True))
    files = sorted((out / "trajectories").glob("*.csv"))
    assert len(files) == 6
    header = files[0].read_text().splitlines()[0]
    assert header == "step,x,y,r,a0,a1,intervened,path"


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def test_cli_check_spec_ok(capsys):
    assert main(["check-spec", "specs/walker.shieldspec"]) == 0
    out = capsys.readouterr().out
    assert "Anticipation" in out
    assert "X in(x" in out  # rewritten form printed


def test_cli_check_spec_missing_file():
    assert main(["check-spec", "/nonexistent.shieldspec"]) == 1


def test_cli_check_spec_ncs(capsys):
    assert main(["check-spec", "specs/nav_collision.shieldspec"]) == 0
    assert "NCS" in capsys.readouterr().out


def test_cli_realizability_exit_codes(tmp_path, capsys):
    assert main(["realizability", "--lq", "1", "--ga", "30"]) == 0
    out_dir = tmp_path / "rz"
    assert main(["realizability", "--lq", "1", "--ga", "3",
                 "--out", str(out_dir)]) == 2
    verdict = json.loads((out_dir / "verdict.json").read_text())
    assert verdict["status"] == "unrealizable"
    assert verdict["witness"]["excluded_cells"]
    out = capsys.readouterr().out
    assert "confirmed by dense scan: True" in out


def test_cli_run_quick_and_gate(tmp_path, capsys):
    out = tmp_path / "run"
    rc = main(["run", "--quick", "--episodes", "2", "--seeds", "1",
               "--out", str(out)])
    assert rc == 0
    assert (out / "episodes.jsonl").exists()
    # the gate refuses unrealizable configs
    rc = main(["run", "--quick", "--episodes", "1", "--seeds", "1",
               "--require-realizable", "--set", "shield.lq=1",
               "--set", "shield.ga=3"])
    assert rc == 2


def test_cli_replay_writes_csv(tmp_path, capsys):
    out = tmp_path / "ep.csv"
    rc = main(["replay", "--seed", "1", "--episode", "0", "--out", str(out)])
    assert rc == 0
    assert out.read_text().startswith("step,x,y,r,a0,a1,intervened,path")


def test_cli_thresholds_table(capsys):
    assert main(["thresholds"]) == 0
    out = capsys.readouterr().out
    assert "T_right" in out and len(out.splitlines()) == 24


def test_cli_unknown_flag_rejected():
    with pytest.raises(SystemExit) as e:
        main(["run", "--no-such-flag"])
    assert e.value.code == 1  # usage errors are validation errors


def test_episode_stream_is_injective():
    seen = set()
    for seed in (1, 2, 3):
        for i in range(1000):
            s = episode_stream(seed, i)
            assert s not in seen
            seen.add(s)
