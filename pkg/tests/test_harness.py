import csv
import json
import math

import numpy as np
import pytest

from tailbetti import cli
from tailbetti.density import PointCloud
from tailbetti.harness import (
    PRESETS,
    ConfigError,
    ConvergenceReport,
    ExperimentConfig,
    OutputError,
    emit,
    load_report,
    preset,
    run_convergence,
)
from tailbetti.tail import CapacityError, component_profile, tail_betti, truncated_betti


def small(name="ex31-iii", **kw):
    cfg = preset(name)
    cfg.n_values = [512, 1024]
    cfg.trials = 3
    cfg.mc_budget = 2000
    cfg.limit_M = cfg.k + 3
    cfg.inner_budget = 64
    cfg.t_grid = {"min": 0.0, "max": 1.0, "points": 5}
    for key, val in kw.items():
        setattr(cfg, key, val)
    cfg.validate()
    return cfg


@pytest.fixture(scope="module")
def report():
    return run_convergence(small(M=3))


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_validate(name):
    cfg = preset(name)
    spec = cfg.regime_spec()
    assert spec.rule in cfg.regime["rule"]
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


def test_preset_limits_and_scalers():
    spec = preset("ex31-iii").regime_spec()
    m = spec.model
    assert spec.lam() == pytest.approx(m.normC / spec.param)
    # R_n^d = (c n)^(d/alpha): the n^(d/alpha) scaler with the c^(d/alpha) factor folded in
    assert spec.scaler(1e6) == pytest.approx((spec.param * 1e6) ** (m.d / m.alpha), rel=1e-12)
    assert preset("ex32-i").regime_spec().limit_description().startswith("xi")


def test_unknown_preset():
    with pytest.raises(ConfigError):
        preset("ex33")


def test_config_errors():
    base = preset("ex31-i").to_dict()
    for key, val in [("n_values", [1024, 512]), ("trials", 0), ("t_grid", {"min": 0, "max": 2, "points": 3}),
                     ("M", 2), ("format", "xml"), ("k", 5)]:
        block = dict(base, **{key: val})
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(block)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(dict(base, bogus=1))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"model": base["model"], "k": 1})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(dict(base, regime={"rule": "power-case-ii", "params": {"b": 2.0}}))


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        ExperimentConfig.load(bad)
    with pytest.raises(OutputError):
        ExperimentConfig.load(tmp_path / "missing.json")


def test_report_structure(report):
    cfg = small(M=3)
    assert len(report.rows) == len(cfg.n_values) * cfg.trials
    assert report.regime["label"] == "weak-core-regime"
    assert report.scaler["name"] == "R_n^d"
    for row in report.rows:
        assert all(isinstance(b, int) and b >= 0 for b in row["beta"])
        assert all(a <= b for a, b in zip(row["truncated"], row["beta"]))
    assert all(s["sup_distance"] >= 0 for s in report.summary)
    assert report.invariants == {"checked": True, "violations": 0, "truncated_exceeds_full": 0}


def test_rerun_is_bit_identical(report):
    again = run_convergence(small(M=3))
    assert json.dumps(again.to_dict(), sort_keys=True) == json.dumps(report.to_dict(), sort_keys=True)


def test_workers_do_not_change_report(report):
    other = run_convergence(small(M=3), workers=2)
    assert json.dumps(other.to_dict(), sort_keys=True) == json.dumps(report.to_dict(), sort_keys=True)


def test_json_round_trip(report, tmp_path):
    path = tmp_path / "r.json"
    emit(report, "json", path)
    assert load_report(path) == report
    assert load_report(path).config["seed"] == 0


def test_csv_row_count_and_summary(report, tmp_path):
    path = tmp_path / "r.csv"
    main, summary = emit(report, "csv", path)
    rows = list(csv.reader(open(main)))
    assert rows[0] == ["n", "trial", "t", "beta", "scaled"]
    assert len(rows) - 1 == sum(report.config["trials"] * len(report.t) for _ in report.config["n_values"])
    lines = open(summary).read().splitlines()
    meta = {ln[2:].split(":", 1)[0]: json.loads(ln.split(":", 1)[1]) for ln in lines if ln.startswith("#")}
    assert meta["config"]["seed"] == report.config["seed"]
    assert meta["scaler"]["name"] == "R_n^d"
    body = [ln for ln in lines if not ln.startswith("#")]
    assert body[0] == "n,t,mean,stderr,limit,limit_stderr"
    assert len(body) - 1 == len(report.summary) * len(report.t)


def test_empty_report_gives_header_only_csv(tmp_path):
    empty = ConvergenceReport(config={}, regime={}, scaler={}, t=[], limit={"mean": [], "stderr": []})
    path = tmp_path / "e.csv"
    emit(empty, "csv", path)
    assert open(path).read() == "n,trial,t,beta,scaled\n"


def test_emit_unwritable(report, tmp_path):
    with pytest.raises(OutputError, match="nope"):
        emit(report, "json", tmp_path / "nope" / "r.json")


def test_truncated_never_exceeds_full_on_dense_cloud():
    rng = np.random.default_rng(5)
    pts = rng.uniform(0, 3, (60, 2))
    cloud = PointCloud(pts, 0, np.arange(60))
    for t in np.linspace(0.2, 1.0, 9):
        prof = component_profile(cloud, 0.0, 1, t)
        full = tail_betti(cloud, 0.0, 1, t)
        assert prof.beta() == full
        for M in (3, 4, 6, 60):
            assert truncated_betti(prof, M) <= full
        assert truncated_betti(prof, 60) == full


def test_sparse_trend_example():
    # trend check for the power-law, b = 4 rule at the stated desk scale
    cfg = preset("ex31-ii")
    cfg.trials = 50
    rep = run_convergence(cfg)
    dist = rep.sup_distances()
    inversions = sum(b > a for a, b in zip(dist, dist[1:]))
    last = rep.summary[-1]
    assert inversions <= 1
    assert last["sup_distance"] <= 3 * last["pooled_se"], (
        f"final sup distance {last['sup_distance']:.4g} vs 3 pooled SE {3 * last['pooled_se']:.4g}; "
        f"tail Betti counts were {sorted({b for r in rep.rows for b in r['beta']})}"
    )


# ------------------------------------------------------------------- CLI


def run_cli(*argv):
    return cli.main([str(a) for a in argv])


def test_cli_preset_and_config_round_trip(tmp_path):
    path = tmp_path / "c.json"
    assert run_cli("preset", "ex32-ii", "--seed", 9, "--out", path) == 0
    cfg = ExperimentConfig.load(path)
    assert cfg.seed == 9 and cfg.regime["rule"] == "exp-case-ii"


def test_cli_sample_and_betti(tmp_path):
    cpath = tmp_path / "c.json"
    block = small().to_dict()
    cpath.write_text(json.dumps(block))
    out = tmp_path / "cloud.csv"
    assert run_cli("sample", "--config", cpath, "--n", 100, "--out", out) == 0
    rows = list(csv.reader(open(out)))
    assert rows[0] == ["id", "x1", "x2"] and len(rows) == 101
    out = tmp_path / "b.json"
    assert run_cli("betti", "--config", cpath, "--n", 512, "--out", out, "--format", "json") == 0
    data = json.load(open(out))
    assert len(data["beta"]) == 5 and data["n"] == 512


def test_cli_limit(tmp_path):
    out = tmp_path / "l.json"
    assert run_cli("limit", "--family", "mu", "--d", 2, "--k", 1, "--i", 3, "--alpha", 4,
                   "--budget", 2000, "--seed", 4, "--out", out) == 0
    data = json.load(open(out))
    assert data["mean"] > 0 and data["samples"] == 2000 and data["seed"] == 4
    out = tmp_path / "x.json"
    assert run_cli("limit", "--family", "xi", "--d", 2, "--k", 1, "--i", 3, "--c", 1,
                   "--budget", 2000, "--out", out) == 0
    assert json.load(open(out))["params"]["c"] == 1.0


def test_cli_converge_csv(tmp_path):
    cpath = tmp_path / "c.json"
    cpath.write_text(json.dumps(small().to_dict()))
    out = tmp_path / "run.csv"
    assert run_cli("converge", "--config", cpath, "--out", out, "--format", "csv") == 0
    assert (tmp_path / "run.summary.csv").exists()


def test_cli_exit_codes(tmp_path, monkeypatch):
    assert run_cli("preset", "nope") == 2
    assert run_cli("limit", "--family", "mu", "--d", 2, "--k", 1, "--i", 3, "--alpha", 1.5) == 2
    assert run_cli("limit", "--family", "mu", "--d", 2, "--k", 1, "--i", 3) == 2
    assert run_cli("converge", "--preset", "ex31-i") == 2
    assert run_cli("sample", "--config", tmp_path / "missing.json") == 4
    assert run_cli("preset", "ex31-i", "--out", tmp_path / "no" / "such" / "dir.json") == 4

    def boom(*a, **k):
        raise CapacityError("too many subsets")

    monkeypatch.setattr(cli, "tail_betti_curve", boom)
    assert run_cli("betti", "--preset", "ex31-i", "--n", 512) == 3
