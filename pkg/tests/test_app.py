import json
import math
import subprocess
import sys

import numpy as np
import pytest

from decisionuq.app import (StudyConfig, emit_report, ingest_csv, normal_predictive_demo, run_dyke_replicates,
                            run_study, simulate_dyke_data, verify_theorems, water_level_rows, write_csv)
from decisionuq.app.cli import main
from decisionuq.app.dyke import risk_class
from decisionuq.app.study import run_risk
from decisionuq.exceptions import ConfigError, NumericalError
from decisionuq.rng import RngStream


def base_config(**overrides):
    cfg = {
        "model": "exponential",
        "prior": {"type": "inverse-gamma", "n0": 2, "s0": 10},
        "data": [6.0, 14.5, 9.25, 3.0, 21.0, 11.25, 8.0, 17.0],
        "quantity": {"type": "quantile", "alpha": 0.5},
        "losses": [{"type": "quadratic"}],
        "estimators": ["mle", "hpe", "bayes"],
        "montecarlo": {"posterior_draws": 20000, "predictive_draws": 20000, "sampler": "auto"},
        "seed": 7,
    }
    cfg.update(overrides)
    return cfg


COIN = base_config(model="bernoulli", prior={"type": "beta", "a": 0, "b": 0}, data=[1, 1, 1, 0, 1, 1, 1, 1],
                   quantity={"type": "mean"})


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return path


# ---------------------------------------------------------------- ingestion

def test_ingest_plain_column(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("2\n4\n6\n")
    assert ingest_csv(p).tolist() == [2.0, 4.0, 6.0]


def test_ingest_skips_header(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("discharge\n" + "\n".join(str(100 + i) for i in range(30)) + "\n")
    assert ingest_csv(p).size == 30


@pytest.mark.parametrize("text,line", [("1\nabc\n3\n", 2), ("x\n1\n2\nnan\n", 4), ("1\ninf\n", 2)])
def test_ingest_reports_line_numbers(tmp_path, text, line):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(ConfigError, match=f":{line}:"):
        ingest_csv(p)


def test_ingest_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        ingest_csv(tmp_path / "nope.csv")


def test_csv_round_trip_is_bit_exact(tmp_path):
    table = run_dyke_replicates(3, RngStream(1), posterior_draws=2000)
    p = tmp_path / "t.csv"
    table.write(p)
    col = table.columns.index("p_bay2")
    assert np.array_equal(ingest_csv(p, column=col), table.column("p_bay2"))
    assert p.read_bytes().count(b"\r") == 0


# ---------------------------------------------------------------- configuration

def test_missing_and_unknown_keys():
    cfg = base_config()
    del cfg["seed"]
    with pytest.raises(ConfigError, match="missing key"):
        StudyConfig.from_dict(cfg)
    with pytest.raises(ConfigError, match="unknown field"):
        StudyConfig.from_dict(base_config(extra=1))


@pytest.mark.parametrize("change,msg", [
    ({"model": "gumbel"}, "unknown model"),
    ({"prior": {"type": "beta", "a": 1, "b": 1}}, "does not fit model"),
    ({"estimators": ["mle", "median"]}, "estimators"),
    ({"montecarlo": {"posterior_draws": 10}}, ">= 100"),
    ({"montecarlo": {"sampler": "gibbs"}}, "sampler"),
    ({"seed": -3}, "seed"),
    ({"losses": [{"type": "weighted-absolute", "c1": 1, "c2": 9, "scale": "neglog10"}]}, "probability-valued"),
    ({"losses": []}, "non-empty"),
    ({"quantity": {"type": "quantile", "alpha": 1.5}}, "quantity"),
    ({"data": "missing.csv"}, "does not exist"),
])
def test_invalid_configurations(change, msg):
    with pytest.raises(ConfigError, match=msg):
        StudyConfig.from_dict(base_config(**change))


def test_log_quadratic_rejected_for_signed_quantity():
    cfg = base_config(model="normal", prior={"type": "normal-inverse-gamma", "mu0": 0, "kappa0": 1, "a0": 2, "b0": 2},
                      quantity={"type": "mean"}, losses=[{"type": "log-quadratic"}])
    with pytest.raises(ConfigError, match="positive quantity"):
        StudyConfig.from_dict(cfg)


def test_invalid_json_reports_position(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{"model": ')
    with pytest.raises(ConfigError, match="line 1"):
        StudyConfig.load(p)


# ---------------------------------------------------------------- studies

def test_coin_study_is_exact():
    rep = run_study(StudyConfig.from_dict(COIN))
    assert rep.value("hpe") == 7 / 8
    assert rep.value("bayes") == 7 / 8
    assert rep.value("mle") == 7 / 8


def test_light_bulb_study_values():
    losses = [{"type": "quadratic"}, {"type": "weighted-absolute", "c1": 1, "c2": 3}, {"type": "log-quadratic"}]
    rep = run_study(StudyConfig.from_dict(base_config(losses=losses)))
    assert rep.value("hpe") == pytest.approx((2**0.1 - 1) * 100, rel=1e-12)
    assert rep.value("bayes", "quadratic(c0=1.0)") == pytest.approx(7.7016, abs=1e-4)
    assert rep.value("mle") == pytest.approx(90 / 8 * math.log(2))
    assert len(rep.entries) == 9
    assert all(math.isfinite(e.value) for e in rep.entries)


def test_study_with_importance_sampler_matches_exact():
    cfg = base_config(montecarlo={"posterior_draws": 100000, "predictive_draws": 100000, "sampler": "importance"})
    rep = run_study(StudyConfig.from_dict(cfg))
    assert rep.posterior["source"] == "importance"
    assert rep.value("bayes") == pytest.approx(7.7016, abs=0.02)
    assert rep.value("hpe") == pytest.approx(7.1773, abs=0.1)


def test_improper_prior_cannot_be_sampled():
    cfg = dict(COIN, montecarlo={"posterior_draws": 1000, "predictive_draws": 1000, "sampler": "importance"})
    with pytest.raises(ConfigError, match="improper"):
        run_study(StudyConfig.from_dict(cfg))


def test_improper_posterior_names_the_count():
    cfg = dict(COIN, data=[1, 1, 1])
    with pytest.raises(ConfigError, match="failures=0"):
        run_study(StudyConfig.from_dict(cfg))


def test_dyke_study_report(tmp_path):
    x = simulate_dyke_data(1000, 2, 30, RngStream(2011))
    data = tmp_path / "q.csv"
    write_csv([{"discharge": v} for v in x], data)
    cfg = {
        "model": "weibull", "prior": {"type": "hierarchical-weibull"}, "data": str(data),
        "quantity": {"type": "flood-probability"},
        "losses": [{"type": "log-quadratic"}, {"type": "weighted-absolute", "c1": 1, "c2": 9, "scale": "neglog10"}],
        "estimators": ["mle", "hpe", "bayes"],
        "montecarlo": {"posterior_draws": 50000, "predictive_draws": 1000, "sampler": "auto"},
        "seed": 3, "truth": {"scale": 1000, "shape": 2},
    }
    rep = run_study(StudyConfig.from_dict(cfg))
    assert rep.truth["value"] == pytest.approx(0.013)
    bay1 = rep.value("bayes", "log-quadratic")
    bay2 = rep.value("bayes", "weighted-absolute(c1=1.0,c2=9.0) on neglog10")
    assert bay1 <= rep.value("hpe") <= bay2
    assert all(e.regret is not None and e.regret >= 0 for e in rep.entries)


def test_metropolis_fallback_on_poor_importance_proposal():
    data = list(simulate_dyke_data(1000, 2, 2000, RngStream(5)))
    cfg = {
        "model": "weibull", "prior": {"type": "hierarchical-weibull"}, "data": data,
        "quantity": {"type": "mean"}, "losses": [{"type": "quadratic"}], "estimators": ["bayes"],
        "montecarlo": {"posterior_draws": 3000, "predictive_draws": 1000, "sampler": "auto"}, "seed": 1,
    }
    rep = run_study(StudyConfig.from_dict(cfg))
    assert rep.posterior["source"] == "metropolis"
    assert rep.value("bayes") == pytest.approx(np.mean(data), rel=0.05)


def test_ess_floor_is_enforced():
    data = list(simulate_dyke_data(1000, 2, 2000, RngStream(5)))
    cfg = {
        "model": "weibull", "prior": {"type": "hierarchical-weibull"}, "data": data,
        "quantity": {"type": "mean"}, "losses": [{"type": "quadratic"}], "estimators": ["bayes"],
        "montecarlo": {"posterior_draws": 3000, "predictive_draws": 1000, "sampler": "importance"}, "seed": 1,
    }
    with pytest.warns(UserWarning), pytest.raises(NumericalError, match="hard floor 50"):
        run_study(StudyConfig.from_dict(cfg))


def test_json_report_is_deterministic(tmp_path):
    cfg = StudyConfig.from_dict(base_config(montecarlo={"posterior_draws": 5000, "predictive_draws": 5000,
                                                        "sampler": "importance"}))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    emit_report(run_study(cfg), a)
    emit_report(run_study(cfg), b)
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert "wall_clock_seconds" not in doc
    assert doc["config"]["seed"] == 7


def test_csv_report_has_header(tmp_path):
    p = tmp_path / "r.csv"
    emit_report(run_study(StudyConfig.from_dict(COIN)), p, "csv")
    lines = p.read_text().splitlines()
    assert lines[0].startswith("estimator,loss,value")
    assert len(lines) == 4
    with pytest.raises(ConfigError):
        emit_report(run_study(StudyConfig.from_dict(COIN)), p, "xml")


def test_risk_study_orders_estimators():
    cfg = base_config(prior={"type": "inverse-gamma", "n0": 3, "s0": 6}, data=None, quantity={"type": "mean"},
                      losses=[{"type": "weighted-absolute", "c1": 1, "c2": 3}],
                      risk={"sample_size": 3, "replicates": 2000})
    rows = {r["estimator"]: r for r in run_risk(StudyConfig.from_dict(cfg))}
    assert rows["bayes"]["risk"] < rows["hpe"]["risk"] < rows["mle"]["risk"]


# ---------------------------------------------------------------- dyke case study

def test_simulated_discharges():
    x = simulate_dyke_data(1000, 2, 30, RngStream(1))
    assert np.array_equal(x, simulate_dyke_data(1000, 2, 30, RngStream(1)))
    assert simulate_dyke_data(1000, 2, 1, RngStream(2)).item() > 0
    rows = water_level_rows(x)
    assert all(r["level"] > 50.0 for r in rows)
    with pytest.raises(ValueError):
        simulate_dyke_data(1000, 2, 0, RngStream(1))


def test_sample_median_sampling_distribution():
    # oracle: plain numpy Weibull draws, 400k samples of size 30 give 0.834
    g = np.random.default_rng(0)
    ref = np.median(1000 * g.weibull(2.0, (400_000, 30)), axis=1)
    p_ref = np.mean((ref >= 700) & (ref <= 1000))
    seeds = 2000
    med = np.array([np.median(simulate_dyke_data(1000, 2, 30, RngStream(s))) for s in range(seeds)])
    frac = np.mean((med >= 700) & (med <= 1000))
    assert abs(frac - p_ref) < 3 * math.sqrt(p_ref * (1 - p_ref) / seeds)


def test_dyke_replicate_invariants():
    t = run_dyke_replicates(20, RngStream(8), posterior_draws=20000)
    assert len(t.rows) == 20 and t.failures == 0
    assert np.all(t.column("p_bay1") <= t.column("p_hpe"))
    assert np.all(t.column("p_bay2") >= t.column("p_post_median"))
    assert np.all(t.column("p_true") == t.p_true)


def test_risk_classes():
    assert [risk_class(p) for p in (1e-4, 5e-3, 0.02)] == [0, 1, 2]


# ---------------------------------------------------------------- identity checks and normal demo

def test_verify_all_pass():
    items = verify_theorems(RngStream(1), predictive_draws=1_000_000)
    failed = [it.line() for it in items if not it.passed]
    assert not failed


def test_predictive_total_variance():
    passes = sum(normal_predictive_demo(RngStream(s), draws=50_000).total_variance_holds() for s in range(20))
    assert passes >= 18


def test_predictive_interval_wider_than_plug_in():
    # guaranteed: t quantile with 2a dof and the (kappa+1)/kappa factor both widen the interval
    from scipy import stats

    for s in range(20):
        demo = normal_predictive_demo(RngStream(s), draws=1000)
        p = demo.posterior
        plug = stats.norm(p.mu, math.sqrt(p.b / p.a)).ppf([0.05, 0.95])
        exact = demo.predictive_t.ppf([0.05, 0.95])
        assert exact[0] < plug[0] and exact[1] > plug[1]


@pytest.mark.xfail(reason="containment of the true 5-95% interval depends on the sample: about 43% of seeds "
                          "pass with this prior (computed from the exact Student-t predictive)", strict=False)
def test_predictive_interval_contains_true_interval():
    passes = sum(normal_predictive_demo(RngStream(s), draws=50_000).contains_true_interval() for s in range(20))
    assert passes >= 18


def test_normal_demo_curves():
    demo = normal_predictive_demo(RngStream(0), draws=2000)
    rows = demo.curve_rows()
    assert len(rows) == 201
    area = np.trapezoid([r["predictive_pdf"] for r in rows], [r["y"] for r in rows])
    assert area == pytest.approx(1.0, abs=0.01)


# ---------------------------------------------------------------- CLI

def test_cli_exit_codes(tmp_path, capsys):
    good = write_json(tmp_path / "good.json", COIN)
    assert main(["estimate", "--config", str(good), "--out", str(tmp_path / "o.json")]) == 0
    bad = write_json(tmp_path / "bad.json", dict(COIN, model="gumbel"))
    assert main(["estimate", "--config", str(bad), "--out", str(tmp_path / "o.json")]) == 2
    assert main(["estimate", "--config", str(tmp_path / "none.json"), "--out", str(tmp_path / "o.json")]) == 2
    numerics = write_json(tmp_path / "num.json", {
        "model": "weibull", "prior": {"type": "hierarchical-weibull"},
        "data": list(simulate_dyke_data(1000, 2, 2000, RngStream(5))), "quantity": {"type": "mean"},
        "losses": [{"type": "quadratic"}], "estimators": ["bayes"],
        "montecarlo": {"posterior_draws": 200, "predictive_draws": 200, "sampler": "importance"}, "seed": 1})
    with pytest.warns(UserWarning):
        assert main(["estimate", "--config", str(numerics), "--out", str(tmp_path / "o.json")]) == 3
    assert "hard floor" in capsys.readouterr().err


def test_cli_data_override_and_csv(tmp_path):
    data = tmp_path / "d.csv"
    data.write_text("lifetime\n" + "\n".join(["11.25"] * 8) + "\n")
    cfg = write_json(tmp_path / "c.json", base_config(data=None))
    out = tmp_path / "r.csv"
    assert main(["estimate", "--config", str(cfg), "--data", str(data), "--out", str(out), "--format", "csv"]) == 0
    assert "7.1773462536293" in out.read_text()


def test_cli_usage_error_exit_code():
    proc = subprocess.run([sys.executable, "-m", "decisionuq.app.cli", "dyke", "--replicates", "0", "--seed", "1",
                           "--out", "x.csv"], capture_output=True)
    assert proc.returncode == 2


def test_cli_verify_and_dyke(tmp_path):
    assert main(["verify", "--seed", "2", "--draws", "1000000"]) == 0
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["dyke", "--replicates", "4", "--seed", "9", "--out", str(a), "--draws", "2000"]) == 0
    assert main(["dyke", "--replicates", "4", "--seed", "9", "--out", str(b), "--draws", "2000",
                 "--workers", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()
