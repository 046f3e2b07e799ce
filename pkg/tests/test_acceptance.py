"""Acceptance suite: one test per acceptance criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines.
"""
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from decisionuq import distributions as dist
from decisionuq.app import StudyConfig, run_dyke_replicates
from decisionuq.app.study import run_risk
from decisionuq.estimators import (DecisionProblem, bayes_estimate, conjugate_hpe, double_monte_carlo,
                                   hpe_quantile, hpe_quantile_closed, not_bayes_demo, quantile_posterior_exponential)
from decisionuq.inference import (BernoulliBeta, ExpInvGamma, asymptotic_approx, conjugate_posterior,
                                  conjugate_weighted_posterior, mle_fit, plug_in, sample_posterior_is)
from decisionuq.loss import Quadratic
from decisionuq.model import Exceedance, MeanOf, Quantile
from decisionuq.risk import EstimatorHandle, frequentist_risk
from decisionuq.rng import RngStream

LIGHT = np.full(8, 90 / 8)


def report(label, ok, detail):
    print(f"{'PASS' if ok else 'FAIL'} {label}: {detail}")
    assert ok, detail


def test_criterion_1_coin_predictive_probability_exact():
    post = conjugate_posterior(BernoulliBeta(0.0, 0.0), [1, 1, 1, 0, 1, 1, 1, 1])
    v = conjugate_hpe(MeanOf(), dist.Bernoulli, post)
    report("criterion 1 (coin HPE = 7/8 exactly)", v == 7 / 8, f"value={v!r}")


def test_criterion_2_light_bulb_closed_forms():
    prior = ExpInvGamma(2.0, 10.0)
    post = conjugate_posterior(prior, LIGHT)
    qpost = quantile_posterior_exponential(2.0, 10.0, LIGHT, 0.5)
    hpe = hpe_quantile_closed(2.0, 10.0, LIGHT, 0.5)
    exact_hpe = (2**0.1 - 1) * 100
    wp = conjugate_weighted_posterior(prior, LIGHT, 100_000)
    hpe_mc = hpe_quantile(0.5, wp, dist.Exponential, 1_000_000, RngStream(2))
    g = dist.InverseGamma(2.0, 10.0)
    is_post = sample_posterior_is(dist.Exponential, lambda rng, k: {"mean": g.sample(rng, k)}, None, LIGHT, 100_000,
                                  RngStream(3))
    bayes_is = bayes_estimate(DecisionProblem(Quantile(0.5), Quadratic(), is_post, dist.Exponential))
    checks = {
        "posterior IG(10,100)": post.shape == 10.0 and post.scale == 100.0,
        "quantile posterior IG(10,69.3147)": qpost.shape == 10.0 and abs(qpost.scale - 100 * math.log(2)) < 1e-10
        and abs(qpost.scale - 69.3147) < 1e-4,
        "HPE closed 7.1773": abs(hpe - exact_hpe) < 1e-10 and abs(hpe - 7.1773) < 1e-4,
        "HPE double MC": abs(hpe_mc - exact_hpe) <= 0.03,
        "IS quadratic Bayes 7.7016": abs(bayes_is - 7.7016) <= 0.02,
    }
    report("criterion 2 (light-bulb closed forms)", all(checks.values()),
           f"checks={checks} hpe={hpe!r} hpe_mc={hpe_mc!r} bayes_is={bayes_is!r} ess={is_post.ess:.0f}")


def test_criterion_3_identical_posteriors_different_predictive_quantiles():
    demo = not_bayes_demo(10, 100.0)
    ok = (demo.posteriors_identical and abs(demo.hpe[0] - 10.354) < 1e-3 and abs(demo.hpe[1] - 10.727) < 1e-3
          and demo.hpe[1] - demo.hpe[0] > 0.37)
    report("criterion 3 (not-Bayes demonstration)", ok, f"hpe={demo.hpe} identical={demo.posteriors_identical}")


def test_criterion_4_predictive_mean_equals_posterior_mean():
    g = np.random.default_rng(2024)
    hits = {"identity": 0, "indicator": 0}
    for case in range(20):
        prior = ExpInvGamma(float(g.uniform(1.5, 6.0)), float(g.uniform(2.0, 50.0)))
        data = g.exponential(float(g.uniform(2.0, 20.0)), int(g.integers(3, 30)))
        ig = conjugate_posterior(prior, data)
        rng = RngStream(7, case)
        wp = conjugate_weighted_posterior(prior, data, 200_000)
        ys = double_monte_carlo(dist.Exponential, wp, 200_000, rng.child(1)).draws
        t = float(ig.expectation())
        for name, spec, h in (("identity", MeanOf(), ys), ("indicator", Exceedance(t), (ys > t).astype(float))):
            exact = conjugate_hpe(spec, dist.Exponential, ig)
            se = float(np.std(h, ddof=1) / math.sqrt(h.size))
            hits[name] += abs(float(np.mean(h)) - exact) <= 3 * se
    report("criterion 4 (double MC vs posterior mean, 3 se)", min(hits.values()) >= 19, f"hits out of 20: {hits}")


@pytest.fixture(scope="module")
def dyke_table():
    return run_dyke_replicates(200, RngStream(2011), n=30, posterior_draws=100_000, workers=4)


def test_criterion_5_dyke_study(dyke_table):
    t = dyke_table
    p = t.p_true
    jensen = np.all(t.column("p_bay1") <= t.column("p_hpe"))
    cautious = np.all(t.column("p_bay2") >= t.column("p_post_median"))
    medians = {e: float(np.median(t.column(e))) for e in ("p_mle", "p_hpe", "p_bay1", "p_bay2")}
    within = all(p / 4 <= m <= 4 * p for m in medians.values())
    frac_bay2, frac_mle = t.fraction_above("p_bay2"), t.fraction_above("p_mle")
    ok = jensen and cautious and within and frac_bay2 > frac_mle and len(t.rows) == 200
    report("criterion 5 (dyke study, 200 replicates)", ok,
           f"jensen={jensen} cautious={cautious} medians={medians} above_1e-2: bay2={frac_bay2} mle={frac_mle} "
           f"failures={t.failures}")


def test_criterion_6_bayes_risk_dominance():
    base = {
        "model": "exponential", "prior": {"type": "inverse-gamma", "n0": 3, "s0": 6}, "data": None,
        "quantity": {"type": "mean"}, "losses": [{"type": "weighted-absolute", "c1": 1, "c2": 3}],
        "estimators": ["mle", "hpe", "bayes"], "montecarlo": {"posterior_draws": 1000, "predictive_draws": 1000},
        "seed": 6,
    }
    ok, lines = True, []
    for n in (3, 10, 30):
        cfg = StudyConfig.from_dict(dict(base, risk={"sample_size": n, "replicates": 10_000, "workers": 4}))
        rows = {r["estimator"]: r for r in run_risk(cfg)}
        b = rows["bayes"]
        for other in ("mle", "hpe"):
            o = rows[other]
            se = math.hypot(b["mc_std_error"], o["mc_std_error"])
            ok &= b["risk"] <= o["risk"]
            if n == 3:
                ok &= o["risk"] - b["risk"] > 3 * se
            gap = (o["risk"] - b["risk"]) / se
            lines.append(f"n={n} bayes={b['risk']:.4f} {other}={o['risk']:.4f} gap/se={gap:.1f}")
    report("criterion 6 (Bayes risk dominance, WA(1,3))", ok, "; ".join(lines))


def test_criterion_7_mle_correctness():
    x = np.array([1.0, 2.0, 3.0])
    fit = mle_fit(dist.Weibull, x)

    # oracle: brute-force log-likelihood grid, refined once around the best cell
    def grid_argmax(s_lo, s_hi, k_lo, k_hi):
        s, k = np.meshgrid(np.linspace(s_lo, s_hi, 801), np.linspace(k_lo, k_hi, 801), indexing="ij")
        ll = len(x) * np.log(k) - len(x) * k * np.log(s) + (k - 1) * np.log(x).sum()
        ll -= sum((xi / s) ** k for xi in x)
        i = np.unravel_index(np.argmax(ll), ll.shape)
        return s[i], k[i]

    s0, k0 = grid_argmax(0.5, 6.0, 0.5, 8.0)
    best = grid_argmax(s0 - 0.02, s0 + 0.02, k0 - 0.02, k0 + 0.02)
    weib = abs(fit["scale"] - best[0]) <= 0.02 and abs(fit["shape"] - best[1]) <= 0.02
    est = EstimatorHandle("mle", lambda d, rng: plug_in(MeanOf(), dist.Exponential, mle_fit(dist.Exponential, d)))
    rep = frequentist_risk(est, dist.Exponential, {"mean": 4.0}, MeanOf(), Quadratic(), 10, 10_000, RngStream(7))
    risk_ok = abs(rep.risk - 1.6) <= 3 * rep.mc_std_error
    report("criterion 7 (MLE correctness)", weib and risk_ok,
           f"weibull fit=({fit['scale']:.4f}, {fit['shape']:.4f}) grid=({best[0]:.4f}, {best[1]:.4f}); "
           f"risk={rep.risk:.4f} se={rep.mc_std_error:.4f}")


def test_criterion_8a_delta_method_variance():
    ap = asymptotic_approx("mle-sampling", dist.Exponential, {"mean": 4.0}, Exceedance(2.0), 10)
    g = RngStream(8).generator
    xbar = g.exponential(4.0, (10_000, 10)).mean(axis=1)
    sim = float(np.var(plug_in(Exceedance(2.0), dist.Exponential, {"mean": xbar}), ddof=1))
    rel = abs(ap.variance - sim) / sim
    report("criterion 8a (delta-method variance within 10%)", rel <= 0.10,
           f"delta={ap.variance:.6g} simulated={sim:.6g} relative gap={rel:.3f}")


def test_criterion_8b_posterior_normal_approximation():
    # vague prior: isolates the normal approximation from the O(1/n) prior shift
    prior = ExpInvGamma(1e-3, 1e-3)
    x = RngStream(9).generator.exponential(4.0, 200)
    ig = conjugate_posterior(prior, x)
    ap = asymptotic_approx("posterior", dist.Exponential, mle_fit(dist.Exponential, x), MeanOf(), 200)
    grid = np.linspace(ap.center - 8 * ap.sd, ap.center + 8 * ap.sd, 20_001)
    gap = float(np.max(np.abs(ig.cdf(grid) - ap.cdf(grid))))
    report("criterion 8b (posterior normal approximation, sup-norm < 0.03)", gap < 0.03, f"sup gap={gap:.4f}")


def _cli(*args):
    proc = subprocess.run([sys.executable, "-m", "decisionuq.app.cli", *args], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


def test_criterion_9_cli_determinism(tmp_path):
    root = Path(__file__).resolve().parents[1] / "demos" / "configs"
    same = {}

    def twice(name, make):
        a, b = tmp_path / f"{name}_a", tmp_path / f"{name}_b"
        out_a, out_b = make(a, 1), make(b, 3)
        same[name] = a.read_bytes() == b.read_bytes() and out_a == out_b

    twice("estimate", lambda p, w: _cli("estimate", "--config", str(root / "dyke.json"), "--out", str(p),
                                        "--seed", "11"))
    twice("estimate-csv", lambda p, w: _cli("estimate", "--config", str(root / "light_bulb.json"), "--out", str(p),
                                            "--format", "csv"))
    twice("dyke", lambda p, w: _cli("dyke", "--replicates", "6", "--seed", "4", "--out", str(p), "--draws", "5000",
                                    "--workers", str(w)))
    twice("risk", lambda p, w: _cli("risk", "--config", str(root / "light_bulb_risk.json"), "--out", str(p),
                                    "--workers", str(w)))

    def verify(p, w):
        out = _cli("verify", "--seed", "3", "--draws", "200000")
        p.write_text(out)
        return out

    twice("verify", verify)
    report("criterion 9 (CLI determinism)", all(same.values()), f"identical={same}")
