"""
Bayes risk of three estimators
==============================

Exponential lifetimes with an IG(3, 6) prior, estimated under a weighted
absolute loss that penalizes underestimation three times as much.  The Bayes
rule has the smallest average loss at every sample size.
"""

from decisionuq.app import StudyConfig
from decisionuq.app.study import run_risk

base = {
    "model": "exponential", "prior": {"type": "inverse-gamma", "n0": 3, "s0": 6}, "data": None,
    "quantity": {"type": "mean"}, "losses": [{"type": "weighted-absolute", "c1": 1, "c2": 3}],
    "estimators": ["mle", "hpe", "bayes"], "montecarlo": {"posterior_draws": 1000, "predictive_draws": 1000},
    "seed": 6,
}
for n in (3, 10, 30):
    cfg = StudyConfig.from_dict(dict(base, risk={"sample_size": n, "replicates": 2000}))
    for row in run_risk(cfg):
        print(f"n={n:2d} {row['estimator']:5s} risk={row['risk']:.4f} +/- {row['mc_std_error']:.4f}")
