"""Self-checks of the predictive-estimation identities, run by ``decisionuq verify``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import distributions as dist
from ..estimators import (conjugate_hpe, double_monte_carlo, hpe_as_predictor_check, hpe_quantile_closed,
                          not_bayes_demo)
from ..inference import BernoulliBeta, ExpInvGamma, conjugate_posterior, conjugate_weighted_posterior
from ..model import Exceedance, MeanOf
from ..rng import RngStream

COIN = (1, 1, 1, 0, 1, 1, 1, 1)
LIGHT_BULB_PRIOR = ExpInvGamma(2.0, 10.0)
LIGHT_BULB_N, LIGHT_BULB_SUM = 8, 90.0


@dataclass
class CheckItem:
    name: str
    passed: bool
    value: float
    expected: float
    tolerance: float
    note: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (f"{flag} {self.name}: value={self.value!r} expected={self.expected!r} "
                f"tolerance={self.tolerance!r} {self.note}").rstrip()


def light_bulb_data() -> np.ndarray:
    """Eight lifetimes summing to 90 (only the count and sum matter)."""
    return np.full(LIGHT_BULB_N, LIGHT_BULB_SUM / LIGHT_BULB_N)


def verify_theorems(rng: RngStream | None = None, predictive_draws: int = 1_000_000) -> list[CheckItem]:
    """Run each identity check and return one item per check."""
    rng = RngStream(0) if rng is None else rng
    items = []

    # predictive mean of a Bernoulli under the Haldane prior
    post = conjugate_posterior(BernoulliBeta(0.0, 0.0), COIN)
    v = conjugate_hpe(MeanOf(), dist.Bernoulli, post)
    items.append(CheckItem("coin-predictive-probability", v == 7 / 8, v, 7 / 8, 0.0))

    # predictive mean and exceedance equal posterior means of phi (double MC, 3 se)
    data = light_bulb_data()
    ig = conjugate_posterior(LIGHT_BULB_PRIOR, data)
    # deterministic quantile grid: the only MC noise left is the predictive draw
    wp = conjugate_weighted_posterior(LIGHT_BULB_PRIOR, data, 100_000)
    ys = double_monte_carlo(dist.Exponential, wp, predictive_draws, rng.child(1)).draws
    for name, spec, h in (("mean", MeanOf(), ys), ("exceedance(10)", Exceedance(10.0), (ys > 10.0).astype(float))):
        exact = conjugate_hpe(spec, dist.Exponential, ig)
        se = float(np.std(h, ddof=1) / math.sqrt(h.size))
        est = float(np.mean(h))
        items.append(CheckItem(f"predictive-{name}-equals-posterior-mean", abs(est - exact) <= 3 * se, est, exact,
                               3 * se, "(3 mc se)"))

    # predictive median: closed form and simulation
    closed = hpe_quantile_closed(LIGHT_BULB_PRIOR.n0, LIGHT_BULB_PRIOR.s0, data, 0.5)
    ref = (2.0**0.1 - 1.0) * 100.0
    items.append(CheckItem("predictive-median-closed-form", abs(closed - ref) <= 1e-10, closed, ref, 1e-10))
    ys_exact = double_monte_carlo(dist.Exponential, wp, predictive_draws, rng.child(2))
    emp = ys_exact.quantile(0.5)
    items.append(CheckItem("predictive-median-double-mc", abs(emp - ref) < 0.03, emp, ref, 0.03))

    # identical quantile posteriors, different predictive quantiles
    demo = not_bayes_demo(10, 100.0)
    items.append(CheckItem("quantile-posteriors-identical", demo.posteriors_identical,
                           demo.posteriors[1].scale, demo.posteriors[0].scale, 1e-12))
    for k, target in enumerate((10.354, 10.727)):
        items.append(CheckItem(f"predictive-quantile-alpha={demo.alphas[k]}", abs(demo.hpe[k] - target) < 1e-3,
                               demo.hpe[k], target, 1e-3))
    gap = demo.hpe[1] - demo.hpe[0]
    items.append(CheckItem("predictive-quantiles-differ", gap > 0.37, gap, 0.37, 0.0, "(lower bound)"))

    # predictive quantile minimizes the expected check loss of a new observation
    chk = hpe_as_predictor_check(0.5, wp, dist.Exponential, 200_000, rng.child(3))
    items.append(CheckItem("predictive-quantile-minimizes-check-loss", chk.agree, chk.argmin, chk.hpe, chk.tolerance))
    return items
