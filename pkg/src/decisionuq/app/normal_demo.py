"""Posterior predictive of a normal sample: how much wider than the truth it gets.

Ten observations from ``N(10, 1)`` and a vague normal--inverse-Gamma prior
give a Student-t predictive.  The demo compares its 5th--95th percentile
interval with that of the true density and checks the law of total
variance ``Var(Y | D) = E[var | D] + Var(mean | D) >= E[var | D]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .. import distributions as dist
from ..estimators import double_monte_carlo
from ..inference import NormalNIG, conjugate_posterior, conjugate_weighted_posterior
from ..rng import RngStream

VAGUE_PRIOR = NormalNIG(mu0=0.0, kappa0=0.01, a0=1.0, b0=1.0)
LEVELS = (0.05, 0.95)


@dataclass
class NormalPredictiveDemo:
    data: np.ndarray
    true_mean: float
    true_sd: float
    posterior: object
    predictive_draws: np.ndarray
    true_interval: tuple
    predictive_interval: tuple
    quantile_se: tuple
    predictive_var: float
    predictive_var_se: float
    posterior_mean_var: float

    @property
    def predictive_t(self):
        """Exact predictive: Student-t with ``2a`` dof, centre ``mu``, scale ``sqrt(b (kappa+1) / (a kappa))``."""
        p = self.posterior
        return stats.t(2 * p.a, p.mu, math.sqrt(p.b * (p.kappa + 1) / (p.a * p.kappa)))

    def contains_true_interval(self, n_se: float = 3.0) -> bool:
        """Predictive interval extends past both true percentiles by more than ``n_se`` mc se."""
        (lo, hi), (tlo, thi), (slo, shi) = self.predictive_interval, self.true_interval, self.quantile_se
        return lo + n_se * slo < tlo and hi - n_se * shi > thi

    def total_variance_holds(self, n_se: float = 3.0) -> bool:
        return self.predictive_var + n_se * self.predictive_var_se >= self.posterior_mean_var

    def curve_rows(self, grid=None) -> list[dict]:
        """Plot-ready ``(y, true_pdf, predictive_pdf)`` rows; observations are in ``data``."""
        if grid is None:
            grid = np.linspace(self.true_mean - 5 * self.true_sd, self.true_mean + 5 * self.true_sd, 201)
        true = stats.norm(self.true_mean, self.true_sd).pdf(grid)
        pred = self.predictive_t.pdf(grid)
        return [{"y": float(y), "true_pdf": float(a), "predictive_pdf": float(b)} for y, a, b in zip(grid, true, pred)]


def _quantile_se(draws, alpha, density) -> float:
    # asymptotic sd of an empirical quantile: sqrt(a(1-a)/I) / f(q)
    return math.sqrt(alpha * (1 - alpha) / draws.size) / density


def normal_predictive_demo(rng: RngStream, n: int = 10, mean: float = 10.0, sd: float = 1.0,
                           prior: NormalNIG = VAGUE_PRIOR, draws: int = 100_000) -> NormalPredictiveDemo:
    """Simulate data, sample the predictive by double Monte-Carlo and summarize it."""
    x = np.asarray(dist.Normal(mean, sd * sd).sample(rng.child(0), n), dtype=float)
    post = conjugate_posterior(prior, x)
    wp = conjugate_weighted_posterior(prior, x, draws, rng.child(1))
    y = double_monte_carlo(dist.Normal, wp, draws, rng.child(2)).draws
    q = np.quantile(y, LEVELS)
    kde = stats.gaussian_kde(y[: min(draws, 20_000)])
    se = tuple(_quantile_se(y, a, float(kde(qi)[0])) for a, qi in zip(LEVELS, q))
    var = float(np.var(y, ddof=1))
    # sd of a sample variance: sqrt((m4 - var**2) / I)
    m4 = float(np.mean((y - y.mean()) ** 4))
    var_se = math.sqrt(max(m4 - var * var, 0.0) / y.size)
    true_iv = tuple(float(v) for v in stats.norm(mean, sd).ppf(LEVELS))
    return NormalPredictiveDemo(x, mean, sd, post, y, true_iv, (float(q[0]), float(q[1])), se, var, var_se,
                                float(np.mean(wp.points["var"])))
