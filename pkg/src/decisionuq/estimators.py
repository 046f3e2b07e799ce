"""Bayes, plug-in and heuristic predictive estimation over a weighted posterior.

The Bayes estimate minimizes the posterior expected loss.  For the three
built-in losses the minimizer is known in closed form (posterior mean,
posterior quantile of order ``c1/(c1+c2)``, geometric posterior mean); any
other callable loss goes through a golden-section search.

The heuristic predictive estimate (HPE) takes the characteristic of the
posterior predictive distribution of ``Y``.  For expectations it coincides
with the posterior mean of ``phi``, so no nested simulation is needed; for
quantiles it is the quantile of a double Monte-Carlo predictive sample.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import distributions as dist
from .inference import WeightedPosterior
from .loss import LogQuadratic, Quadratic, WeightedAbsolute
from .model import Exceedance, MeanOf, Quantile, family_at, log_qoi_eval, qoi_eval
from .rng import RngStream, as_generator, shard_streams

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f, lo: float, hi: float, rtol: float = 1e-10, max_iter: int = 1000) -> float:
    """Minimize a unimodal ``f`` on ``[lo, hi]`` by golden-section search."""
    if not hi > lo:
        return float(lo)
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if hi - lo <= rtol * max(abs(lo), abs(hi), 1e-300):
            break
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = f(x2)
    return float(0.5 * (lo + hi))


def weighted_quantile(values, weights, alpha: float) -> float:
    """Smallest value whose cumulative normalized weight reaches ``alpha``."""
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    order = np.argsort(v, kind="stable")
    cum = np.cumsum(w[order])
    cum /= cum[-1]
    # absorb rounding in the cumulative sum so exact fractions hit their atom
    k = int(np.searchsorted(cum, alpha - 1e-12, side="left"))
    return float(v[order][min(k, v.size - 1)])


def empirical_quantile(draws, alpha: float) -> float:
    """Lower empirical quantile: the ``ceil(alpha * I)``-th order statistic."""
    y = np.sort(np.asarray(draws, dtype=float))
    k = max(int(math.ceil(alpha * y.size - 1e-9)), 1)
    return float(y[k - 1])


@dataclass
class DecisionProblem:
    """Quantity, loss and posterior defining a Bayes decision."""

    spec: object
    loss: object
    posterior: WeightedPosterior
    model: type

    @cached_property
    def phi(self) -> np.ndarray:
        return np.asarray(qoi_eval(self.spec, self.model, self.posterior.points), dtype=float)

    @cached_property
    def log_phi(self) -> np.ndarray:
        return np.asarray(log_qoi_eval(self.spec, self.model, self.posterior.points), dtype=float)

    def _checked_log_phi(self):
        w = self.posterior.weights
        bad = (w > 0) & ~np.isfinite(self.log_phi)
        if np.any(bad):
            raise ValueError("log-quadratic loss needs phi > 0 on every posterior draw")
        return np.where(w > 0, self.log_phi, 0.0)


def posterior_expected_loss(problem: DecisionProblem, d: float) -> float:
    """Weighted Monte-Carlo average of ``C(phi(theta_i), d)``."""
    w = problem.posterior.weights
    if isinstance(problem.loss, LogQuadratic):
        if not d > 0:
            raise ValueError("log-quadratic loss needs d > 0")
        return float(np.dot(w, (problem._checked_log_phi() - math.log(d)) ** 2))
    return float(np.dot(w, np.asarray(problem.loss(problem.phi, d), dtype=float)))


def minimize_expected_loss(problem: DecisionProblem, rtol: float = 1e-10) -> float:
    """Golden-section search over the posterior range of ``phi`` widened by 10%."""
    if isinstance(problem.loss, LogQuadratic):
        lp = problem._checked_log_phi()[problem.posterior.weights > 0]
        lo, hi = lp.min(), lp.max()
        pad = 0.1 * (hi - lo)
        z = golden_section(lambda t: posterior_expected_loss(problem, math.exp(t)), lo - pad, hi + pad, rtol=rtol)
        return math.exp(z)
    phi = problem.phi[problem.posterior.weights > 0]
    lo, hi = float(phi.min()), float(phi.max())
    pad = 0.1 * (hi - lo)
    return golden_section(lambda d: posterior_expected_loss(problem, d), lo - pad, hi + pad, rtol=rtol)


def bayes_estimate(problem: DecisionProblem, method: str = "auto") -> float:
    """Bayes decision for ``problem``.

    ``method="auto"`` uses the closed form for built-in losses and golden
    section otherwise; ``method="minimize"`` always searches numerically.
    """
    loss = problem.loss
    post = problem.posterior
    if method == "minimize":
        return minimize_expected_loss(problem)
    if method != "auto":
        raise ValueError("method must be 'auto' or 'minimize'")
    if isinstance(loss, Quadratic):
        return post.mean(problem.phi)
    if isinstance(loss, WeightedAbsolute):
        return weighted_quantile(problem.phi, post.weights, loss.alpha)
    if isinstance(loss, LogQuadratic):
        return math.exp(post.mean(problem._checked_log_phi()))
    return minimize_expected_loss(problem)


def bayes_estimate_closed(loss, posterior: dist.DistFamily) -> float:
    """Bayes estimate of the parameter itself under a univariate closed-form posterior."""
    if isinstance(loss, Quadratic):
        return float(posterior.expectation())
    if isinstance(loss, WeightedAbsolute):
        return float(posterior.quantile(loss.alpha))
    if isinstance(loss, LogQuadratic):
        return math.exp(posterior.mean_log())
    raise ValueError(f"no closed form for {loss!r}")


# --------------------------------------------------------------------------
# Heuristic predictive estimation
# --------------------------------------------------------------------------

@dataclass
class PredictiveSample:
    """Draws from the posterior predictive of ``Y`` and the stream that produced them."""

    draws: np.ndarray
    parent_seed: str = ""

    def quantile(self, alpha: float) -> float:
        return empirical_quantile(self.draws, alpha)

    def mean(self, h=None) -> float:
        y = self.draws if h is None else np.vectorize(h, otypes=[float])(self.draws)
        return float(np.mean(y))


def double_monte_carlo(model, posterior: WeightedPosterior, size: int, rng,
                       shard_size: int = 1_000_000) -> PredictiveSample:
    """Sample the posterior predictive: resample ``theta_i`` then one ``y_i ~ p(y | theta_i)`` each.

    Weighted posteriors are reduced by multinomial resampling.
    """
    if size < 1:
        raise ValueError("predictive sample size must be >= 1")
    w = posterior.weights
    n = posterior.size
    out = []
    for stream, k in shard_streams(rng, size, shard_size):
        gen = as_generator(stream)
        idx = np.zeros(k, dtype=int) if n == 1 else gen.choice(n, size=k, p=w)
        theta = {name: v[idx] for name, v in posterior.points.items()}
        out.append(np.asarray(family_at(model, theta).sample(gen), dtype=float))
    parent = repr(rng) if isinstance(rng, RngStream) else type(rng).__name__
    return PredictiveSample(np.concatenate(out), parent)


def hpe_expectation(spec, posterior: WeightedPosterior, model) -> float:
    """HPE of ``E[h(Y) | theta]``: the posterior mean of ``phi``.

    Averaging ``h`` over a predictive sample gives the same value in
    expectation; this shortcut avoids the inner simulation.
    """
    if isinstance(spec, Quantile):
        raise ValueError("quantile quantities are not expectations; use hpe_quantile")
    if not isinstance(spec, (MeanOf, Exceedance)):
        raise ValueError("hpe_expectation needs an expectation-form quantity (MeanOf or Exceedance)")
    return posterior.mean(qoi_eval(spec, model, posterior.points))


def hpe_quantile(alpha: float, posterior: WeightedPosterior, model, size: int, rng) -> float:
    """HPE of the ``alpha``-quantile: lower empirical quantile of a predictive sample."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly inside (0, 1)")
    return double_monte_carlo(model, posterior, size, rng).quantile(alpha)


def quantile_posterior_exponential(n0: float, s0: float, data, alpha: float) -> dist.InverseGamma:
    """Posterior of the exponential ``alpha``-quantile under an ``IG(n0, s0)`` prior."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly inside (0, 1)")
    x = np.asarray(data, dtype=float).ravel()
    return dist.InverseGamma(n0 + x.size, -math.log1p(-alpha) * (s0 + float(x.sum())))


def hpe_quantile_closed(n0: float, s0: float, data, alpha: float) -> float:
    """Predictive ``alpha``-quantile of the exponential model under an ``IG(n0, s0)`` prior."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly inside (0, 1)")
    x = np.asarray(data, dtype=float).ravel()
    shape = n0 + x.size
    return math.expm1(-math.log1p(-alpha) / shape) * (s0 + float(x.sum()))


@dataclass
class NotBayesDemo:
    """Two exponential set-ups whose quantile posteriors coincide but whose HPEs differ."""

    shape: float
    scale: float
    alphas: tuple
    sums: tuple
    posteriors: tuple
    hpe: tuple
    bayes_quadratic: tuple

    @property
    def posteriors_identical(self) -> bool:
        a, b = self.posteriors
        return math.isclose(a.shape, b.shape, rel_tol=1e-12) and math.isclose(a.scale, b.scale, rel_tol=1e-12)

    @property
    def hpe_differ(self) -> bool:
        return self.hpe[0] != self.hpe[1]


def not_bayes_demo(shape: int, scale: float) -> NotBayesDemo:
    """Median and upper-quartile set-ups sharing the quantile posterior ``IG(shape, scale)``.

    With all information carried by the prior (``n0 = shape``, no data), the
    total sums ``scale / ln 2`` and ``scale / ln 4`` put the 0.5- and
    0.75-quantiles on the same posterior.  Any Bayes estimate, being a
    functional of that posterior, agrees across the two; the HPE does not.
    """
    if shape < 2 or not scale > 0:
        raise ValueError("need shape >= 2 and scale > 0")
    alphas = (0.5, 0.75)
    sums = tuple(scale / -math.log1p(-a) for a in alphas)
    posts = tuple(quantile_posterior_exponential(shape, s, (), a) for s, a in zip(sums, alphas))
    hpe = tuple(hpe_quantile_closed(shape, s, (), a) for s, a in zip(sums, alphas))
    bq = tuple(float(p.expectation()) for p in posts)
    return NotBayesDemo(shape, scale, alphas, sums, posts, hpe, bq)


def check_loss(alpha: float, y, d):
    """Mean of ``|y - d| * (alpha 1{d < y} + (1 - alpha) 1{d > y})`` over ``y``, for each ``d``.

    Uses sorted draws and prefix sums, so a whole grid of ``d`` costs
    ``O((I + G) log I)``.
    """
    ys = np.sort(np.asarray(y, dtype=float))
    d = np.atleast_1d(np.asarray(d, dtype=float))
    csum = np.concatenate([[0.0], np.cumsum(ys)])
    k = np.searchsorted(ys, d, side="left")  # number of draws below d
    below = d * k - csum[k]
    above = (csum[-1] - csum[k]) - d * (ys.size - k)
    return (alpha * above + (1.0 - alpha) * below) / ys.size


@dataclass
class PredictorCheck:
    alpha: float
    hpe: float
    argmin: float
    tolerance: float
    agree: bool
    grid: np.ndarray = field(repr=False)


def hpe_as_predictor_check(alpha: float, posterior: WeightedPosterior, model, size: int, rng,
                           grid_size: int = 999) -> PredictorCheck:
    """Check that the predictive quantile minimizes the average check loss of ``Y``.

    Candidate decisions are the predictive-sample quantiles at evenly spaced
    levels; agreement means the grid argmin lies within one candidate spacing
    of the HPE.
    """
    ps = double_monte_carlo(model, posterior, size, rng)
    hpe = ps.quantile(alpha)
    levels = np.linspace(0.001, 0.999, grid_size)
    grid = np.array([ps.quantile(a) for a in levels])
    risk = check_loss(alpha, ps.draws, grid)
    j = int(np.argmin(risk))
    lo = grid[max(j - 1, 0)]
    hi = grid[min(j + 1, grid.size - 1)]
    tol = max(grid[j] - lo, hi - grid[j])
    return PredictorCheck(alpha, hpe, float(grid[j]), float(tol), bool(abs(grid[j] - hpe) <= tol), grid)


# --------------------------------------------------------------------------
# Exact values under conjugate posteriors
# --------------------------------------------------------------------------

def _bernoulli_linear(spec):
    # phi(p) = c0 + c1 * p, or None when phi is not affine in p
    if isinstance(spec, MeanOf):
        if spec.h is None:
            return 0.0, 1.0
        h0, h1 = float(spec.h(0.0)), float(spec.h(1.0))
        return h0, h1 - h0
    if isinstance(spec, Exceedance):
        t = spec.threshold
        return (1.0, 0.0) if t < 0 else ((0.0, 1.0) if t < 1 else (0.0, 0.0))
    return None


def conjugate_hpe(spec, model, posterior) -> float | None:
    """Exact HPE under a closed-form posterior, or ``None`` when no formula applies."""
    if model is dist.Exponential and isinstance(posterior, dist.InverseGamma):
        a, b = posterior.shape, posterior.scale
        if isinstance(spec, MeanOf) and spec.h is None:
            return float(posterior.expectation())
        if isinstance(spec, Exceedance):
            return (b / (b + spec.threshold)) ** a
        if isinstance(spec, Quantile):
            return math.expm1(-math.log1p(-spec.alpha) / a) * b
    if model is dist.Bernoulli and isinstance(posterior, dist.Beta):
        lin = _bernoulli_linear(spec)
        if lin is not None:
            c0, c1 = lin
            # 7/8 must come out exact: a/(a+b) is evaluated directly
            return c0 + c1 * posterior.a / (posterior.a + posterior.b) if c1 else c0
    return None


def conjugate_bayes(spec, loss, model, posterior) -> float | None:
    """Exact Bayes estimate under a closed-form posterior, or ``None``.

    Covers quantities that are monotone in the exponential mean (mean,
    quantile, exceedance) and affine in the Bernoulli probability.
    """
    if model is dist.Exponential and isinstance(posterior, dist.InverseGamma):
        a, b = posterior.shape, posterior.scale
        if isinstance(spec, MeanOf) and spec.h is not None:
            return None
        if isinstance(spec, (MeanOf, Quantile)):
            c = 1.0 if isinstance(spec, MeanOf) else -math.log1p(-spec.alpha)
            return c * bayes_estimate_closed(loss, posterior)
        if isinstance(spec, Exceedance):
            t = spec.threshold
            if isinstance(loss, Quadratic):
                return (b / (b + t)) ** a
            if isinstance(loss, WeightedAbsolute):
                return math.exp(-t / posterior.quantile(loss.alpha))
            if isinstance(loss, LogQuadratic):
                return math.exp(-t * a / b)
        return None
    if model is dist.Bernoulli and isinstance(posterior, dist.Beta):
        lin = _bernoulli_linear(spec)
        if lin is None:
            return None
        c0, c1 = lin
        if isinstance(loss, Quadratic):
            return conjugate_hpe(spec, model, posterior)
        if c1 == 0:
            return c0
        if isinstance(loss, WeightedAbsolute):
            alpha = loss.alpha if c1 > 0 else 1.0 - loss.alpha
            return c0 + c1 * float(posterior.quantile(alpha))
        if isinstance(loss, LogQuadratic) and (c0, c1) == (0.0, 1.0):
            return math.exp(posterior.mean_log())
    return None
