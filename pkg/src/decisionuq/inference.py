"""Point estimation and posterior construction.

Posteriors are represented uniformly as a :class:`WeightedPosterior`, a cloud
of parameter draws with self-normalized log-weights, whatever produced them
(closed-form conjugate update, importance sampling, random-walk Metropolis).
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy import special

from . import distributions as dist
from .exceptions import ConfigError, NumericalError
from .model import Exceedance, MeanOf, NegLog10Of, ParamPoint, Quantile, log_likelihood, param_names, qoi_eval
from .rng import as_generator, shard_streams

log = logging.getLogger(__name__)

ESS_WARN_FRACTION = 0.01


class LowESSWarning(UserWarning):
    """Effective sample size fell below the warning fraction of the draw count."""


# --------------------------------------------------------------------------
# Weighted posterior
# --------------------------------------------------------------------------

def effective_sample_size(log_weights) -> float:
    """``(sum w)**2 / sum w**2`` computed stably from log-weights."""
    lw = np.asarray(log_weights, dtype=float)
    lw = lw - np.max(lw)
    w = np.exp(lw)
    return float(w.sum() ** 2 / np.sum(w * w))


@dataclass
class WeightedPosterior:
    """Weighted parameter draws approximating a posterior.

    Attributes
    ----------
    points : dict of str -> ndarray
        One array per model coordinate, all of length ``N``.
    log_weights : ndarray
        Unnormalized log-weights; ``weights`` gives the normalized version.
    ess : float
        Effective sample size (importance ``ess``, or autocorrelation based
        for Metropolis chains).
    source : str
        One of ``conjugate-exact``, ``importance``, ``metropolis``, ``prior-only``.
    diagnostics : dict
        Free-form run diagnostics (acceptance rate, warnings, ...).
    """

    points: dict
    log_weights: np.ndarray
    ess: float | None = None
    source: str = "importance"
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = {k: np.atleast_1d(np.asarray(v, dtype=float)) for k, v in self.points.items()}
        self.log_weights = np.atleast_1d(np.asarray(self.log_weights, dtype=float))
        sizes = {v.size for v in self.points.values()} | {self.log_weights.size}
        if len(sizes) != 1 or self.log_weights.size < 1:
            raise ValueError("posterior points and weights must be non-empty and of equal length")
        if not np.any(np.isfinite(self.log_weights)):
            raise NumericalError("all posterior weights are zero")
        if self.ess is None:
            self.ess = effective_sample_size(self.log_weights)

    @property
    def size(self) -> int:
        return self.log_weights.size

    @property
    def weights(self) -> np.ndarray:
        lw = self.log_weights - np.max(self.log_weights)
        w = np.exp(lw)
        return w / w.sum()

    def mean(self, values) -> float:
        """Weighted mean of per-draw ``values``."""
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))

    def point(self, i: int) -> dict:
        return {k: float(v[i]) for k, v in self.points.items()}

    @classmethod
    def single(cls, theta: ParamPoint) -> "WeightedPosterior":
        """Degenerate posterior concentrated on one parameter point."""
        return cls({k: [v] for k, v in theta.items()}, [0.0], source="conjugate-exact")


# --------------------------------------------------------------------------
# Maximum likelihood
# --------------------------------------------------------------------------

def _weibull_profile(beta, logx):
    # residual and derivative of 1/beta + mean(ln x) - sum(x^b ln x)/sum(x^b)
    w = np.exp(beta * (logx - logx.max()))
    sw = w.sum()
    m1 = np.dot(w, logx) / sw
    m2 = np.dot(w, logx * logx) / sw
    g = 1.0 / beta + logx.mean() - m1
    dg = -1.0 / beta**2 - (m2 - m1 * m1)
    return g, dg


def weibull_shape_mle(x, start=1.0, max_iter=100, tol=1e-10, bracket=(0.01, 100.0)) -> float:
    """Root of the Weibull profile-likelihood shape equation.

    Newton--Raphson from ``start``; falls back to bisection on ``bracket``
    whenever an iterate leaves ``(0, inf)`` or the iteration budget runs out.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.size < 2 or not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise ValueError("Weibull shape MLE needs at least two finite positive observations")
    logx = np.log(x)
    if np.ptp(logx) == 0:
        raise NumericalError("shape MLE diverges: all observations are equal")
    beta = start
    for _ in range(max_iter):
        g, dg = _weibull_profile(beta, logx)
        step = g / dg
        new = beta - step
        if not np.isfinite(new) or new <= 0:
            break
        beta = new
        if abs(step) < tol:
            return float(beta)
    lo, hi = bracket
    glo, ghi = _weibull_profile(lo, logx)[0], _weibull_profile(hi, logx)[0]
    if glo * ghi > 0:
        raise NumericalError(f"shape MLE diverges: no sign change of the profile equation on {bracket}")
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        gm = _weibull_profile(mid, logx)[0]
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
        if hi - lo < tol:
            break
    return float(0.5 * (lo + hi))


def mle_fit(model, data) -> dict:
    """Maximum-likelihood parameter point for ``model`` given ``data``."""
    x = np.asarray(data, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("cannot fit an MLE on an empty sample")
    if model is dist.Exponential:
        if np.any(x < 0) or not np.any(x > 0):
            raise ValueError("exponential MLE needs nonnegative data with a positive sum")
        return {"mean": float(x.mean())}
    if model is dist.Bernoulli:
        if not np.all((x == 0) | (x == 1)):
            raise ValueError("Bernoulli data must be 0/1")
        return {"prob": float(x.mean())}
    if model is dist.Normal:
        var = float(x.var())
        if var == 0:
            raise NumericalError("variance MLE is zero: all observations are equal")
        return {"mean": float(x.mean()), "var": var}
    if model is dist.Weibull:
        beta = weibull_shape_mle(x)
        # scale by the max to keep x**beta in range
        xm = x.max()
        eta = xm * np.mean((x / xm) ** beta) ** (1.0 / beta)
        return {"scale": float(eta), "shape": beta}
    raise ValueError(f"no MLE registered for {getattr(model, '__name__', model)}")


def plug_in(spec, model, theta_hat: ParamPoint):
    """Plug-in estimate ``phi(theta_hat)``."""
    return qoi_eval(spec, model, theta_hat)


# --------------------------------------------------------------------------
# Conjugate families
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalInverseGamma:
    """``var ~ IG(a, b)`` and ``mean | var ~ N(mu, var / kappa)``."""

    mu: float
    kappa: float
    a: float
    b: float

    def __post_init__(self):
        for name in ("kappa", "a", "b"):
            if not getattr(self, name) > 0:
                raise ValueError(f"NormalInverseGamma {name} must be > 0")

    def sample(self, rng, count: int) -> dict:
        gen = as_generator(rng)
        var = self.b / gen.gamma(self.a, 1.0, size=count)
        mean = gen.normal(self.mu, np.sqrt(var / self.kappa))
        return {"mean": mean, "var": var}

    def log_pdf(self, points: Mapping) -> np.ndarray:
        var = np.asarray(points["var"], dtype=float)
        mean = np.asarray(points["mean"], dtype=float)
        return (dist.InverseGamma(self.a, self.b)._log_pdf(var)
                + dist.Normal(self.mu, var / self.kappa)._log_pdf(mean))


@dataclass(frozen=True)
class ExpInvGamma:
    """Inverse-Gamma prior ``IG(n0, s0)`` on the exponential mean."""

    n0: float
    s0: float
    model = dist.Exponential

    def __post_init__(self):
        if not (self.n0 > 0 and self.s0 > 0):
            raise ValueError("ExpInvGamma needs n0 > 0 and s0 > 0")

    @property
    def prior(self):
        return dist.InverseGamma(self.n0, self.s0)


@dataclass(frozen=True)
class BernoulliBeta:
    """Beta prior on the Bernoulli probability; ``(0, 0)`` is the improper Haldane prior."""

    a: float = 0.0
    b: float = 0.0
    model = dist.Bernoulli

    @property
    def prior(self):
        return dist.Beta(self.a, self.b)


@dataclass(frozen=True)
class NormalNIG:
    """Normal--inverse-Gamma prior on ``(mean, var)`` of a normal model."""

    mu0: float
    kappa0: float
    a0: float
    b0: float
    model = dist.Normal

    @property
    def prior(self):
        return NormalInverseGamma(self.mu0, self.kappa0, self.a0, self.b0)


def conjugate_posterior(spec, data):
    """Closed-form posterior for a conjugate prior ``spec``.

    Returns an ``InverseGamma`` (exponential mean), ``Beta`` (Bernoulli
    probability) or :class:`NormalInverseGamma` (normal mean and variance).
    """
    x = np.asarray(data, dtype=float).ravel()
    n = x.size
    if isinstance(spec, ExpInvGamma):
        if np.any(x < 0):
            raise ValueError("exponential data must be >= 0")
        return dist.InverseGamma(spec.n0 + n, spec.s0 + float(x.sum()))
    if isinstance(spec, BernoulliBeta):
        if not np.all((x == 0) | (x == 1)):
            raise ValueError("Bernoulli data must be 0/1")
        succ = int(x.sum())
        fail = n - succ
        a, b = spec.a + succ, spec.b + fail
        if a <= 0:
            raise ConfigError(f"improper posterior: Beta({spec.a}, {spec.b}) prior needs at least one success, got successes={succ}")
        if b <= 0:
            raise ConfigError(f"improper posterior: Beta({spec.a}, {spec.b}) prior needs at least one failure, got failures={fail}")
        return dist.Beta(a, b)
    if isinstance(spec, NormalNIG):
        if n == 0:
            return spec.prior
        xbar = float(x.mean())
        kn = spec.kappa0 + n
        mun = (spec.kappa0 * spec.mu0 + n * xbar) / kn
        an = spec.a0 + 0.5 * n
        bn = spec.b0 + 0.5 * float(np.sum((x - xbar) ** 2)) + spec.kappa0 * n * (xbar - spec.mu0) ** 2 / (2.0 * kn)
        return NormalInverseGamma(mun, kn, an, bn)
    raise TypeError(f"unsupported conjugate spec {spec!r}")


def conjugate_weighted_posterior(spec, data, count: int, rng=None) -> WeightedPosterior:
    """Exact conjugate posterior as an equally weighted cloud of ``count`` draws.

    With ``rng=None`` a univariate posterior is represented by its quantiles at
    the midpoints ``(i - 1/2) / count`` (deterministic, no sampling noise);
    otherwise i.i.d. draws are taken.
    """
    post = conjugate_posterior(spec, data)
    name = param_names(spec.model)
    if isinstance(post, NormalInverseGamma):
        if rng is None:
            raise ValueError("normal--inverse-Gamma posterior needs an rng")
        pts = post.sample(rng, count)
    elif rng is None:
        u = (np.arange(count) + 0.5) / count
        pts = {name[0]: post.quantile(u)}
    else:
        pts = {name[0]: post.sample(rng, count)}
    return WeightedPosterior(pts, np.zeros(count), ess=float(count), source="conjugate-exact",
                             diagnostics={"posterior": repr(post)})


# --------------------------------------------------------------------------
# Hierarchical Weibull prior
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class HierarchicalWeibullPrior:
    """Prior on Weibull ``(scale, shape)`` built around a guessed median flood.

    ``shape ~ Gamma(m, m / beta0)`` truncated to ``shape > beta_lower`` and,
    given the shape, ``scale**(-shape) ~ Gamma(m, b)`` with
    ``b = te**shape / (2**(1/m) - 1)``.  With this ``b`` the prior predictive
    median of the discharge equals ``te`` whatever the shape.

    Parameters
    ----------
    m : float
        Virtual sample size (confidence put in the prior guesses).
    beta0 : float
        Prior guess of the shape.
    te : float
        Prior guess of the median annual maximal discharge.
    beta_lower : float
        Lower bound on the shape.
    """

    m: float = 1.0
    beta0: float = 1.5
    te: float = float(dist.Weibull(800.0, 1.5).quantile(0.5))
    beta_lower: float = 1.0

    def __post_init__(self):
        for name in ("m", "beta0", "te"):
            if not (np.isfinite(getattr(self, name)) and getattr(self, name) > 0):
                raise ValueError(f"{name} must be finite and > 0")
        if not self.beta_lower >= 0:
            raise ValueError("beta_lower must be >= 0")

    @classmethod
    def from_prior_scale(cls, m=1.0, beta0=1.5, eta0=800.0, beta_lower=1.0):
        """Take ``te`` as the median of ``Weibull(eta0, beta0)``."""
        return cls(m, beta0, float(dist.Weibull(eta0, beta0).quantile(0.5)), beta_lower)

    @property
    def shape_prior(self):
        return dist.TruncatedGamma(self.m, self.m / self.beta0, self.beta_lower)

    def log_b(self, shape):
        return np.asarray(shape, float) * math.log(self.te) - math.log(2.0 ** (1.0 / self.m) - 1.0)

    def sample(self, rng, count: int) -> dict:
        gen = as_generator(rng)
        shape = self.shape_prior.sample(gen, count)
        g = gen.gamma(self.m, 1.0, size=count)
        log_mu = np.log(g) - self.log_b(shape)
        return {"scale": np.exp(-log_mu / shape), "shape": shape}

    def log_pdf(self, points: Mapping) -> np.ndarray:
        eta = np.asarray(points["scale"], dtype=float)
        beta = np.asarray(points["shape"], dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_mu = -beta * np.log(eta)
            lb = self.log_b(beta)
            lp_mu = self.m * lb - special.gammaln(self.m) + (self.m - 1.0) * log_mu - np.exp(lb + log_mu)
            # d mu / d eta = -beta * eta**(-beta - 1)
            lp = self.shape_prior._log_pdf(beta) + lp_mu + np.log(beta) - (beta + 1.0) * np.log(eta)
        return np.where((eta > 0) & (beta > self.beta_lower), lp, -np.inf)


# --------------------------------------------------------------------------
# Importance sampling
# --------------------------------------------------------------------------

@dataclass
class LogNormalProposal:
    """Multivariate normal on log-parameters, centred on the MLE and overdispersed.

    An escape hatch when the prior is a poor importance proposal.
    """

    names: tuple
    center: np.ndarray
    cov: np.ndarray

    @classmethod
    def around_mle(cls, model, data, inflate: float = 2.0, step: float = 1e-4) -> "LogNormalProposal":
        theta = mle_fit(model, data)
        names = param_names(model)
        c = np.log([theta[k] for k in names])

        def f(z):
            return log_likelihood(model, dict(zip(names, np.exp(z))), data)

        k = len(names)
        hess = np.empty((k, k))
        for i in range(k):
            for j in range(k):
                ei = np.eye(k)[i] * step
                ej = np.eye(k)[j] * step
                hess[i, j] = (f(c + ei + ej) - f(c + ei - ej) - f(c - ei + ej) + f(c - ei - ej)) / (4 * step * step)
        cov = np.linalg.inv(-hess) * inflate**2
        return cls(names, c, cov)

    def sample(self, rng, count: int) -> dict:
        z = as_generator(rng).multivariate_normal(self.center, self.cov, size=count)
        return {k: np.exp(z[:, i]) for i, k in enumerate(self.names)}

    def log_pdf(self, points: Mapping) -> np.ndarray:
        z = np.column_stack([np.log(np.asarray(points[k], dtype=float)) for k in self.names])
        d = z - self.center
        prec = np.linalg.inv(self.cov)
        k = len(self.names)
        _, logdet = np.linalg.slogdet(self.cov)
        quad = np.einsum("ni,ij,nj->n", d, prec, d)
        return -0.5 * (quad + logdet + k * math.log(2 * math.pi)) - z.sum(axis=1)


def sample_posterior_is(model, prior_sampler: Callable, prior_log_pdf: Callable | None, data, count: int, rng,
                        proposal=None, shard_size: int = 100_000) -> WeightedPosterior:
    """Importance-sampling posterior.

    Parameters
    ----------
    model
        Observation family class.
    prior_sampler : callable ``(rng, count) -> dict``
        Draws from the prior; used as the proposal unless ``proposal`` is given.
    prior_log_pdf : callable ``dict -> ndarray``
        Prior log-density; only needed with a custom ``proposal``.
    data : array_like
        Observations.
    count : int
        Number of draws (>= 100).
    rng : RngStream or Generator
        With an :class:`RngStream`, draws are made in shards of ``shard_size``
        on child streams and concatenated in shard order.
    proposal : object with ``sample`` and ``log_pdf``, optional
    """
    if count < 100:
        raise ValueError("importance sampling needs at least 100 draws")
    x = np.asarray(data, dtype=float).ravel()
    parts, lws = [], []
    for stream, k in shard_streams(rng, count, shard_size):
        if proposal is None:
            pts = prior_sampler(stream, k)
            lw = np.zeros(k)
        else:
            if prior_log_pdf is None:
                raise ValueError("a custom proposal needs prior_log_pdf")
            pts = proposal.sample(stream, k)
            with np.errstate(invalid="ignore"):
                lw = prior_log_pdf(pts) - proposal.log_pdf(pts)
        if x.size:
            lw = lw + log_likelihood(model, pts, x)
        parts.append(pts)
        lws.append(lw)
    points = {name: np.concatenate([p[name] for p in parts]) for name in parts[0]}
    lw = np.concatenate(lws)
    lw = np.where(np.isnan(lw), -np.inf, lw)
    if not np.any(np.isfinite(lw)):
        raise NumericalError("prior-data conflict: zero-likelihood proposal")
    source = "prior-only" if x.size == 0 and proposal is None else "importance"
    post = WeightedPosterior(points, lw, source=source)
    post.diagnostics["proposal"] = "prior" if proposal is None else type(proposal).__name__
    if post.ess < ESS_WARN_FRACTION * count:
        msg = f"low effective sample size: {post.ess:.1f} of {count} draws"
        post.diagnostics["warning"] = msg
        warnings.warn(msg, LowESSWarning, stacklevel=2)
    return post


# --------------------------------------------------------------------------
# Random-walk Metropolis
# --------------------------------------------------------------------------

def _transforms(model):
    # unconstrained coordinates for the random walk
    if model is dist.Bernoulli:
        return {"prob": "logit"}
    if model is dist.Normal:
        return {"mean": "identity", "var": "log"}
    return {k: "log" for k in param_names(model)}


def _to_free(kind, v):
    return {"log": math.log, "logit": lambda p: math.log(p / (1 - p)), "identity": float}[kind](v)


def _from_free(kind, z):
    if kind == "log":
        return math.exp(z)
    if kind == "logit":
        return 1.0 / (1.0 + math.exp(-z))
    return z


def _log_jacobian(kind, v):
    if kind == "log":
        return math.log(v)
    if kind == "logit":
        return math.log(v) + math.log1p(-v)
    return 0.0


def autocorr_ess(chain) -> float:
    """Effective sample size of a scalar chain (Geyer initial positive sequence)."""
    x = np.asarray(chain, dtype=float)
    n = x.size
    x = x - x.mean()
    var = np.dot(x, x) / n
    if var == 0:
        return 1.0
    f = np.fft.rfft(x, n=2 * n)
    acf = np.fft.irfft(f * np.conj(f))[:n] / (n * var)
    tau = -1.0
    for k in range(0, n - 1, 2):
        pair = acf[k] + acf[k + 1]
        if pair <= 0:
            break
        tau += 2.0 * pair
    return float(min(n, max(1.0, n / max(tau, 1e-12))))


def sample_posterior_mh(model, prior_log_pdf: Callable, data, count: int, burn_in: int, step_scales, rng,
                        init: ParamPoint | None = None) -> WeightedPosterior:
    """Random-walk Metropolis posterior on unconstrained coordinates.

    Positive coordinates move on the log scale, probabilities on the logit
    scale.  ``count`` is the total chain length; the first ``burn_in`` states
    are dropped.  Returns uniform weights with an autocorrelation-based ess
    (minimum over coordinates) and the acceptance rate in ``diagnostics``.
    """
    if not 0 <= burn_in < count:
        raise ValueError("burn_in must satisfy 0 <= burn_in < count")
    names = param_names(model)
    kinds = _transforms(model)
    scales = np.broadcast_to(np.asarray(step_scales, dtype=float), (len(names),))
    if np.any(scales <= 0):
        raise ValueError("step scales must be > 0")
    x = np.asarray(data, dtype=float).ravel()
    if init is None:
        try:
            init = mle_fit(model, x)
        except (ValueError, NumericalError):
            init = {k: (0.5 if kinds[k] == "logit" else 1.0) for k in names}
    gen = as_generator(rng)

    def target(theta):
        lp = float(prior_log_pdf(theta))
        if not np.isfinite(lp):
            return -math.inf
        ll = log_likelihood(model, theta, x) if x.size else 0.0
        return lp + ll + sum(_log_jacobian(kinds[k], theta[k]) for k in names)

    z = np.array([_to_free(kinds[k], init[k]) for k in names])
    theta = {k: _from_free(kinds[k], z[i]) for i, k in enumerate(names)}
    cur = target(theta)
    if not np.isfinite(cur):
        raise NumericalError("Metropolis initial point has zero posterior density")
    steps = gen.standard_normal((count, len(names))) * scales
    logu = np.log(gen.random(count))
    kept = np.empty((count - burn_in, len(names)))
    accepted = 0
    for t in range(count):
        zp = z + steps[t]
        try:
            tp = {k: _from_free(kinds[k], zp[i]) for i, k in enumerate(names)}
            new = target(tp)
        except (ValueError, OverflowError):
            new = -math.inf
        if logu[t] < new - cur:
            z, theta, cur = zp, tp, new
            accepted += 1
        if t >= burn_in:
            kept[t - burn_in] = [theta[k] for k in names]
    if accepted == 0:
        raise NumericalError("Metropolis chain accepted no proposals; reduce step_scales")
    ess = min(autocorr_ess(kept[:, i]) for i in range(len(names)))
    rate = accepted / count
    post = WeightedPosterior({k: kept[:, i] for i, k in enumerate(names)}, np.zeros(len(kept)), ess=ess,
                             source="metropolis", diagnostics={"acceptance_rate": rate})
    if ess < ESS_WARN_FRACTION * len(kept):
        msg = f"low effective sample size: {ess:.1f} of {len(kept)} chain states"
        post.diagnostics["warning"] = msg
        warnings.warn(msg, LowESSWarning, stacklevel=2)
    return post


# --------------------------------------------------------------------------
# Asymptotic normal approximations
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalApprox:
    """Normal approximation ``N(center, variance)`` to a law of ``phi``.

    ``kind`` is ``"mle-sampling"`` (law of the plug-in estimator given the
    true parameter) or ``"posterior"`` (large-sample posterior of ``phi``).
    """

    center: float
    variance: float
    kind: str

    def __post_init__(self):
        if not (np.isfinite(self.variance) and self.variance > 0):
            raise NumericalError("normal approximation needs a finite positive variance")

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)

    def cdf(self, x):
        return special.ndtr((np.asarray(x, dtype=float) - self.center) / self.sd)


def _exponential_dphi(spec, theta: float) -> float:
    if isinstance(spec, MeanOf) and spec.h is None:
        return 1.0
    if isinstance(spec, Exceedance):
        t = spec.threshold
        return t / theta**2 * math.exp(-t / theta)
    if isinstance(spec, Quantile):
        return -math.log1p(-spec.alpha)
    if isinstance(spec, NegLog10Of) and isinstance(spec.inner, Exceedance):
        return -spec.inner.threshold / (theta**2 * math.log(10.0))
    h = 1e-6 * theta
    return (qoi_eval(spec, dist.Exponential, {"mean": theta + h})
            - qoi_eval(spec, dist.Exponential, {"mean": theta - h})) / (2 * h)


def fisher_information(model, theta: ParamPoint) -> float:
    """Per-observation Fisher information (exponential mean only)."""
    if model is not dist.Exponential:
        raise ValueError("no Fisher information registered for this model")
    return 1.0 / theta["mean"] ** 2


def asymptotic_approx(kind: str, model, theta_ref: ParamPoint, spec, n: int) -> NormalApprox:
    """Delta-method normal approximation ``N(phi(theta), phi'(theta)**2 / (n I(theta)))``.

    For ``kind="mle-sampling"`` pass the true parameter; for
    ``kind="posterior"`` pass the MLE.
    """
    if kind not in ("mle-sampling", "posterior"):
        raise ValueError("kind must be 'mle-sampling' or 'posterior'")
    if n < 1:
        raise ValueError("n must be >= 1")
    info = fisher_information(model, theta_ref)
    th = float(theta_ref["mean"])
    dphi = _exponential_dphi(spec, th)
    return NormalApprox(float(qoi_eval(spec, model, theta_ref)), dphi**2 / (n * info), kind)
