"""Parametric families used throughout the package.

Every family is a small frozen dataclass whose parameters may be scalars or
numpy arrays (broadcast together), which is how a whole cloud of posterior
draws is evaluated in one call.  Parameterizations are fixed and worth
remembering:

* ``Exponential(mean)``: density ``exp(-x/mean)/mean`` (mean, not rate).
* ``Weibull(scale, shape)``: survival ``exp(-(x/scale)**shape)``.
* ``Gamma(shape, rate)``.
* ``InverseGamma(shape, scale)``: density proportional to
  ``x**(-shape-1) * exp(-scale/x)``.
* ``TruncatedGamma(shape, rate, lower)``: Gamma restricted to ``x >= lower``.
* ``Beta(a, b)``: ``Beta(0, 0)`` is accepted as an improper prior marker only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np
from scipy import special

from .exceptions import ImproperDistributionError
from .rng import as_generator

QUANTILE_TOL = 1e-10


def _positive(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)) or not np.all(arr > 0):
        raise ValueError(f"{name} must be finite and > 0")


def _in_unit(alpha):
    a = np.asarray(alpha, dtype=float)
    if not np.all((a > 0) & (a < 1)):
        raise ValueError("quantile order must lie strictly inside (0, 1)")
    return a


def _out(x):
    # 0-d arrays back to Python floats
    return float(x) if np.ndim(x) == 0 else x


class DistFamily:
    """Shared behaviour: parameter access, survival, bisection fallback."""

    discrete = False
    proper = True

    @property
    def params(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def _check_proper(self):
        if not self.proper:
            raise ImproperDistributionError("improper distribution has no density")

    # subclasses implement _log_pdf, _cdf, _quantile, _sample, mean, support
    def log_pdf(self, x):
        self._check_proper()
        return _out(self._log_pdf(np.asarray(x, dtype=float)))

    def pdf(self, x):
        return _out(np.exp(self.log_pdf(x)))

    def cdf(self, x):
        self._check_proper()
        return _out(self._cdf(np.asarray(x, dtype=float)))

    def sf(self, x):
        self._check_proper()
        return _out(self._sf(np.asarray(x, dtype=float)))

    def _sf(self, x):
        return 1.0 - self._cdf(x)

    def log_sf(self, x):
        """Log survival; stays finite where ``sf`` underflows for families with a closed form."""
        self._check_proper()
        return _out(self._log_sf(np.asarray(x, dtype=float)))

    def _log_sf(self, x):
        with np.errstate(divide="ignore"):
            return np.log(self._sf(x))

    def quantile(self, alpha):
        self._check_proper()
        a = _in_unit(alpha)
        q = np.asarray(self._quantile(a), dtype=float)
        if not self.discrete and np.ndim(q) == 0 and np.ndim(a) == 0:
            if not np.isfinite(q) or abs(self._cdf(q) - a) > QUANTILE_TOL:
                q = np.asarray(bisect_quantile(self, float(a)))
        return _out(q)

    def sample(self, rng, count: int | None = None):
        """Draw ``count`` i.i.d. values, or one per parameter element if ``count`` is None."""
        self._check_proper()
        if count is not None and count < 0:
            raise ValueError("count must be >= 0")
        return self._sample(as_generator(rng), count)


def bisect_quantile(fam: DistFamily, alpha: float, tol: float = QUANTILE_TOL, max_iter: int = 2000) -> float:
    """Bracketed bisection for ``inf{x : cdf(x) >= alpha}`` on a scalar family.

    Stops once the CDF gap across the bracket is below ``tol`` or the bracket
    cannot be split any further in floating point.
    """
    lo, hi = fam.support
    if not np.isfinite(lo):
        lo, step = -1.0, 1.0
        while fam.cdf(lo) >= alpha:
            lo -= step
            step *= 2.0
    if not np.isfinite(hi):
        hi = max(lo, 0.0) + 1.0
        while fam.cdf(hi) < alpha:
            hi = lo + 2.0 * (hi - lo)
    c_lo, c_hi = fam.cdf(lo), fam.cdf(hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi or c_hi - c_lo < tol:
            break
        c = fam.cdf(mid)
        if c >= alpha:
            hi, c_hi = mid, c
        else:
            lo, c_lo = mid, c
    return hi


@dataclass(frozen=True)
class Exponential(DistFamily):
    """Exponential distribution parameterized by its mean."""

    mean: float

    def __post_init__(self):
        _positive("Exponential mean", self.mean)

    @property
    def support(self):
        return (0.0, math.inf)

    def expectation(self):
        return self.mean

    def _log_pdf(self, x):
        th = np.asarray(self.mean, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(x >= 0, -np.log(th) - x / th, -np.inf)

    def _cdf(self, x):
        return np.where(x > 0, -np.expm1(-np.maximum(x, 0) / self.mean), 0.0)

    def _sf(self, x):
        return np.where(x > 0, np.exp(-np.maximum(x, 0) / self.mean), 1.0)

    def _log_sf(self, x):
        return np.where(x > 0, -np.maximum(x, 0) / self.mean, 0.0)

    def _quantile(self, a):
        return -self.mean * np.log1p(-a)

    def _sample(self, gen, count):
        return gen.exponential(self.mean, size=count)


@dataclass(frozen=True)
class Weibull(DistFamily):
    """Two-parameter Weibull with survival ``exp(-(x/scale)**shape)``."""

    scale: float
    shape: float

    def __post_init__(self):
        _positive("Weibull scale", self.scale)
        _positive("Weibull shape", self.shape)

    @property
    def support(self):
        return (0.0, math.inf)

    def expectation(self):
        return self.scale * special.gamma(1.0 + 1.0 / np.asarray(self.shape, dtype=float))

    def _log_pdf(self, x):
        eta = np.asarray(self.scale, dtype=float)
        beta = np.asarray(self.shape, dtype=float)
        z = np.maximum(x, 0) / eta
        with np.errstate(divide="ignore", invalid="ignore"):
            lp = np.log(beta) - np.log(eta) + special.xlogy(beta - 1.0, z) - z**beta
        return np.where(x >= 0, lp, -np.inf)

    def _cdf(self, x):
        return -np.expm1(-((np.maximum(x, 0) / self.scale) ** self.shape))

    def _sf(self, x):
        return np.exp(-((np.maximum(x, 0) / self.scale) ** self.shape))

    def _log_sf(self, x):
        return -((np.maximum(x, 0) / self.scale) ** self.shape)

    def _quantile(self, a):
        return self.scale * (-np.log1p(-a)) ** (1.0 / np.asarray(self.shape, dtype=float))

    def _sample(self, gen, count):
        eta, beta = np.broadcast_arrays(np.asarray(self.scale, float), np.asarray(self.shape, float))
        if count is None:
            return eta * gen.weibull(beta)
        return self.scale * gen.weibull(self.shape, size=count)


@dataclass(frozen=True)
class Bernoulli(DistFamily):
    """Bernoulli distribution on {0, 1} with success probability ``prob``."""

    prob: float

    discrete = True

    def __post_init__(self):
        p = np.asarray(self.prob, dtype=float)
        if not np.all((p >= 0) & (p <= 1)):
            raise ValueError("Bernoulli prob must lie in [0, 1]")

    @property
    def support(self):
        return (0.0, 1.0)

    def expectation(self):
        return self.prob

    def _log_pdf(self, x):
        p = np.asarray(self.prob, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(x == 1, np.log(p), np.where(x == 0, np.log1p(-p), -np.inf))

    def _cdf(self, x):
        p = np.asarray(self.prob, dtype=float)
        return np.where(x < 0, 0.0, np.where(x < 1, 1.0 - p, 1.0))

    def _sf(self, x):
        p = np.asarray(self.prob, dtype=float)
        return np.where(x < 0, 1.0, np.where(x < 1, p, 0.0))

    def _quantile(self, a):
        return np.where(a <= 1.0 - np.asarray(self.prob, dtype=float), 0.0, 1.0)

    def _sample(self, gen, count):
        p = np.asarray(self.prob, dtype=float)
        size = p.shape if count is None else count
        return (gen.random(size) < p).astype(float)


@dataclass(frozen=True)
class Normal(DistFamily):
    """Normal distribution parameterized by mean and variance."""

    mean: float
    var: float

    def __post_init__(self):
        if not np.all(np.isfinite(np.asarray(self.mean, dtype=float))):
            raise ValueError("Normal mean must be finite")
        _positive("Normal variance", self.var)

    @property
    def support(self):
        return (-math.inf, math.inf)

    def expectation(self):
        return self.mean

    def _log_pdf(self, x):
        v = np.asarray(self.var, dtype=float)
        return -0.5 * (np.log(2 * np.pi * v) + (x - self.mean) ** 2 / v)

    def _cdf(self, x):
        return special.ndtr((x - self.mean) / np.sqrt(self.var))

    def _sf(self, x):
        return special.ndtr((self.mean - x) / np.sqrt(self.var))

    def _quantile(self, a):
        return self.mean + np.sqrt(self.var) * special.ndtri(a)

    def _sample(self, gen, count):
        return gen.normal(self.mean, np.sqrt(self.var), size=count)


@dataclass(frozen=True)
class Gamma(DistFamily):
    """Gamma distribution, shape--rate."""

    shape: float
    rate: float

    def __post_init__(self):
        _positive("Gamma shape", self.shape)
        _positive("Gamma rate", self.rate)

    @property
    def support(self):
        return (0.0, math.inf)

    def expectation(self):
        return np.asarray(self.shape, float) / self.rate

    def mean_log(self):
        """``E[log X]``."""
        return _out(special.digamma(self.shape) - np.log(self.rate))

    def _log_pdf(self, x):
        a = np.asarray(self.shape, dtype=float)
        r = np.asarray(self.rate, dtype=float)
        xp = np.maximum(x, 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            lp = a * np.log(r) - special.gammaln(a) + special.xlogy(a - 1.0, xp) - r * xp
        return np.where(x >= 0, lp, -np.inf)

    def _cdf(self, x):
        return special.gammainc(self.shape, self.rate * np.maximum(x, 0))

    def _sf(self, x):
        return special.gammaincc(self.shape, self.rate * np.maximum(x, 0))

    def _quantile(self, a):
        return special.gammaincinv(self.shape, a) / self.rate

    def _sample(self, gen, count):
        return gen.gamma(self.shape, 1.0 / np.asarray(self.rate, float), size=count)


@dataclass(frozen=True)
class InverseGamma(DistFamily):
    """Inverse-Gamma, shape--scale: density proportional to ``x**(-shape-1) exp(-scale/x)``."""

    shape: float
    scale: float

    def __post_init__(self):
        _positive("InverseGamma shape", self.shape)
        _positive("InverseGamma scale", self.scale)

    @property
    def support(self):
        return (0.0, math.inf)

    def expectation(self):
        a = np.asarray(self.shape, float)
        with np.errstate(divide="ignore"):
            return _out(np.where(a > 1, self.scale / (a - 1.0), np.inf))

    def variance(self):
        a = np.asarray(self.shape, float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return _out(np.where(a > 2, np.asarray(self.scale, float) ** 2 / ((a - 1.0) ** 2 * (a - 2.0)), np.inf))

    def mean_log(self):
        """``E[log X]``."""
        return _out(np.log(self.scale) - special.digamma(self.shape))

    def _log_pdf(self, x):
        a = np.asarray(self.shape, dtype=float)
        b = np.asarray(self.scale, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            xp = np.where(x > 0, x, 1.0)
            lp = a * np.log(b) - special.gammaln(a) - (a + 1.0) * np.log(xp) - b / xp
        return np.where(x > 0, lp, -np.inf)

    def _cdf(self, x):
        with np.errstate(divide="ignore"):
            return np.where(x > 0, special.gammaincc(self.shape, self.scale / np.where(x > 0, x, 1.0)), 0.0)

    def _sf(self, x):
        with np.errstate(divide="ignore"):
            return np.where(x > 0, special.gammainc(self.shape, self.scale / np.where(x > 0, x, 1.0)), 1.0)

    def _quantile(self, a):
        return self.scale / special.gammainccinv(self.shape, a)

    def _sample(self, gen, count):
        return self.scale / gen.gamma(self.shape, 1.0, size=count)


@dataclass(frozen=True)
class TruncatedGamma(DistFamily):
    """Gamma(shape, rate) conditioned on ``x >= lower``."""

    shape: float
    rate: float
    lower: float = 0.0

    # rejection from the untruncated Gamma when at least this much mass survives
    REJECTION_MIN_ACCEPT = 0.1

    def __post_init__(self):
        _positive("TruncatedGamma shape", self.shape)
        _positive("TruncatedGamma rate", self.rate)
        lo = np.asarray(self.lower, dtype=float)
        if not np.all(np.isfinite(lo)) or not np.all(lo >= 0):
            raise ValueError("TruncatedGamma lower bound must be finite and >= 0")

    @property
    def support(self):
        return (float(self.lower), math.inf)

    def _tail_mass(self):
        return special.gammaincc(self.shape, self.rate * np.asarray(self.lower, float))

    def expectation(self):
        rl = self.rate * np.asarray(self.lower, float)
        return _out(np.asarray(self.shape, float) / self.rate * special.gammaincc(self.shape + 1.0, rl)
                    / special.gammaincc(self.shape, rl))

    def _log_pdf(self, x):
        base = Gamma(self.shape, self.rate)._log_pdf(x)
        return np.where(x >= self.lower, base - np.log(self._tail_mass()), -np.inf)

    def _cdf(self, x):
        return np.where(x > self.lower, 1.0 - self._sf(x), 0.0)

    def _sf(self, x):
        s = special.gammaincc(self.shape, self.rate * np.maximum(x, self.lower))
        return np.where(x > self.lower, s / self._tail_mass(), 1.0)

    def _quantile(self, a):
        return special.gammainccinv(self.shape, (1.0 - a) * self._tail_mass()) / self.rate

    def _sample(self, gen, count):
        if np.ndim(self.shape) or np.ndim(self.rate) or np.ndim(self.lower):
            raise ValueError("TruncatedGamma sampling needs scalar parameters")
        n = 1 if count is None else int(count)
        accept = float(self._tail_mass())
        if accept >= self.REJECTION_MIN_ACCEPT:
            out = np.empty(n)
            filled = 0
            while filled < n:
                batch = int((n - filled) / accept * 1.1) + 16
                x = gen.gamma(self.shape, 1.0 / self.rate, size=batch)
                x = x[x >= self.lower][: n - filled]
                out[filled:filled + x.size] = x
                filled += x.size
        else:
            u = gen.random(n)
            out = special.gammainccinv(self.shape, (1.0 - u) * accept) / self.rate
            out = np.maximum(out, self.lower)
        return float(out[0]) if count is None else out


@dataclass(frozen=True)
class Beta(DistFamily):
    """Beta(a, b); ``a == 0`` or ``b == 0`` marks an improper prior."""

    a: float
    b: float

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and np.all(a >= 0) and np.all(b >= 0)):
            raise ValueError("Beta parameters must be finite and >= 0")

    @property
    def proper(self):
        return bool(np.all(np.asarray(self.a) > 0) and np.all(np.asarray(self.b) > 0))

    @property
    def support(self):
        return (0.0, 1.0)

    def expectation(self):
        return _out(np.asarray(self.a, float) / (np.asarray(self.a, float) + self.b))

    def mean_log(self):
        """``E[log X]``."""
        return _out(special.digamma(self.a) - special.digamma(np.asarray(self.a, float) + self.b))

    def _log_pdf(self, x):
        xc = np.clip(x, 0.0, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            lp = special.xlogy(self.a - 1.0, xc) + special.xlog1py(self.b - 1.0, -xc) - special.betaln(self.a, self.b)
        return np.where((x >= 0) & (x <= 1), lp, -np.inf)

    def _cdf(self, x):
        return special.betainc(self.a, self.b, np.clip(x, 0.0, 1.0))

    def _quantile(self, a):
        return special.betaincinv(self.a, self.b, a)

    def _sample(self, gen, count):
        return gen.beta(self.a, self.b, size=count)


def log_pdf(fam: DistFamily, x):
    """Natural log of the density (or mass) of ``fam`` at ``x``; ``-inf`` off-support."""
    return fam.log_pdf(x)


def cdf(fam: DistFamily, x):
    return fam.cdf(x)


def quantile(fam: DistFamily, alpha):
    """Lower quantile ``inf{x : cdf(x) >= alpha}``."""
    return fam.quantile(alpha)


def sample(fam: DistFamily, rng, count: int):
    return fam.sample(rng, count)
