"""Observation models, the dyke hydraulic transform and quantities of interest.

A *model* is one of the family classes from :mod:`decisionuq.distributions`
(``Exponential``, ``Weibull``, ``Bernoulli``, ``Normal``).  A parameter point
is a plain mapping from that family's field names to values, e.g.
``{"scale": 1000.0, "shape": 2.0}`` for ``Weibull``.  Values may be arrays,
in which case every function below evaluates the whole cloud at once.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
from scipy import integrate

from . import distributions as dist
from .exceptions import NumericalError

log = logging.getLogger(__name__)

MODELS = {
    "exponential": dist.Exponential,
    "weibull": dist.Weibull,
    "bernoulli": dist.Bernoulli,
    "normal": dist.Normal,
}

ParamPoint = Mapping[str, "float | np.ndarray"]


def model_by_name(name: str):
    try:
        return MODELS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; expected one of {sorted(MODELS)}") from None


def param_names(model) -> tuple[str, ...]:
    return tuple(model.__dataclass_fields__)


def family_at(model, theta: ParamPoint) -> dist.DistFamily:
    """Instantiate ``model`` at parameter point ``theta``."""
    return model(**{k: theta[k] for k in param_names(model)})


def log_likelihood(model, theta: ParamPoint, data) -> "float | np.ndarray":
    """Sum of log densities of ``data`` under ``model`` at ``theta``.

    Vectorized over array-valued ``theta``: the data loop is explicit so the
    memory footprint stays ``O(len(theta))`` for large posterior clouds.
    """
    x = np.asarray(data, dtype=float).ravel()
    fam = family_at(model, theta)
    if x.size == 0:
        log.debug("log_likelihood called on an empty sample; returning 0")
        shape = np.broadcast(*[np.asarray(v) for v in fam.params.values()]).shape
        return 0.0 if shape == () else np.zeros(shape)
    if all(np.ndim(v) == 0 for v in fam.params.values()):
        return float(np.sum(fam._log_pdf(x)))
    total = 0.0
    for xi in x:
        total = total + fam._log_pdf(np.float64(xi))
    return float(total) if np.ndim(total) == 0 else total


# --------------------------------------------------------------------------
# Quantities of interest
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MeanOf:
    """``E[h(Y) | theta]``; ``h=None`` means the identity."""

    h: Callable[[float], float] | None = None
    name: str = "mean"
    probability: bool = False

    def describe(self) -> str:
        return self.name


@dataclass(frozen=True)
class Exceedance:
    """``P[Y > threshold | theta]``."""

    threshold: float
    probability = True

    def describe(self) -> str:
        return f"exceedance(t={self.threshold!r})"


@dataclass(frozen=True)
class Quantile:
    """Lower quantile of order ``alpha`` of ``Y | theta``."""

    alpha: float
    probability = False

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("quantile order must lie strictly inside (0, 1)")

    def describe(self) -> str:
        return f"quantile(alpha={self.alpha!r})"


@dataclass(frozen=True)
class NegLog10Of:
    """``-log10`` of a probability-valued quantity (its order of magnitude)."""

    inner: "MeanOf | Exceedance"
    probability = False

    def __post_init__(self):
        if not getattr(self.inner, "probability", False):
            raise ValueError("NegLog10Of only wraps probability-valued quantities")

    def describe(self) -> str:
        return f"neglog10({self.inner.describe()})"


QuantitySpec = "MeanOf | Exceedance | Quantile | NegLog10Of"


def _quad_mean(fam: dist.DistFamily, h) -> float:
    lo, hi = fam.support
    try:
        with np.errstate(over="raise", invalid="raise"):
            val, err = integrate.quad(lambda y: h(y) * fam.pdf(y), lo, hi,
                                      epsabs=0.0, epsrel=1e-8, limit=200, full_output=1)[:2]
    except (OverflowError, FloatingPointError) as exc:
        raise NumericalError(f"quadrature for E[h(Y)] overflowed: {exc}") from None
    if not np.isfinite(val) or err > 1e-6 * max(1.0, abs(val)):
        raise NumericalError(f"quadrature for E[h(Y)] did not converge (estimate {val}, error {err})")
    return val


def qoi_eval(spec, model, theta: ParamPoint):
    """Exact value of the quantity of interest ``phi(theta)``."""
    fam = family_at(model, theta)
    if isinstance(spec, NegLog10Of):
        return -log_qoi_eval(spec.inner, model, theta) / math.log(10.0)
    if isinstance(spec, Exceedance):
        return fam.sf(spec.threshold)
    if isinstance(spec, Quantile):
        return fam.quantile(spec.alpha)
    if isinstance(spec, MeanOf):
        if spec.h is None:
            return fam.expectation()
        if isinstance(fam, dist.Bernoulli):
            p = np.asarray(fam.prob, dtype=float)
            out = spec.h(1.0) * p + spec.h(0.0) * (1.0 - p)
            return float(out) if np.ndim(out) == 0 else out
        params = np.broadcast_arrays(*[np.asarray(v, dtype=float) for v in fam.params.values()])
        if params[0].ndim == 0:
            return _quad_mean(fam, spec.h)
        flat = [p.ravel() for p in params]
        out = np.array([_quad_mean(type(fam)(*(f[i] for f in flat)), spec.h) for i in range(flat[0].size)])
        return out.reshape(params[0].shape)
    raise TypeError(f"unsupported quantity spec {spec!r}")


def log_qoi_eval(spec, model, theta: ParamPoint):
    """Natural log of ``phi(theta)``, evaluated in the log domain for exceedances.

    Tail probabilities of draws far in the posterior tail underflow to zero;
    their logarithm is still finite and is what log-scale losses need.
    """
    if isinstance(spec, Exceedance):
        return family_at(model, theta).log_sf(spec.threshold)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(qoi_eval(spec, model, theta))


# --------------------------------------------------------------------------
# Dyke hydraulics
# --------------------------------------------------------------------------

def calibrate_rating_constant(riverbed: float, height: float, scale: float, shape: float, prob: float) -> float:
    """Rating constant ``A`` giving flood probability ``prob`` under ``Weibull(scale, shape)``."""
    q_crit = scale * math.log(1.0 / prob) ** (1.0 / shape)
    return (height - riverbed) / q_crit**0.6


@dataclass(frozen=True)
class DykeGeometry:
    """River section with water level ``riverbed + rating * Q**(3/5)`` and a dyke of crest ``height``.

    The defaults reproduce a flood probability of 0.013 for a dyke at 53.1 m
    when annual maximal discharges follow ``Weibull(1000, 2)``.
    """

    riverbed: float = 50.0
    rating: float = calibrate_rating_constant(50.0, 53.1, 1000.0, 2.0, 0.013)
    height: float = 53.1

    def __post_init__(self):
        if not self.rating > 0:
            raise ValueError("rating constant A must be > 0")
        if not self.height > self.riverbed:
            raise ValueError("dyke height must exceed the riverbed level")

    @property
    def critical_discharge(self) -> float:
        """Discharge at which the water level reaches the dyke crest."""
        return ((self.height - self.riverbed) / self.rating) ** (5.0 / 3.0)

    def exceedance(self) -> Exceedance:
        """Flood probability expressed as a discharge exceedance."""
        return Exceedance(self.critical_discharge)


def dyke_output(geom: DykeGeometry, q):
    """Maximal water level for discharge ``q`` (m^3/s)."""
    q = np.asarray(q, dtype=float)
    if np.any(q < 0):
        raise ValueError("discharge must be >= 0")
    z = geom.riverbed + geom.rating * q**0.6
    return float(z) if z.ndim == 0 else z


def flood_probability(geom: DykeGeometry, scale, shape):
    """``P[water level > dyke height]`` under ``Weibull(scale, shape)`` discharges."""
    scale = np.asarray(scale, dtype=float)
    shape = np.asarray(shape, dtype=float)
    if np.any(scale <= 0) or np.any(shape <= 0):
        raise ValueError("Weibull parameters must be > 0")
    p = np.exp(-((geom.critical_discharge / scale) ** shape))
    return float(p) if p.ndim == 0 else p
