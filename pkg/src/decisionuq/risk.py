"""Monte-Carlo frequentist risk and Bayes risk of estimators.

Replicate ``r`` always draws from ``rng.child(r)`` and results are reduced in
replicate order, so reports are bit-identical whatever the worker count.
"""
from __future__ import annotations

import hashlib
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import DecisionUQError, NumericalError
from .model import family_at, qoi_eval
from .rng import RngStream

log = logging.getLogger(__name__)

MAX_FAILURE_FRACTION = 0.01


@dataclass
class EstimatorHandle:
    """A named decision rule ``(sample, rng) -> d``."""

    name: str
    procedure: Callable
    settings: str = ""

    @property
    def digest(self) -> str:
        return hashlib.sha256(f"{self.name}|{self.settings}".encode()).hexdigest()[:12]

    def __call__(self, sample, rng) -> float:
        return float(self.procedure(sample, rng))


@dataclass
class RiskReport:
    estimator: str
    risk: float
    mc_std_error: float
    replicates: int
    failures: int
    loss: str
    truth: str
    losses: np.ndarray | None = None

    def as_dict(self) -> dict:
        return {"estimator": self.estimator, "risk": self.risk, "mc_std_error": self.mc_std_error,
                "replicates": self.replicates, "failures": self.failures, "loss": self.loss, "truth": self.truth}


def _describe(obj) -> str:
    return obj.describe() if hasattr(obj, "describe") else repr(obj)


def map_replicates(task, reps: int, workers: int = 1) -> list:
    """``[task(r) for r in range(reps)]``, optionally on a thread pool, in replicate order."""
    if workers <= 1:
        return [task(r) for r in range(reps)]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(task, range(reps)))


def _reduce(name, values, reps, loss, truth) -> RiskReport:
    vals = np.array([v for v in values if v is not None], dtype=float)
    failures = reps - vals.size
    if failures > MAX_FAILURE_FRACTION * reps:
        raise NumericalError(f"estimator {name!r} failed on {failures} of {reps} replicates")
    if failures:
        log.warning("estimator %s failed on %d of %d replicates (excluded)", name, failures, reps)
    if vals.size < 2:
        raise NumericalError("risk needs at least two successful replicates")
    se = float(vals.std(ddof=1) / math.sqrt(vals.size))
    return RiskReport(name, float(vals.mean()), se, int(vals.size), int(failures), _describe(loss), truth, vals)


def _safe(est, sample, stream):
    try:
        d = est(sample, stream)
    except (DecisionUQError, ValueError, ArithmeticError) as exc:
        log.debug("replicate failed: %s", exc)
        return None
    return d if np.isfinite(d) else None


def frequentist_risk(est: EstimatorHandle, model, theta_true, spec, loss, n: int, reps: int, rng: RngStream,
                     workers: int = 1) -> RiskReport:
    """Average loss of ``est`` over ``reps`` datasets of size ``n`` drawn at ``theta_true``."""
    if reps < 2 or n < 1:
        raise ValueError("need reps >= 2 and n >= 1")
    phi = float(qoi_eval(spec, model, theta_true))
    fam = family_at(model, theta_true)

    def task(r):
        stream = rng.child(r)
        sample = fam.sample(stream, n)
        d = _safe(est, sample, stream.child(0))
        return None if d is None else float(loss(phi, d))

    truth = ",".join(f"{k}={v!r}" for k, v in theta_true.items())
    return _reduce(est.name, map_replicates(task, reps, workers), reps, loss, truth)


def bayes_risk(est: EstimatorHandle, model, prior_sampler: Callable, spec, loss, n: int, reps: int, rng: RngStream,
               workers: int = 1, prior_name: str = "prior") -> RiskReport:
    """Average loss of ``est`` when ``theta`` is drawn from the prior for each replicate.

    ``prior_sampler(rng, count)`` returns a parameter dict of arrays.
    """
    if reps < 2 or n < 1:
        raise ValueError("need reps >= 2 and n >= 1")

    def task(r):
        stream = rng.child(r)
        theta = {k: float(v[0]) for k, v in prior_sampler(stream.generator, 1).items()}
        sample = family_at(model, theta).sample(stream, n)
        d = _safe(est, sample, stream.child(0))
        return None if d is None else float(loss(float(qoi_eval(spec, model, theta)), d))

    return _reduce(est.name, map_replicates(task, reps, workers), reps, loss, prior_name)


def combined_std_error(a: RiskReport, b: RiskReport) -> float:
    """``sqrt(se_a**2 + se_b**2)`` for comparing two risk estimates."""
    return math.hypot(a.mc_std_error, b.mc_std_error)
