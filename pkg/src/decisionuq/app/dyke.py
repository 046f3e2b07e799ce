"""Dyke flood-probability case study.

Annual maximal discharges follow ``Weibull(1000, 2)``; the dyke at 53.1 m is
overtopped with probability 0.013.  Each replicate draws 30 years of
discharges, fits the hierarchical Weibull posterior by importance sampling and
reports four estimates of the flood probability ``p``:

``p_mle``
    plug-in maximum likelihood.
``p_hpe``
    predictive exceedance, i.e. the posterior mean of ``p``.
``p_bay1``
    log-quadratic Bayes estimate, ``exp(E[log p])``.
``p_bay2``
    weighted-absolute Bayes estimate on ``-log10 p`` with ``C1=1, C2=9``:
    underestimating the order of magnitude of the risk costs nine times less
    than overestimating ``-log10 p``, so the estimate is the posterior
    0.1-quantile of ``-log10 p`` (a cautious, large ``p``).
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .. import distributions as dist
from ..estimators import weighted_quantile
from ..exceptions import DecisionUQError, NumericalError
from ..inference import HierarchicalWeibullPrior, LowESSWarning, mle_fit, sample_posterior_is
from ..loss import WeightedAbsolute
from ..model import DykeGeometry, dyke_output, flood_probability
from ..risk import MAX_FAILURE_FRACTION, map_replicates
from ..rng import RngStream
from .io import write_csv

log = logging.getLogger(__name__)

TRUE_SCALE = 1000.0
TRUE_SHAPE = 2.0
THRESHOLDS = (1e-3, 1e-2)
CAUTIOUS_LOSS = WeightedAbsolute(c1=1.0, c2=9.0)
ESTIMATES = ("p_mle", "p_hpe", "p_bay1", "p_bay2")


def simulate_dyke_data(scale: float, shape: float, n: int, rng) -> np.ndarray:
    """``n`` annual maximal discharges from ``Weibull(scale, shape)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.asarray(dist.Weibull(scale, shape).sample(rng, n), dtype=float)


def water_level_rows(discharges, geom: DykeGeometry | None = None) -> list[dict]:
    """Plot-ready rows ``(year, discharge, level)`` for a discharge series."""
    geom = DykeGeometry() if geom is None else geom
    levels = np.atleast_1d(dyke_output(geom, discharges))
    return [{"year": i + 1, "discharge": float(q), "level": float(z)}
            for i, (q, z) in enumerate(zip(np.atleast_1d(discharges), levels))]


def risk_class(p: float) -> int:
    """Number of decision thresholds (1e-3, 1e-2) that ``p`` exceeds: 0, 1 or 2."""
    return int(sum(p > t for t in THRESHOLDS))


@dataclass
class DykeEstimates:
    p_mle: float
    p_hpe: float
    p_bay1: float
    p_bay2: float
    p_post_median: float
    ess: float
    scale_mle: float
    shape_mle: float


def dyke_estimates(data, prior: HierarchicalWeibullPrior, geom: DykeGeometry, count: int, rng) -> DykeEstimates:
    """All four flood-probability estimates for one discharge sample."""
    x = np.asarray(data, dtype=float)
    theta = mle_fit(dist.Weibull, x)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LowESSWarning)
        post = sample_posterior_is(dist.Weibull, prior.sample, prior.log_pdf, x, count, rng)
    if post.ess < 50:
        raise NumericalError(f"importance ess {post.ess:.1f} below 50")
    w = post.weights
    qc = geom.critical_discharge
    # log p = -(qc/scale)**shape, kept in the log domain for tiny p
    log_p = -np.exp(post.points["shape"] * (math.log(qc) - np.log(post.points["scale"])))
    nl10 = -log_p / math.log(10.0)
    keep = w > 0
    return DykeEstimates(
        p_mle=float(flood_probability(geom, theta["scale"], theta["shape"])),
        p_hpe=float(np.dot(w, np.exp(log_p))),
        p_bay1=math.exp(float(np.dot(w[keep], log_p[keep]))),
        p_bay2=10.0 ** (-weighted_quantile(nl10, w, CAUTIOUS_LOSS.alpha)),
        p_post_median=math.exp(weighted_quantile(log_p, w, 0.5)),
        ess=post.ess,
        scale_mle=theta["scale"],
        shape_mle=theta["shape"],
    )


@dataclass
class DykeTable:
    """Replicate table; failed replicates are counted and left out of ``rows``."""

    rows: list = field(default_factory=list)
    failures: int = 0
    p_true: float = float("nan")
    columns = ["replicate", "n", "p_true", *ESTIMATES, "p_post_median", "ess", "scale_mle", "shape_mle",
               "class_mle", "class_hpe", "class_bay1", "class_bay2"]

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows], dtype=float)

    def fraction_above(self, name: str, threshold: float = 1e-2) -> float:
        return float(np.mean(self.column(name) > threshold))

    def write(self, path) -> None:
        write_csv(self.rows, path, self.columns)


def run_dyke_replicates(replicates: int, rng: RngStream, n: int = 30, posterior_draws: int = 100_000,
                        prior: HierarchicalWeibullPrior | None = None, geom: DykeGeometry | None = None,
                        scale: float = TRUE_SCALE, shape: float = TRUE_SHAPE, workers: int = 1) -> DykeTable:
    """Simulate ``replicates`` datasets and estimate the flood probability on each.

    Replicate ``r`` takes its data from ``rng.child(r).child(0)`` and its
    posterior draws from ``rng.child(r).child(1)``, so the table does not
    depend on ``workers``.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    prior = HierarchicalWeibullPrior() if prior is None else prior
    geom = DykeGeometry() if geom is None else geom
    p_true = float(flood_probability(geom, scale, shape))

    def task(r):
        stream = rng.child(r)
        x = simulate_dyke_data(scale, shape, n, stream.child(0))
        try:
            est = dyke_estimates(x, prior, geom, posterior_draws, stream.child(1))
        except (DecisionUQError, ValueError, ArithmeticError) as exc:
            log.debug("dyke replicate %d failed: %s", r, exc)
            return None
        row = {"replicate": r, "n": n, "p_true": p_true, **est.__dict__}
        for e in ESTIMATES:
            row["class_" + e[2:]] = risk_class(row[e])
        return row

    results = map_replicates(task, replicates, workers)
    rows = [r for r in results if r is not None]
    failures = replicates - len(rows)
    if failures > MAX_FAILURE_FRACTION * replicates:
        raise NumericalError(f"dyke study failed on {failures} of {replicates} replicates")
    if failures:
        log.warning("dyke study: %d of %d replicates failed (excluded)", failures, replicates)
    return DykeTable(rows, failures, p_true)
