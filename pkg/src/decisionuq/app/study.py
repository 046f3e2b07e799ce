"""Configuration-driven estimation study: MLE, HPE and Bayes estimates side by side."""
from __future__ import annotations

import logging
import math
import time
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .. import distributions as dist
from ..estimators import (DecisionProblem, bayes_estimate, conjugate_bayes, conjugate_hpe, hpe_expectation,
                          hpe_quantile, posterior_expected_loss)
from ..exceptions import ConfigError, NumericalError
from ..inference import (ESS_WARN_FRACTION, HierarchicalWeibullPrior, LogNormalProposal, LowESSWarning, NormalNIG,
                         conjugate_posterior, conjugate_weighted_posterior, mle_fit, plug_in, sample_posterior_is,
                         sample_posterior_mh)
from ..loss import Quadratic
from ..model import NegLog10Of, Quantile, param_names, qoi_eval
from ..risk import EstimatorHandle, bayes_risk, frequentist_risk
from ..rng import RngStream
from .config import LossEntry, StudyConfig

log = logging.getLogger(__name__)

ESS_FLOOR = 50
LN10 = math.log(10.0)


# --------------------------------------------------------------------------
# Prior access and posterior construction
# --------------------------------------------------------------------------

def prior_functions(prior):
    """``(sampler(rng, count) -> dict, log_pdf(dict) -> ndarray)`` for any supported prior."""
    if isinstance(prior, HierarchicalWeibullPrior):
        return prior.sample, prior.log_pdf
    if isinstance(prior, NormalNIG):
        return prior.prior.sample, prior.prior.log_pdf
    fam = prior.prior
    if not fam.proper:
        raise ConfigError(f"improper prior {fam!r} cannot be sampled; use sampler 'auto' or 'conjugate'")
    name = param_names(prior.model)[0]
    return (lambda rng, k: {name: fam.sample(rng, k)}), (lambda pts: fam._log_pdf(np.asarray(pts[name], float)))


def _mh_steps(model, data):
    # 2.38/sqrt(d) times the curvature-based posterior sd on the log scale
    names = param_names(model)
    try:
        prop = LogNormalProposal.around_mle(model, data, inflate=1.0)
        sd = np.sqrt(np.diag(prop.cov))
        if np.all(np.isfinite(sd)) and np.all(sd > 0):
            return 2.38 / math.sqrt(len(names)) * sd
    except (ValueError, ArithmeticError, np.linalg.LinAlgError, NumericalError):
        pass
    return np.full(len(names), 0.5)


def build_posterior(model, prior, data, count: int, sampler: str, rng: RngStream):
    """Posterior cloud plus the closed-form posterior when one exists.

    ``auto`` picks the conjugate update when available, otherwise importance
    sampling from the prior with a Metropolis fallback when its ess falls
    below 1% of the draws.  Any result with ess below 50 is rejected.
    """
    conjugate = not isinstance(prior, HierarchicalWeibullPrior)
    closed = None
    if conjugate and sampler in ("auto", "conjugate"):
        closed = conjugate_posterior(prior, data)
        # univariate posteriors use a deterministic quantile grid
        grid = isinstance(closed, dist.DistFamily)
        post = conjugate_weighted_posterior(prior, data, count, rng=None if grid else rng.child(0))
    elif sampler == "metropolis":
        post = _metropolis(model, prior, data, count, rng.child(2))
    else:
        sample_prior, log_prior = prior_functions(prior)
        proposal = LogNormalProposal.around_mle(model, data) if sampler == "importance-mle" else None
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LowESSWarning)
            post = sample_posterior_is(model, sample_prior, log_prior, data, count, rng.child(1), proposal=proposal)
        if sampler == "auto" and post.ess < ESS_WARN_FRACTION * count:
            log.warning("importance ess %.1f below %.0f%% of %d draws; switching to Metropolis",
                        post.ess, 100 * ESS_WARN_FRACTION, count)
            is_ess = post.ess
            post = _metropolis(model, prior, data, count, rng.child(2))
            post.diagnostics["importance_ess"] = is_ess
        elif post.ess < ESS_WARN_FRACTION * count:
            warnings.warn(post.diagnostics.get("warning", "low effective sample size"), LowESSWarning, stacklevel=2)
    if post.ess < ESS_FLOOR:
        raise NumericalError(f"effective sample size {post.ess:.1f} is below the hard floor {ESS_FLOOR}; "
                             "increase montecarlo.posterior_draws or choose sampler 'metropolis'")
    return post, closed


def _metropolis(model, prior, data, count, rng):
    _, log_prior = prior_functions(prior)
    burn = min(max(count // 10, 100), count - 1)
    return sample_posterior_mh(model, lambda th: float(np.asarray(log_prior(th))), data, count + burn, burn,
                               _mh_steps(model, data), rng)


# --------------------------------------------------------------------------
# Estimates
# --------------------------------------------------------------------------

@dataclass
class Estimate:
    """One estimator value with its posterior diagnostics."""

    estimator: str
    loss: str
    value: float
    expected_loss: float | None = None
    method: str = "monte-carlo"
    std_error: float | None = None
    ess: float | None = None
    regret: float | None = None

    def as_dict(self) -> dict:
        return dict(self.__dict__)


class StudyContext:
    """Data, posterior and cached derived quantities shared by all estimates of one study."""

    def __init__(self, cfg: StudyConfig, data, rng: RngStream):
        self.cfg = cfg
        self.data = np.asarray(data, dtype=float)
        self.rng = rng

    @cached_property
    def mle(self) -> dict:
        return mle_fit(self.cfg.model, self.data)

    @cached_property
    def closed(self):
        if isinstance(self.cfg.prior, HierarchicalWeibullPrior) or self.cfg.sampler not in ("auto", "conjugate"):
            return None
        return conjugate_posterior(self.cfg.prior, self.data)

    @cached_property
    def posterior(self):
        post, _ = build_posterior(self.cfg.model, self.cfg.prior, self.data, self.cfg.posterior_draws,
                                  self.cfg.sampler, self.rng.child(0))
        return post

    def problem(self, entry: LossEntry) -> DecisionProblem:
        spec = NegLog10Of(self.cfg.quantity) if entry.scale == "neglog10" else self.cfg.quantity
        return DecisionProblem(spec, entry.loss, self.posterior, self.cfg.model)

    def _std_error(self, values) -> float:
        post = self.posterior
        w = post.weights
        m = float(np.dot(w, values))
        return math.sqrt(max(float(np.dot(w, (values - m) ** 2)), 0.0) / post.ess)

    def estimate(self, name: str, entry: LossEntry) -> tuple[float, str, float | None]:
        """``(value, method, std_error)`` on the quantity's own scale."""
        cfg = self.cfg
        q = cfg.quantity
        closed = self.closed if isinstance(self.closed, dist.DistFamily) else None
        if name == "mle":
            return float(plug_in(q, cfg.model, self.mle)), "plug-in", 0.0
        if name == "hpe":
            if closed is not None:
                v = conjugate_hpe(q, cfg.model, closed)
                if v is not None:
                    return float(v), "closed-form", 0.0
            if isinstance(q, Quantile):
                v = hpe_quantile(q.alpha, self.posterior, cfg.model, cfg.predictive_draws, self.rng.child(1))
                return v, "double-monte-carlo", None
            prob = DecisionProblem(q, None, self.posterior, cfg.model)
            return hpe_expectation(q, self.posterior, cfg.model), "posterior-mean", self._std_error(prob.phi)
        if name == "bayes":
            if closed is not None and entry.scale == "native":
                v = conjugate_bayes(q, entry.loss, cfg.model, closed)
                if v is not None:
                    return float(v), "closed-form", 0.0
            prob = self.problem(entry)
            d = bayes_estimate(prob)
            se = None
            if isinstance(entry.loss, Quadratic):
                se = self._std_error(prob.phi)
            if entry.scale == "neglog10":
                return 10.0 ** (-d), "monte-carlo", None
            return d, "monte-carlo", se
        raise ValueError(f"unknown estimator {name!r}")

    def expected_loss(self, entry: LossEntry, value: float) -> float | None:
        d = value
        if entry.scale == "neglog10":
            if not value > 0:
                return None
            d = -math.log10(value)
        try:
            v = posterior_expected_loss(self.problem(entry), d)
        except ValueError:
            return None
        return v if math.isfinite(v) else None


def _loss_on_scale(entry: LossEntry, phi: float, d: float) -> float | None:
    if entry.scale == "neglog10":
        if not (phi > 0 and d > 0):
            return None
        phi, d = -math.log10(phi), -math.log10(d)
    try:
        return float(entry.loss(phi, d))
    except ValueError:
        return None


@dataclass
class EstimateReport:
    """Result of :func:`run_study`."""

    entries: list
    config: dict
    seed: int
    posterior: dict
    mle: dict | None = None
    truth: dict | None = None
    wall_clock: float = 0.0
    columns = ["estimator", "loss", "value", "expected_loss", "method", "std_error", "ess", "regret"]

    def value(self, estimator: str, loss: str | None = None) -> float:
        """Value of the first entry matching ``estimator`` (and ``loss`` digest when given)."""
        for e in self.entries:
            if e.estimator == estimator and (loss is None or e.loss == loss):
                return e.value
        raise KeyError((estimator, loss))

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {"seed": self.seed, "config": self.config, "mle": self.mle, "posterior": self.posterior,
               "truth": self.truth, "estimates": [e.as_dict() for e in self.entries]}
        if include_timing:
            out["wall_clock_seconds"] = self.wall_clock
        return out

    def rows(self) -> list[dict]:
        return [e.as_dict() for e in self.entries]


def run_study(cfg: StudyConfig, data=None, rng: RngStream | None = None) -> EstimateReport:
    """Fit the MLE, build the posterior and compute every requested (estimator, loss) pair.

    Values are reported on the quantity's own scale; a loss declared on the
    ``neglog10`` scale is minimized in ``-log10 p`` and mapped back through
    ``10**(-d)``.
    """
    t0 = time.perf_counter()
    if data is None:
        data = cfg.load_data()
    rng = RngStream(cfg.seed) if rng is None else rng
    ctx = StudyContext(cfg, data, rng)
    mle = None
    if "mle" in cfg.estimators:
        try:
            mle = ctx.mle
        except (ValueError, ArithmeticError) as exc:
            raise NumericalError(f"maximum-likelihood fit failed: {exc}") from None
    phi_true = float(qoi_eval(cfg.quantity, cfg.model, cfg.truth)) if cfg.truth else None
    entries = []
    for name in cfg.estimators:
        for entry in cfg.losses:
            value, method, se = ctx.estimate(name, entry)
            if not math.isfinite(value):
                raise NumericalError(f"{name} estimate under {entry.digest} is not finite")
            e = Estimate(name, entry.digest, value, method=method, std_error=se)
            e.expected_loss = ctx.expected_loss(entry, value)
            e.ess = ctx.posterior.ess
            if phi_true is not None:
                e.regret = _loss_on_scale(entry, phi_true, value)
            entries.append(e)
    p = ctx.posterior
    post = {"source": p.source, "size": p.size, "ess": p.ess, "diagnostics": dict(p.diagnostics)}
    truth = None if cfg.truth is None else {"parameters": cfg.truth, "value": phi_true}
    return EstimateReport(entries, cfg.raw, cfg.seed, post, mle, truth, time.perf_counter() - t0)


# --------------------------------------------------------------------------
# Risk study
# --------------------------------------------------------------------------

def _replicate_estimator(cfg: StudyConfig, name: str, entry: LossEntry) -> EstimatorHandle:
    def procedure(sample, stream):
        ctx = StudyContext(cfg, sample, stream)
        v, _, _ = ctx.estimate(name, entry)
        return -math.log10(v) if entry.scale == "neglog10" else v

    return EstimatorHandle(name, procedure, f"{entry.digest}|N={cfg.posterior_draws}|I={cfg.predictive_draws}")


def run_risk(cfg: StudyConfig, rng: RngStream | None = None) -> list[dict]:
    """Monte-Carlo risk of every (estimator, loss) pair in ``cfg``.

    With a ``truth`` block this is the frequentist risk at that parameter;
    otherwise the Bayes risk under the configured (proper) prior.  The
    ``risk`` block sets ``sample_size`` (default: the data length),
    ``replicates`` (default 1000) and ``workers`` (default 1).
    """
    rng = RngStream(cfg.seed) if rng is None else rng
    block = cfg.risk
    if "sample_size" in block:
        n = block["sample_size"]
    else:
        n = len(cfg.load_data())
    reps = block.get("replicates", 1000)
    workers = block.get("workers", 1)
    for key, v in (("sample_size", n), ("replicates", reps), ("workers", workers)):
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise ConfigError(f"risk.{key} must be a positive integer, got {v!r}")
    rows = []
    for name in cfg.estimators:
        for entry in cfg.losses:
            spec = NegLog10Of(cfg.quantity) if entry.scale == "neglog10" else cfg.quantity
            est = _replicate_estimator(cfg, name, entry)
            # common random numbers: every pair sees the same datasets
            if cfg.truth is not None:
                rep = frequentist_risk(est, cfg.model, cfg.truth, spec, entry.loss, n, reps, rng, workers=workers)
            else:
                sampler, _ = prior_functions(cfg.prior)
                rep = bayes_risk(est, cfg.model, sampler, spec, entry.loss, n, reps, rng, workers=workers,
                                 prior_name=type(cfg.prior).__name__)
            row = rep.as_dict()
            row["loss"] = entry.digest
            row["sample_size"] = n
            row["digest"] = est.digest
            rows.append(row)
    return rows


@dataclass
class RiskTable:
    """Rows from :func:`run_risk` in report form."""

    entries: list = field(default_factory=list)
    seed: int = 0
    columns = ["estimator", "loss", "risk", "mc_std_error", "replicates", "failures", "sample_size", "truth", "digest"]

    def to_dict(self, include_timing: bool = False) -> dict:
        return {"seed": self.seed, "risks": self.entries}

    def rows(self) -> list[dict]:
        return self.entries
