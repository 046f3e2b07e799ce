"""JSON study configuration.

A study file looks like::

    {
      "model": "exponential",
      "prior": {"type": "inverse-gamma", "n0": 2, "s0": 10},
      "data": [12.0, 7.5, ...],            # or "path/to/data.csv"
      "quantity": {"type": "quantile", "alpha": 0.5},
      "losses": [{"type": "quadratic"}, {"type": "weighted-absolute", "c1": 1, "c2": 9, "scale": "neglog10"}],
      "estimators": ["mle", "hpe", "bayes"],
      "montecarlo": {"posterior_draws": 100000, "predictive_draws": 100000, "sampler": "auto"},
      "seed": 20240101
    }

Two optional blocks extend it: ``truth`` (a parameter point, reported next to
the estimates) and ``risk`` (settings for the ``risk`` subcommand).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import distributions as dist
from ..exceptions import ConfigError
from ..inference import BernoulliBeta, ExpInvGamma, HierarchicalWeibullPrior, NormalNIG
from ..loss import LogQuadratic, Quadratic, WeightedAbsolute
from ..model import DykeGeometry, Exceedance, MeanOf, Quantile, model_by_name, param_names
from .io import ingest_csv

REQUIRED_KEYS = ("model", "prior", "data", "quantity", "losses", "estimators", "montecarlo", "seed")
OPTIONAL_KEYS = ("truth", "risk")
ESTIMATORS = ("mle", "hpe", "bayes")
SAMPLERS = ("auto", "conjugate", "importance", "importance-mle", "metropolis")
DEFAULT_DRAWS = 100_000
MIN_DRAWS = 100


def _num(block: dict, key: str, where: str, default=None) -> float:
    if key not in block:
        if default is None:
            raise ConfigError(f"{where}: missing required field {key!r}")
        return float(default)
    v = block[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{where}: field {key!r} must be a finite number, got {v!r}")
    return float(v)


def _check_keys(block, allowed, where):
    if not isinstance(block, dict):
        raise ConfigError(f"{where} must be a JSON object")
    extra = sorted(set(block) - set(allowed))
    if extra:
        raise ConfigError(f"{where}: unknown field(s) {extra}; allowed: {sorted(allowed)}")


def parse_prior(block: dict, model):
    where = "prior"
    if not isinstance(block, dict) or "type" not in block:
        raise ConfigError("prior must be an object with a 'type' field")
    kind = block["type"]
    try:
        if kind == "inverse-gamma":
            _check_keys(block, ("type", "n0", "s0"), where)
            prior = ExpInvGamma(_num(block, "n0", where), _num(block, "s0", where))
        elif kind == "beta":
            _check_keys(block, ("type", "a", "b"), where)
            prior = BernoulliBeta(_num(block, "a", where, 0.0), _num(block, "b", where, 0.0))
            if prior.a < 0 or prior.b < 0:
                raise ConfigError("prior: Beta parameters must be >= 0")
        elif kind == "normal-inverse-gamma":
            _check_keys(block, ("type", "mu0", "kappa0", "a0", "b0"), where)
            prior = NormalNIG(*(_num(block, k, where) for k in ("mu0", "kappa0", "a0", "b0")))
            prior.prior  # validates positivity
        elif kind == "hierarchical-weibull":
            _check_keys(block, ("type", "m", "beta0", "te", "eta0", "beta_lower"), where)
            m = _num(block, "m", where, 1.0)
            beta0 = _num(block, "beta0", where, 1.5)
            beta_lower = _num(block, "beta_lower", where, 1.0)
            if "te" in block and "eta0" in block:
                raise ConfigError("prior: give either 'te' (median discharge guess) or 'eta0', not both")
            if "te" in block:
                prior = HierarchicalWeibullPrior(m, beta0, _num(block, "te", where), beta_lower)
            else:
                prior = HierarchicalWeibullPrior.from_prior_scale(m, beta0, _num(block, "eta0", where, 800.0),
                                                                  beta_lower)
        else:
            raise ConfigError(f"prior: unknown type {kind!r}; expected inverse-gamma, beta, "
                              "normal-inverse-gamma or hierarchical-weibull")
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"prior: {exc}") from None
    expected = dist.Weibull if isinstance(prior, HierarchicalWeibullPrior) else prior.model
    if expected is not model:
        raise ConfigError(f"prior type {kind!r} does not fit model {model.__name__.lower()!r}")
    return prior


def parse_quantity(block: dict, model):
    where = "quantity"
    if not isinstance(block, dict) or "type" not in block:
        raise ConfigError("quantity must be an object with a 'type' field")
    kind = block["type"]
    try:
        if kind == "mean":
            _check_keys(block, ("type",), where)
            return MeanOf()
        if kind == "exceedance":
            _check_keys(block, ("type", "threshold"), where)
            return Exceedance(_num(block, "threshold", where))
        if kind == "quantile":
            _check_keys(block, ("type", "alpha"), where)
            return Quantile(_num(block, "alpha", where))
        if kind == "flood-probability":
            _check_keys(block, ("type", "riverbed", "rating", "height"), where)
            base = DykeGeometry()
            geom = DykeGeometry(_num(block, "riverbed", where, base.riverbed), _num(block, "rating", where, base.rating),
                                _num(block, "height", where, base.height))
            if model is not dist.Weibull:
                raise ConfigError("quantity 'flood-probability' needs the weibull discharge model")
            return geom.exceedance()
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"quantity: {exc}") from None
    raise ConfigError(f"quantity: unknown type {kind!r}; expected mean, exceedance, quantile or flood-probability")


@dataclass(frozen=True)
class LossEntry:
    """A loss and the scale it is applied on (``native`` or ``neglog10``)."""

    loss: object
    scale: str = "native"

    @property
    def digest(self) -> str:
        d = self.loss.describe()
        return d if self.scale == "native" else f"{d} on neglog10"


def parse_loss(block: dict, quantity, model) -> LossEntry:
    where = "losses[]"
    if not isinstance(block, dict) or "type" not in block:
        raise ConfigError("each loss must be an object with a 'type' field")
    kind = block["type"]
    try:
        if kind == "quadratic":
            _check_keys(block, ("type", "c0", "scale"), where)
            loss = Quadratic(_num(block, "c0", where, 1.0))
        elif kind == "weighted-absolute":
            _check_keys(block, ("type", "c1", "c2", "scale"), where)
            loss = WeightedAbsolute(_num(block, "c1", where, 1.0), _num(block, "c2", where, 1.0))
        elif kind == "log-quadratic":
            _check_keys(block, ("type", "scale"), where)
            loss = LogQuadratic()
        else:
            raise ConfigError(f"loss: unknown type {kind!r}; expected quadratic, weighted-absolute or log-quadratic")
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"loss: {exc}") from None
    scale = block.get("scale", "native")
    if scale not in ("native", "neglog10"):
        raise ConfigError(f"loss scale must be 'native' or 'neglog10', got {scale!r}")
    if scale == "neglog10" and not getattr(quantity, "probability", False):
        raise ConfigError("loss scale 'neglog10' applies only to probability-valued quantities")
    positive = getattr(quantity, "probability", False) or model in (dist.Exponential, dist.Weibull)
    if isinstance(loss, LogQuadratic) and scale == "native" and not positive:
        raise ConfigError("log-quadratic loss needs a positive quantity; not guaranteed for this model")
    if isinstance(loss, LogQuadratic) and scale == "neglog10":
        raise ConfigError("log-quadratic loss on the neglog10 scale is not supported")
    return LossEntry(loss, scale)


@dataclass
class StudyConfig:
    """Validated study configuration.

    ``raw`` keeps the parsed JSON for echoing in reports; ``base_dir`` resolves
    relative data paths.
    """

    model: type
    prior: object
    data: object
    quantity: object
    losses: list
    estimators: tuple
    posterior_draws: int
    predictive_draws: int
    sampler: str
    seed: int
    truth: dict | None = None
    risk: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)
    base_dir: Path = Path(".")

    @classmethod
    def from_dict(cls, raw: dict, base_dir=".") -> "StudyConfig":
        if not isinstance(raw, dict):
            raise ConfigError("study configuration must be a JSON object")
        missing = [k for k in REQUIRED_KEYS if k not in raw]
        if missing:
            raise ConfigError(f"configuration is missing key(s) {missing}")
        _check_keys(raw, REQUIRED_KEYS + OPTIONAL_KEYS, "configuration")
        try:
            model = model_by_name(str(raw["model"]))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        prior = parse_prior(raw["prior"], model)
        quantity = parse_quantity(raw["quantity"], model)
        if not isinstance(raw["losses"], list) or not raw["losses"]:
            raise ConfigError("losses must be a non-empty list")
        losses = [parse_loss(b, quantity, model) for b in raw["losses"]]
        ests = raw["estimators"]
        if not isinstance(ests, list) or not ests or any(e not in ESTIMATORS for e in ests):
            raise ConfigError(f"estimators must be a non-empty list drawn from {list(ESTIMATORS)}, got {ests!r}")
        if len(set(ests)) != len(ests):
            raise ConfigError("estimators must not repeat")
        mc = raw["montecarlo"]
        _check_keys(mc, ("posterior_draws", "predictive_draws", "sampler"), "montecarlo")
        n_post = _num(mc, "posterior_draws", "montecarlo", DEFAULT_DRAWS)
        n_pred = _num(mc, "predictive_draws", "montecarlo", DEFAULT_DRAWS)
        for name, v in (("posterior_draws", n_post), ("predictive_draws", n_pred)):
            if v != int(v) or v < MIN_DRAWS:
                raise ConfigError(f"montecarlo.{name} must be an integer >= {MIN_DRAWS}, got {v!r}")
        sampler = mc.get("sampler", "auto")
        if sampler not in SAMPLERS:
            raise ConfigError(f"montecarlo.sampler must be one of {list(SAMPLERS)}, got {sampler!r}")
        if sampler == "conjugate" and isinstance(prior, HierarchicalWeibullPrior):
            raise ConfigError("sampler 'conjugate' needs a conjugate prior; use 'auto' or 'importance'")
        seed = raw["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
        truth = raw.get("truth")
        if truth is not None:
            names = param_names(model)
            if not isinstance(truth, dict) or set(truth) != set(names):
                raise ConfigError(f"truth must give exactly the parameters {list(names)}")
            truth = {k: _num(truth, k, "truth") for k in names}
        risk = raw.get("risk") or {}
        _check_keys(risk, ("sample_size", "replicates", "workers"), "risk")
        data = raw["data"]
        if data is not None and not isinstance(data, (str, list)):
            raise ConfigError("data must be a list of numbers, a CSV path or null")
        cfg = cls(model, prior, data, quantity, losses, tuple(ests), int(n_post), int(n_pred), sampler, int(seed),
                  truth, dict(risk), raw, Path(base_dir))
        if isinstance(data, str):
            path = cfg.data_path
            if not path.is_file():
                raise ConfigError(f"data file {str(path)!r} does not exist")
        return cfg

    @classmethod
    def load(cls, path) -> "StudyConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read configuration {str(path)!r}: {exc.strerror}") from None
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(raw, base_dir=path.parent)

    @property
    def data_path(self) -> Path | None:
        if not isinstance(self.data, str):
            return None
        p = Path(self.data)
        return p if p.is_absolute() else self.base_dir / p

    def load_data(self):
        """Observations as a float array (reads the CSV when ``data`` is a path)."""
        if self.data is None:
            raise ConfigError("no data: set 'data' in the configuration or pass --data")
        if isinstance(self.data, str):
            return ingest_csv(self.data_path)
        try:
            x = np.asarray(self.data, dtype=float)
        except (TypeError, ValueError):
            raise ConfigError("inline data must be a flat list of numbers") from None
        if x.ndim != 1 or not np.all(np.isfinite(x)):
            raise ConfigError("inline data must be a flat list of finite numbers")
        return x

    def with_overrides(self, data=None, seed=None) -> "StudyConfig":
        """Copy with the data source and/or seed replaced (command-line overrides)."""
        raw = dict(self.raw)
        if data is not None:
            raw["data"] = str(Path(data).resolve())
        if seed is not None:
            raw["seed"] = seed
        return type(self).from_dict(raw, self.base_dir)
