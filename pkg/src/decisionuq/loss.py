"""Cost functions ``C(phi, d)`` for announcing ``d`` when the truth is ``phi``.

All built-in losses vanish at ``d == phi``, so they double as regrets.
Each loss is callable and vectorized over ``phi`` and ``d``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _pos_const(name, v):
    if not (np.isfinite(v) and v > 0):
        raise ValueError(f"{name} must be finite and > 0")


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


@dataclass(frozen=True)
class Quadratic:
    """``c0 * (phi - d)**2``."""

    c0: float = 1.0

    def __post_init__(self):
        _pos_const("c0", self.c0)

    def __call__(self, phi, d):
        phi, d = np.asarray(phi, dtype=float), np.asarray(d, dtype=float)
        return _out(self.c0 * (phi - d) ** 2)

    def describe(self) -> str:
        return f"quadratic(c0={self.c0!r})"


@dataclass(frozen=True)
class WeightedAbsolute:
    """``|phi - d|`` weighted by ``c1`` when under-estimating and ``c2`` when over-estimating.

    The Bayes decision is the posterior quantile of order ``c1 / (c1 + c2)``.
    """

    c1: float = 1.0
    c2: float = 1.0

    def __post_init__(self):
        _pos_const("c1", self.c1)
        _pos_const("c2", self.c2)

    @property
    def alpha(self) -> float:
        return self.c1 / (self.c1 + self.c2)

    def __call__(self, phi, d):
        phi, d = np.asarray(phi, dtype=float), np.asarray(d, dtype=float)
        w = np.where(d < phi, self.c1, self.c2)
        return _out(np.abs(phi - d) * w)

    def describe(self) -> str:
        return f"weighted-absolute(c1={self.c1!r},c2={self.c2!r})"


@dataclass(frozen=True)
class LogQuadratic:
    """``(ln phi - ln d)**2`` for positive ``phi`` and ``d``."""

    def __call__(self, phi, d):
        phi, d = np.asarray(phi, dtype=float), np.asarray(d, dtype=float)
        if np.any(phi <= 0) or np.any(d <= 0):
            raise ValueError("log-quadratic loss needs phi > 0 and d > 0")
        return _out((np.log(phi) - np.log(d)) ** 2)

    def describe(self) -> str:
        return "log-quadratic"


LossSpec = "Quadratic | WeightedAbsolute | LogQuadratic"


def loss_eval(loss, phi, d):
    """Cost of decision ``d`` when the quantity of interest equals ``phi``."""
    return loss(phi, d)


def regret(loss, phi, d):
    """Opportunity loss ``C(phi, d) - C(phi, phi)``."""
    return _out(np.asarray(loss(phi, d)) - np.asarray(loss(phi, phi)))
