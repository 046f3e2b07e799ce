"""Decision-theoretic estimation of quantities of interest under parameter uncertainty.

Compare plug-in maximum likelihood, heuristic predictive estimation and
Bayes estimation under explicit cost functions, with importance sampling,
conjugate updates and Monte-Carlo risk evaluation.
"""
from .distributions import (Bernoulli, Beta, Exponential, Gamma, InverseGamma, Normal, TruncatedGamma, Weibull)
from .estimators import (DecisionProblem, bayes_estimate, double_monte_carlo, hpe_expectation, hpe_quantile,
                         hpe_quantile_closed, not_bayes_demo, posterior_expected_loss)
from .exceptions import ConfigError, DecisionUQError, ImproperDistributionError, NumericalError
from .inference import (BernoulliBeta, ExpInvGamma, HierarchicalWeibullPrior, NormalNIG, WeightedPosterior,
                        conjugate_posterior, mle_fit, sample_posterior_is, sample_posterior_mh)
from .loss import LogQuadratic, Quadratic, WeightedAbsolute
from .model import DykeGeometry, Exceedance, MeanOf, NegLog10Of, Quantile, flood_probability, qoi_eval
from .risk import EstimatorHandle, bayes_risk, frequentist_risk
from .rng import RngStream

__version__ = "0.1.0"

__all__ = [
    "Bernoulli", "BernoulliBeta", "Beta", "ConfigError", "DecisionProblem", "DecisionUQError", "DykeGeometry",
    "EstimatorHandle", "Exceedance", "ExpInvGamma", "Exponential", "Gamma", "HierarchicalWeibullPrior",
    "ImproperDistributionError", "InverseGamma", "LogQuadratic", "MeanOf", "NegLog10Of", "Normal", "NormalNIG",
    "NumericalError", "Quadratic", "Quantile", "RngStream", "TruncatedGamma", "WeightedAbsolute",
    "WeightedPosterior", "Weibull", "bayes_estimate", "bayes_risk", "conjugate_posterior", "double_monte_carlo",
    "flood_probability", "frequentist_risk", "hpe_expectation", "hpe_quantile", "hpe_quantile_closed", "mle_fit",
    "not_bayes_demo", "posterior_expected_loss", "qoi_eval", "sample_posterior_is", "sample_posterior_mh",
]
