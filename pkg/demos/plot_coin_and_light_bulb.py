"""
Predictive estimates for a coin and a batch of light bulbs
==========================================================

Two small conjugate problems where every estimator has a closed form.
"""

import math

import numpy as np

from decisionuq import distributions as dist
from decisionuq.estimators import (DecisionProblem, bayes_estimate, conjugate_bayes, conjugate_hpe,
                                   hpe_quantile_closed, not_bayes_demo, quantile_posterior_exponential)
from decisionuq.inference import BernoulliBeta, ExpInvGamma, conjugate_posterior, conjugate_weighted_posterior
from decisionuq.loss import LogQuadratic, Quadratic, WeightedAbsolute
from decisionuq.model import MeanOf, Quantile

# seven heads in eight tosses under the Beta(0, 0) prior
coin = conjugate_posterior(BernoulliBeta(0.0, 0.0), [1, 1, 1, 0, 1, 1, 1, 1])
print("coin: P[next toss is heads] =", conjugate_hpe(MeanOf(), dist.Bernoulli, coin))

# eight lifetimes summing to 90 under an IG(2, 10) prior on the mean lifetime
data = np.full(8, 90 / 8)
post = conjugate_posterior(ExpInvGamma(2.0, 10.0), data)
print("light bulb posterior:", post)

# median lifetime: posterior of the median, predictive median, Bayes rules
qpost = quantile_posterior_exponential(2.0, 10.0, data, 0.5)
print("posterior of the median lifetime:", qpost)
print("predictive median (HPE):", hpe_quantile_closed(2.0, 10.0, data, 0.5))
print("plug-in MLE:", 90 / 8 * math.log(2))
for loss in (Quadratic(), WeightedAbsolute(1, 3), LogQuadratic()):
    print(f"Bayes under {loss.describe()}:", conjugate_bayes(Quantile(0.5), loss, dist.Exponential, post))

# the same rule by brute force on a posterior cloud
cloud = conjugate_weighted_posterior(ExpInvGamma(2.0, 10.0), data, 100_000)
print("Bayes (quadratic) from 1e5 posterior quantiles:",
      bayes_estimate(DecisionProblem(Quantile(0.5), Quadratic(), cloud, dist.Exponential)))

# identical posteriors for the median, different predictive medians
demo = not_bayes_demo(10, 100.0)
print("two data sets with the same quantile posterior:", demo.posteriors_identical)
print("their predictive medians:", demo.hpe)
