import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import optimize, stats

from decisionuq import distributions as dist
from decisionuq.estimators import (DecisionProblem, bayes_estimate, bayes_estimate_closed, check_loss,
                                   conjugate_bayes, conjugate_hpe, double_monte_carlo, empirical_quantile,
                                   golden_section, hpe_as_predictor_check, hpe_expectation, hpe_quantile,
                                   hpe_quantile_closed, minimize_expected_loss, not_bayes_demo,
                                   posterior_expected_loss, quantile_posterior_exponential, weighted_quantile)
from decisionuq.inference import BernoulliBeta, ExpInvGamma, WeightedPosterior, conjugate_weighted_posterior
from decisionuq.loss import LogQuadratic, Quadratic, WeightedAbsolute
from decisionuq.model import Exceedance, MeanOf, NegLog10Of, Quantile
from decisionuq.rng import RngStream

LIGHT = np.full(8, 90 / 8)
IG_PRIOR = ExpInvGamma(2.0, 10.0)


@pytest.fixture(scope="module")
def grid_post():
    return conjugate_weighted_posterior(IG_PRIOR, LIGHT, 200_000)


@given(c=st.floats(-50, 50), width=st.floats(1, 100))
def test_golden_section_finds_parabola_vertex(c, width):
    x = golden_section(lambda t: (t - c) ** 2, c - width, c + 0.7 * width)
    assert x == pytest.approx(c, abs=1e-6 * max(1.0, abs(c)) + 1e-8)


def test_golden_section_degenerate_bracket():
    assert golden_section(lambda t: t, 2.0, 2.0) == 2.0


@given(v=st.lists(st.floats(-100, 100), min_size=1, max_size=50), a=st.floats(0.01, 0.99))
def test_weighted_quantile_equal_weights_is_lower_empirical_quantile(v, a):
    ref = np.quantile(np.array(v), a, method="inverted_cdf")
    assert weighted_quantile(v, np.ones(len(v)), a) == ref
    assert empirical_quantile(v, a) == ref


def test_weighted_quantile_respects_weights():
    assert weighted_quantile([1.0, 2.0, 3.0], [0.1, 0.1, 0.8], 0.2) == 2.0
    assert weighted_quantile([1.0, 2.0, 3.0], [0.1, 0.1, 0.8], 0.21) == 3.0


def test_closed_form_bayes_estimates_of_parameter():
    post = dist.InverseGamma(10.0, 100.0)
    assert bayes_estimate_closed(Quadratic(), post) == pytest.approx(100 / 9)
    assert bayes_estimate_closed(WeightedAbsolute(1, 3), post) == pytest.approx(post.quantile(0.25))
    assert bayes_estimate_closed(LogQuadratic(), post) == pytest.approx(math.exp(math.log(100) - 2.251752589066721))


@pytest.mark.parametrize("loss", [Quadratic(), WeightedAbsolute(1, 3), WeightedAbsolute(9, 1), LogQuadratic()],
                         ids=lambda c: c.describe())
def test_closed_rule_minimizes_expected_loss(loss):
    g = np.random.default_rng(0)
    post = WeightedPosterior({"mean": g.gamma(3.0, 2.0, 3000)}, g.normal(0, 0.3, 3000))
    prob = DecisionProblem(MeanOf(), loss, post, dist.Exponential)
    d_closed = bayes_estimate(prob)
    d_num = minimize_expected_loss(prob)
    # compare posterior expected losses: weighted quantiles sit on a flat stretch
    assert posterior_expected_loss(prob, d_closed) <= posterior_expected_loss(prob, d_num) + 1e-9
    assert d_num == pytest.approx(d_closed, rel=0.01)


def test_golden_section_used_for_custom_loss():
    post = WeightedPosterior({"mean": np.linspace(1, 3, 101)}, np.zeros(101))
    prob = DecisionProblem(MeanOf(), lambda phi, d: np.abs(phi - d) ** 3, post, dist.Exponential)
    assert bayes_estimate(prob) == pytest.approx(2.0, abs=1e-6)
    with pytest.raises(ValueError):
        bayes_estimate(prob, method="magic")


def test_log_quadratic_needs_positive_decision(grid_post):
    prob = DecisionProblem(MeanOf(), LogQuadratic(), grid_post, dist.Exponential)
    with pytest.raises(ValueError):
        posterior_expected_loss(prob, 0.0)


@pytest.mark.parametrize("spec", [MeanOf(), Quantile(0.5), Quantile(0.9), Exceedance(10.0)], ids=repr)
@pytest.mark.parametrize("loss", [Quadratic(), WeightedAbsolute(1, 3), LogQuadratic()], ids=lambda c: c.describe())
def test_exact_bayes_agrees_with_monte_carlo(grid_post, spec, loss):
    exact = conjugate_bayes(spec, loss, dist.Exponential, dist.InverseGamma(10.0, 100.0))
    mc = bayes_estimate(DecisionProblem(spec, loss, grid_post, dist.Exponential))
    assert exact == pytest.approx(mc, rel=2e-3)


def test_posterior_mean_of_median_quantile():
    exact = conjugate_bayes(Quantile(0.5), Quadratic(), dist.Exponential, dist.InverseGamma(10.0, 100.0))
    assert exact == pytest.approx(100 / 9 * math.log(2), rel=1e-14)
    assert exact == pytest.approx(7.7016, abs=1e-4)


@pytest.mark.parametrize("spec", [MeanOf(), Exceedance(10.0), Exceedance(30.0)], ids=repr)
def test_exact_hpe_agrees_with_posterior_average(grid_post, spec):
    exact = conjugate_hpe(spec, dist.Exponential, dist.InverseGamma(10.0, 100.0))
    assert exact == pytest.approx(hpe_expectation(spec, grid_post, dist.Exponential), rel=1e-3)


def test_bernoulli_exact_values():
    post = dist.Beta(7.0, 1.0)
    assert conjugate_hpe(MeanOf(), dist.Bernoulli, post) == 7 / 8
    assert conjugate_hpe(Exceedance(0.5), dist.Bernoulli, post) == 7 / 8
    assert conjugate_hpe(Exceedance(-1.0), dist.Bernoulli, post) == 1.0
    assert conjugate_hpe(MeanOf(lambda y: 2 * y + 1), dist.Bernoulli, post) == pytest.approx(2.75)
    assert conjugate_bayes(MeanOf(), WeightedAbsolute(1, 1), dist.Bernoulli, post) == pytest.approx(0.5 ** (1 / 7))
    assert conjugate_bayes(MeanOf(), LogQuadratic(), dist.Bernoulli, post) == pytest.approx(math.exp(-1 / 7))
    assert conjugate_hpe(Quantile(0.5), dist.Bernoulli, post) is None


def test_hpe_rejects_quantile_in_expectation_path(grid_post):
    with pytest.raises(ValueError, match="hpe_quantile"):
        hpe_expectation(Quantile(0.5), grid_post, dist.Exponential)


def test_predictive_quantile_closed_form_against_root_finding():
    # predictive survival of an exponential under IG(a, b) is (b / (b + y))**a
    a, b = 10.0, 100.0
    for alpha in (0.1, 0.5, 0.95):
        root = optimize.brentq(lambda y: 1 - (b / (b + y)) ** a - alpha, 0.0, 1e4, xtol=1e-14)
        assert hpe_quantile_closed(2.0, 10.0, LIGHT, alpha) == pytest.approx(root, rel=1e-10)
    assert hpe_quantile_closed(2.0, 10.0, LIGHT, 0.5) == pytest.approx((2**0.1 - 1) * 100, rel=1e-12)


def test_quantile_posterior_is_scaled_parameter_posterior():
    qp = quantile_posterior_exponential(2.0, 10.0, LIGHT, 0.5)
    assert qp.shape == 10.0
    assert qp.scale == pytest.approx(100 * math.log(2), rel=1e-14)


def test_double_monte_carlo_follows_predictive_law(grid_post):
    ps = double_monte_carlo(dist.Exponential, grid_post, 50_000, RngStream(4))
    lomax_cdf = lambda y: 1 - (100.0 / (100.0 + y)) ** 10  # noqa: E731
    assert stats.kstest(ps.draws, lomax_cdf).pvalue > 1e-3
    again = double_monte_carlo(dist.Exponential, grid_post, 50_000, RngStream(4))
    assert np.array_equal(ps.draws, again.draws)


def test_double_monte_carlo_sharding_is_deterministic(grid_post):
    a = double_monte_carlo(dist.Exponential, grid_post, 3000, RngStream(4), shard_size=1000)
    b = double_monte_carlo(dist.Exponential, grid_post, 3000, RngStream(4), shard_size=1000)
    assert np.array_equal(a.draws, b.draws)
    with pytest.raises(ValueError):
        double_monte_carlo(dist.Exponential, grid_post, 0, RngStream(4))


def test_predictive_quantile_simulation(grid_post):
    v = hpe_quantile(0.5, grid_post, dist.Exponential, 400_000, RngStream(6))
    assert v == pytest.approx(7.1773, abs=0.05)


def test_identical_posteriors_different_predictive_quantiles():
    demo = not_bayes_demo(10, 100.0)
    assert demo.posteriors_identical
    assert demo.hpe_differ
    assert demo.hpe[0] == pytest.approx(10.354, abs=1e-3)
    assert demo.hpe[1] == pytest.approx(10.727, abs=1e-3)
    assert demo.bayes_quadratic[0] == demo.bayes_quadratic[1]
    with pytest.raises(ValueError):
        not_bayes_demo(1, 100.0)


@given(y=st.lists(st.floats(-10, 10), min_size=1, max_size=30), d=st.floats(-12, 12), a=st.floats(0.01, 0.99))
def test_check_loss_against_direct_average(y, d, a):
    yy = np.array(y)
    direct = np.mean(np.abs(yy - d) * np.where(d < yy, a, 1 - a))
    assert check_loss(a, yy, d)[0] == pytest.approx(direct, abs=1e-9)


def test_predictive_quantile_minimizes_check_loss(grid_post):
    chk = hpe_as_predictor_check(0.75, grid_post, dist.Exponential, 100_000, RngStream(9))
    assert chk.agree


def test_neglog10_weighted_absolute_is_cautious():
    post = WeightedPosterior({"mean": np.linspace(1.0, 10.0, 1001)}, np.zeros(1001))
    spec = Exceedance(20.0)
    d = bayes_estimate(DecisionProblem(NegLog10Of(spec), WeightedAbsolute(1, 9), post, dist.Exponential))
    p = 10 ** (-d)
    median = bayes_estimate(DecisionProblem(spec, WeightedAbsolute(1, 1), post, dist.Exponential))
    assert p >= median


def test_improper_prior_handled_by_exact_path():
    post = dist.Beta(7.0, 1.0)
    assert conjugate_hpe(MeanOf(), dist.Bernoulli, post) == conjugate_bayes(MeanOf(), Quadratic(), dist.Bernoulli,
                                                                            post)
    assert BernoulliBeta().prior.proper is False
