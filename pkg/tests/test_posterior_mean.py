import math

import numpy as np
import pytest
from scipy.stats import norm

from levyshrink.penalties import Penalty
from levyshrink.posterior_mean import (
    NormalMeansProblem,
    inverted_beta_density,
    inverted_beta_marginal,
    inverted_beta_posterior_mean,
    marginal_density,
    posterior_mean_quadrature,
    posterior_mean_score,
    posterior_mean_size_biased,
)
from levyshrink.subordinators import (
    compound_poisson_process,
    drift_process,
    gamma_process,
    stable_process,
)

# frozen before the evaluators were written, by direct nested quadrature of
# beta against exp(-|beta|)/2 times the N(y - beta, 1) likelihood at y = 0.5
LASSO_ORACLE_AT_HALF = 0.241018550965014


def normal_problem(nu=1.0, sigma=1.0):
    return NormalMeansProblem(Penalty(drift_process(), "half_square", nu), sigma)


def lasso_problem(nu=1.0, sigma=1.0):
    return NormalMeansProblem(Penalty(stable_process(0.5), "half_square", nu), sigma)


def gamma_problem(nu=2.0, sigma=1.0):
    return NormalMeansProblem(Penalty(gamma_process(), "half_square", nu), sigma)


def laplace_normal_marginal(y, nu=1.0, s=1.0):
    # closed-form double-exponential (x) normal convolution
    a = math.exp(-nu * y + 0.5 * nu * nu * s * s) * norm.cdf(y / s - nu * s)
    b = math.exp(nu * y + 0.5 * nu * nu * s * s) * norm.cdf(-y / s - nu * s)
    return 0.5 * nu * (a + b)


class TestMarginalDensity:
    def test_conjugate_normal(self):
        prob = normal_problem()  # prior variance 1/nu = 1
        assert marginal_density(prob, 0.0) == pytest.approx(1.0 / math.sqrt(4.0 * math.pi),
                                                            abs=1e-12)

    def test_even_in_y(self):
        prob = gamma_problem()
        for y in (0.5, 1.5, 4.0):
            assert marginal_density(prob, y) == pytest.approx(marginal_density(prob, -y),
                                                              abs=1e-10)

    def test_lasso_matches_closed_form(self):
        prob = lasso_problem()
        for y in np.linspace(-6, 6, 25):
            assert abs(marginal_density(prob, y) - laplace_normal_marginal(y)) < 1e-8

    def test_size_biased_marginal_positive_even(self):
        prob = lasso_problem()
        for y in (0.0, 1.0, 3.0):
            m = marginal_density(prob, y, size_biased=True)
            assert m > 0
            assert m == pytest.approx(marginal_density(prob, -y, size_biased=True), rel=1e-9)


class TestEvaluators:
    def test_score_form_conjugate(self):
        assert posterior_mean_score(normal_problem(), 2.0) == pytest.approx(1.0, abs=1e-8)

    def test_size_biased_conjugate(self):
        assert posterior_mean_size_biased(normal_problem(), 2.0) == pytest.approx(1.0, abs=1e-8)

    def test_quadrature_conjugate(self):
        assert posterior_mean_quadrature(normal_problem(), 3.0) == pytest.approx(1.5, abs=1e-9)

    def test_odd_at_zero(self):
        for prob in (normal_problem(), lasso_problem(), gamma_problem()):
            assert abs(posterior_mean_score(prob, 0.0)) < 1e-9
            assert abs(posterior_mean_size_biased(prob, 0.0)) < 1e-9
            assert abs(posterior_mean_quadrature(prob, 0.0)) < 1e-9

    def test_frozen_lasso_value(self):
        assert posterior_mean_quadrature(lasso_problem(), 0.5) == pytest.approx(
            LASSO_ORACLE_AT_HALF, abs=1e-9)

    @pytest.mark.parametrize("y", [0.5, 2.0, 5.0])
    def test_lasso_size_biased_matches_oracle(self, y):
        prob = lasso_problem()
        want = posterior_mean_quadrature(prob, y)
        assert abs(posterior_mean_size_biased(prob, y) - want) <= 1e-6 * (1 + abs(y))

    def test_gamma_cross_formula_agreement(self):
        prob = gamma_problem()
        for y in (-4.0, -1.0, 0.7, 3.0, 8.0):
            a = posterior_mean_score(prob, y)
            b = posterior_mean_size_biased(prob, y)
            assert abs(a - b) <= 1e-6 * (1 + abs(y))

    def test_oddness(self):
        prob = lasso_problem(nu=1.5)
        for y in (0.5, 2.0, 7.0):
            assert posterior_mean_score(prob, -y) == pytest.approx(
                -posterior_mean_score(prob, y), abs=1e-8)

    def test_shrinkage_direction(self):
        for prob in (normal_problem(), lasso_problem(), gamma_problem()):
            for y in (0.25, 1.0, 3.0, 9.0):
                ratio = posterior_mean_quadrature(prob, y) / y
                assert -1e-9 <= ratio <= 1.0 + 1e-9


class TestConstruction:
    def test_requires_half_square(self):
        with pytest.raises(ValueError):
            NormalMeansProblem(Penalty(stable_process(0.5), "abs", 1.0), 1.0)

    def test_rejects_infinite_inverse_moment(self):
        with pytest.raises(ValueError):
            NormalMeansProblem(Penalty(gamma_process(), "half_square", 0.9), 1.0)
        with pytest.raises(ValueError):
            NormalMeansProblem(Penalty(compound_poisson_process(1.0, 1.0), "half_square", 1.0), 1.0)

    def test_inverse_moment_closed_forms(self):
        # lasso: E[1/T] = 1/nu^2; normal prior: 1/nu
        assert lasso_problem(nu=2.0).inverse_moment() == pytest.approx(0.25, rel=1e-10)
        assert normal_problem(nu=4.0).inverse_moment() == pytest.approx(0.25, rel=1e-10)


class TestInvertedBeta:
    def test_density_normalizes(self):
        from scipy.integrate import quad
        val, _ = quad(lambda x: inverted_beta_density(x), 0, np.inf, limit=300)
        assert val == pytest.approx(1.0, abs=1e-8)

    def test_marginal_even(self):
        for y in (0.5, 2.0):
            assert inverted_beta_marginal(y, 1.0) == pytest.approx(
                inverted_beta_marginal(-y, 1.0), rel=1e-10)

    def test_redescending_gap(self):
        gaps = [y - inverted_beta_posterior_mean(y, 1.0) for y in (5.0, 10.0, 20.0)]
        assert gaps[0] > gaps[1] > gaps[2] > 0

    def test_bounded_influence_versus_lasso(self):
        nu, sigma, y = 3.0, 1.0, 20.0
        lasso_gap = y - posterior_mean_quadrature(lasso_problem(nu=nu), y)
        ib_gap = y - inverted_beta_posterior_mean(y, sigma)
        assert lasso_gap == pytest.approx(sigma ** 2 * nu, rel=1e-3)
        assert ib_gap < 0.05 * sigma ** 2 * nu
