import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import gamma as gamma_dist

from levyshrink.penalties import (
    MixturePenalty,
    NonIntegrableError,
    Penalty,
    PoleError,
    conditional_moment,
    log_normalizer,
    mixture_penalty,
    penalty_gradient,
    penalty_is_integrable,
    penalty_value,
    prior_log_density,
)
from levyshrink.subordinators import (
    compound_poisson_process,
    drift_process,
    gamma_process,
    inverse_gaussian_process,
    stable_process,
)


def lasso(nu):
    return Penalty(stable_process(0.5), "half_square", nu)


def normal_gamma(nu):
    return Penalty(gamma_process(), "half_square", nu)


def inverse_gaussian_mixing_density(nu, t):
    # precision-scale mixing density whose Laplace transform is exp(-nu |beta|)
    return nu / math.sqrt(2.0 * math.pi * t ** 3) * math.exp(-nu * nu / (2.0 * t))


class TestPenaltyValue:
    def test_lasso_exact(self):
        assert penalty_value(lasso(2.0), 3.0) == pytest.approx(6.0, abs=1e-12)

    def test_zero_at_zero(self):
        assert penalty_value(normal_gamma(1.0), 0.0) == 0.0

    def test_normal_gamma_closed_form(self):
        assert penalty_value(normal_gamma(1.0), 2.0) == pytest.approx(math.log(3.0), abs=1e-12)

    def test_normal_gamma_matches_laplace_transform_quadrature(self):
        # -log of the gamma-mixed Laplace transform, grid check
        nu = 1.5
        pen = normal_gamma(nu)
        for b in np.linspace(-3, 3, 13):
            mix, _ = quad(lambda t: math.exp(-t * b * b / 2.0) * gamma_dist.pdf(t, nu),
                          0, np.inf, limit=200)
            assert -math.log(mix) == pytest.approx(penalty_value(pen, b), abs=1e-9)

    def test_even_zero_monotone(self):
        grid = np.linspace(0.0, 6.0, 61)
        for pen in (lasso(1.3), normal_gamma(2.0),
                    Penalty(inverse_gaussian_process(1.0), "half_square", 1.0),
                    Penalty(compound_poisson_process(1.0, 1.0), "half_square", 1.0),
                    Penalty(gamma_process(), "abs", 2.0)):
            up = penalty_value(pen, grid)
            down = penalty_value(pen, -grid)
            assert np.allclose(up, down, atol=1e-14)
            assert (np.diff(up) >= -1e-14).all()
            assert up[0] == 0.0

    def test_gradient_matches_finite_differences(self):
        h = 1e-6
        for pen in (lasso(1.3), normal_gamma(2.0), Penalty(gamma_process(), "abs", 1.5)):
            for b in (-2.0, -0.3, 0.4, 1.7):
                fd = (penalty_value(pen, b + h) - penalty_value(pen, b - h)) / (2 * h)
                assert penalty_gradient(pen, b) == pytest.approx(fd, abs=1e-5)


class TestConditionalMoment:
    def test_lasso_inverse_length(self):
        assert conditional_moment(lasso(1.0), 2.0) == pytest.approx(0.5, abs=1e-12)

    def test_normal_gamma_at_zero(self):
        assert conditional_moment(normal_gamma(2.0), 0.0) == pytest.approx(2.0, abs=1e-12)

    def test_ridge_constant(self):
        pen = Penalty(drift_process(), "half_square", 3.0)
        assert np.allclose(conditional_moment(pen, np.array([0.0, 1.0, 5.0])), 3.0)

    def test_pole_raises_without_floor(self):
        with pytest.raises(PoleError):
            conditional_moment(lasso(1.0), 0.0)

    def test_floor_keeps_weight_finite(self):
        w = conditional_moment(lasso(1.0), 0.0, floor=1e-8)
        assert np.isfinite(w) and w == pytest.approx(1e8, rel=1e-10)

    @pytest.mark.parametrize("beta", [0.1, -0.1, 1.0, -1.0, 10.0, -10.0])
    def test_lasso_matches_quadrature_oracle(self, beta):
        nu = 1.0
        num, _ = quad(lambda t: t * math.exp(-t * beta ** 2 / 2.0)
                      * inverse_gaussian_mixing_density(nu, t), 0, np.inf, limit=300)
        den, _ = quad(lambda t: math.exp(-t * beta ** 2 / 2.0)
                      * inverse_gaussian_mixing_density(nu, t), 0, np.inf, limit=300)
        want = num / den
        assert abs(conditional_moment(lasso(nu), beta) - want) <= 1e-6 * want

    @pytest.mark.parametrize("beta", [0.1, -0.1, 1.0, -1.0, 10.0, -10.0])
    def test_gamma_matches_quadrature_oracle(self, beta):
        nu = 2.0
        num, _ = quad(lambda t: t * math.exp(-t * beta ** 2 / 2.0) * gamma_dist.pdf(t, nu),
                      0, np.inf, limit=300)
        den, _ = quad(lambda t: math.exp(-t * beta ** 2 / 2.0) * gamma_dist.pdf(t, nu),
                      0, np.inf, limit=300)
        want = num / den
        assert abs(conditional_moment(normal_gamma(nu), beta) - want) <= 1e-6 * want

    def test_abs_transform_gamma_weights(self):
        pen = Penalty(gamma_process(), "abs", 1.5)
        assert conditional_moment(pen, 2.0) == pytest.approx(0.5, abs=1e-12)


class TestPriorDensity:
    def test_lasso_normalizer(self):
        assert prior_log_density(lasso(1.0), 0.0) == pytest.approx(-math.log(2.0), abs=1e-10)

    def test_symmetry(self):
        for pen in (lasso(2.0), normal_gamma(1.5)):
            for b in (0.3, 1.0, 4.0):
                assert prior_log_density(pen, b) == pytest.approx(prior_log_density(pen, -b),
                                                                  abs=1e-12)

    def test_integrates_to_one(self):
        for pen in (lasso(1.0), normal_gamma(0.75),
                    Penalty(inverse_gaussian_process(2.0), "half_square", 1.5)):
            val, _ = quad(lambda b: math.exp(prior_log_density(pen, b)), -np.inf, np.inf,
                          limit=400)
            assert val == pytest.approx(1.0, abs=1e-8)

    def test_non_integrable_raises(self):
        with pytest.raises(NonIntegrableError):
            log_normalizer(Penalty(compound_poisson_process(1.0, 1.0), "half_square", 1.0))
        with pytest.raises(NonIntegrableError):
            log_normalizer(normal_gamma(0.4))

    def test_integrability_rules(self):
        assert penalty_is_integrable(normal_gamma(0.6))
        assert not penalty_is_integrable(normal_gamma(0.5))
        assert not penalty_is_integrable(Penalty(gamma_process(), "abs", 1.0))
        assert penalty_is_integrable(Penalty(gamma_process(), "abs", 1.1))

    def test_laplace_transform_identity_on_grid(self):
        # exp(-penalty) equals the inverse-Gaussian precision mixture
        nu = 2.0
        pen = lasso(nu)
        for b in np.linspace(-4, 4, 41):
            mix, _ = quad(lambda t: math.exp(-t * b * b / 2.0)
                          * inverse_gaussian_mixing_density(nu, t), 0, np.inf, limit=300)
            assert abs(mix - math.exp(-penalty_value(pen, b))) < 1e-8


class TestMixturePenalty:
    def test_bridge_of_lasso(self):
        mix = MixturePenalty(stable_process(0.5, 1.0), lasso(1.0))
        assert mixture_penalty(mix, [1.0, 1.0]) == pytest.approx(math.sqrt(2.0), abs=1e-12)

    def test_zero_vector(self):
        mix = MixturePenalty(stable_process(0.5, 1.0), lasso(1.0))
        assert mixture_penalty(mix, np.zeros(5)) == 0.0

    def test_not_separable(self):
        mix = MixturePenalty(stable_process(0.5, 1.0), lasso(1.0))
        joint = mixture_penalty(mix, [1.0, 1.0])
        split = mixture_penalty(mix, [1.0, 0.0]) + mixture_penalty(mix, [0.0, 1.0])
        assert abs(joint - split) > 0.5

    def test_outer_time_must_be_one(self):
        with pytest.raises(ValueError):
            MixturePenalty(stable_process(0.5, 2.0), lasso(1.0))


class TestValidation:
    def test_bad_transform(self):
        with pytest.raises(ValueError):
            Penalty(gamma_process(), "square", 1.0)

    def test_bad_nu(self):
        with pytest.raises(ValueError):
            Penalty(gamma_process(), "abs", 0.0)
