import numpy as np
import pytest
from scipy import linalg

from levyshrink.em import (
    ConvergenceError,
    EmTrace,
    LinearProblem,
    default_init,
    em_lla,
    em_ridge_mixture,
    penalized_objective,
    weighted_lasso_cd,
)
from levyshrink.penalties import WEIGHT_FLOOR, Penalty, conditional_moment
from levyshrink.subordinators import drift_process, gamma_process, stable_process

RIDGE = Penalty(drift_process(), "half_square", 2.5)
PLAIN_LASSO = Penalty(drift_process(), "abs", 1.0)
NORMAL_GAMMA = Penalty(gamma_process(), "half_square", 4.0)
LOG_ABS = Penalty(gamma_process(), "abs", 3.0)


def ista_reference(x, y, weights, iters=20_000):
    """Independent slow solver: proximal gradient with fixed step."""
    step = 1.0 / np.linalg.norm(x, 2) ** 2
    beta = np.zeros(x.shape[1])
    for _ in range(iters):
        grad = x.T @ (x @ beta - y)
        raw = beta - step * grad
        beta = np.sign(raw) * np.maximum(np.abs(raw) - step * weights, 0.0)
    return beta


def lasso_objective(x, y, weights, beta):
    return 0.5 * np.sum((y - x @ beta) ** 2) + np.sum(weights * np.abs(beta))


class TestWeightedLassoCD:
    def test_zero_weights_give_ols(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(40, 12))
        y = rng.normal(size=40)
        beta = weighted_lasso_cd(LinearProblem(x, y), np.zeros(12))
        ols = np.linalg.lstsq(x, y, rcond=None)[0]
        assert np.abs(beta - ols).max() < 1e-8

    def test_orthonormal_soft_threshold(self):
        rng = np.random.default_rng(1)
        q, _ = np.linalg.qr(rng.normal(size=(30, 6)))
        y = rng.normal(size=30)
        w = 0.4
        beta = weighted_lasso_cd(LinearProblem(q, y), np.full(6, w))
        proj = q.T @ y
        want = np.sign(proj) * np.maximum(np.abs(proj) - w, 0.0)
        assert np.abs(beta - want).max() < 1e-10

    def test_matches_independent_slow_solver(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(40, 12))
        y = x @ np.concatenate([rng.normal(0, 2, 4), np.zeros(8)]) + rng.normal(size=40)
        w = np.full(12, 3.0)
        ours = weighted_lasso_cd(LinearProblem(x, y), w)
        ref = ista_reference(x, y, w)
        assert abs(lasso_objective(x, y, w, ours) - lasso_objective(x, y, w, ref)) < 1e-6

    def test_kkt_at_solution(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(50, 10))
        y = rng.normal(size=50)
        w = np.full(10, 2.0)
        beta = weighted_lasso_cd(LinearProblem(x, y), w, tol=1e-8)
        grad = x.T @ (y - x @ beta)
        active = beta != 0
        assert np.abs(grad[active] - w[active] * np.sign(beta[active])).max() <= 1e-8
        assert (np.abs(grad[~active]) <= w[~active] + 1e-8).all()

    def test_nonconvergence_carries_kkt(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(50, 10))
        y = rng.normal(size=50)
        with pytest.raises(ConvergenceError) as err:
            weighted_lasso_cd(LinearProblem(x, y), np.full(10, 0.5), tol=1e-16, max_iter=1)
        assert err.value.kkt_residual is not None

    def test_negative_weights_rejected(self):
        with pytest.raises(ValueError):
            weighted_lasso_cd(LinearProblem(np.eye(3), np.ones(3)), np.array([1.0, -1.0, 1.0]))


class TestRidgeMixtureEM:
    def test_constant_weights_reach_closed_form_in_one_step(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(20, 5))
        y = rng.normal(size=20)
        prob = LinearProblem(x, y, noise_sd=1.3)
        trace = em_ridge_mixture(prob, RIDGE)
        closed = linalg.solve(x.T @ x + prob.noise_sd ** 2 * RIDGE.nu * np.eye(5), x.T @ y)
        assert np.abs(trace.beta - closed).max() < 1e-10
        assert trace.iterations <= 2

    def test_zero_response_fixed_point(self):
        rng = np.random.default_rng(6)
        x = rng.normal(size=(15, 4))
        prob = LinearProblem(x, np.zeros(15))
        for pen in (RIDGE, NORMAL_GAMMA):
            trace = em_ridge_mixture(prob, pen, init=rng.normal(size=4))
            assert np.abs(trace.beta).max() < 1e-10

    def test_normal_gamma_multistart_and_stationarity(self):
        rng = np.random.default_rng(7)
        q, _ = np.linalg.qr(rng.normal(size=(50, 10)))
        x = q * rng.uniform(1.0, 3.0, size=10)
        y = x @ np.concatenate([rng.normal(0, 2, 3), np.zeros(7)]) + rng.normal(size=50)
        prob = LinearProblem(x, y)
        trace = em_ridge_mixture(prob, NORMAL_GAMMA)
        # stationarity: solves the reweighted ridge system at its own weights
        t = conditional_moment(NORMAL_GAMMA, trace.beta, floor=WEIGHT_FLOOR)
        fixed = linalg.solve(x.T @ x + np.diag(t), x.T @ y)
        assert np.abs(fixed - trace.beta).max() < 1e-8
        best = min(
            em_ridge_mixture(prob, NORMAL_GAMMA, init=rng.normal(0, 3, size=10)).objectives[-1]
            for _ in range(100)
        )
        assert trace.objectives[-1] <= best + 1e-8

    def test_monotone_objectives(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=(30, 8))
        y = rng.normal(size=30)
        prob = LinearProblem(x, y)
        for pen in (RIDGE, NORMAL_GAMMA, Penalty(stable_process(0.5), "half_square", 1.0)):
            trace = em_ridge_mixture(prob, pen, init=np.zeros(8))
            assert (np.diff(trace.objectives) <= 1e-12).all()

    def test_ridge_linear_in_response_and_scale_covariant(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=(30, 6))
        y = rng.normal(size=30)
        c = 3.7
        base = em_ridge_mixture(LinearProblem(x, y, 1.1), RIDGE).beta
        scaled_y = em_ridge_mixture(LinearProblem(x, c * y, 1.1), RIDGE).beta
        assert np.abs(scaled_y - c * base).max() < 1e-9
        # joint (y, sigma) scaling is covariant once nu rescales by 1/c^2
        rescaled = Penalty(drift_process(), "half_square", RIDGE.nu / c ** 2)
        joint = em_ridge_mixture(LinearProblem(x, c * y, c * 1.1), rescaled).beta
        assert np.abs(joint - c * base).max() < 1e-9

    def test_transform_guard(self):
        with pytest.raises(ValueError):
            em_ridge_mixture(LinearProblem(np.eye(3), np.ones(3)), PLAIN_LASSO)


class TestLLA:
    def test_plain_lasso_soft_threshold(self):
        y = np.array([3.0, -0.4, 1.5, 0.0])
        trace = em_lla(LinearProblem(np.eye(4), y, 1.0), PLAIN_LASSO)
        assert np.allclose(trace.beta, [2.0, 0.0, 0.5, 0.0], atol=1e-10)
        assert trace.iterations <= 2

    def test_log_penalty_reweighting_kkt(self):
        rng = np.random.default_rng(10)
        x = rng.normal(size=(30, 8))
        y = x @ np.array([2.0, -1.5, 0, 0, 1.0, 0, 0, 0]) + rng.normal(0, 0.5, 30)
        prob = LinearProblem(x, y)
        trace = em_lla(prob, LOG_ABS, tol=1e-10)
        beta = trace.beta
        w = conditional_moment(LOG_ABS, beta, floor=WEIGHT_FLOOR)
        assert np.allclose(w, LOG_ABS.nu / (1.0 + np.abs(np.where(beta == 0, WEIGHT_FLOOR, beta))))
        grad = x.T @ (y - x @ beta)
        nz = beta != 0
        assert np.abs(grad[nz] - w[nz] * np.sign(beta[nz])).max() < 1e-8
        assert (np.diff(trace.objectives) <= 1e-12).all()

    def test_exact_zeros_preserved(self):
        rng = np.random.default_rng(11)
        x = rng.normal(size=(40, 10))
        y = x @ np.concatenate([np.array([3.0, -2.0]), np.zeros(8)]) + rng.normal(0, 0.3, 40)
        trace = em_lla(LinearProblem(x, y), Penalty(drift_process(), "abs", 8.0))
        assert np.all((trace.beta == 0.0) | (np.abs(trace.beta) > 1e-10))
        assert (trace.beta == 0.0).sum() >= 6

    def test_init_insensitive_on_well_conditioned_problem(self):
        rng = np.random.default_rng(12)
        x = rng.normal(size=(30, 8))
        y = x @ np.array([2.0, -1.5, 0, 0, 1.0, 0, 0, 0]) + rng.normal(0, 0.5, 30)
        prob = LinearProblem(x, y)
        from_ols = em_lla(prob, LOG_ABS, init=default_init(prob)).objectives[-1]
        from_zero = em_lla(prob, LOG_ABS, init=np.zeros(8)).objectives[-1]
        assert abs(from_ols - from_zero) < 1e-6

    def test_transform_guard(self):
        with pytest.raises(ValueError):
            em_lla(LinearProblem(np.eye(3), np.ones(3)), RIDGE)


class TestTraceAndProblem:
    def test_objective_definition(self):
        x = np.eye(2)
        y = np.array([1.0, 2.0])
        prob = LinearProblem(x, y, noise_sd=2.0)
        beta = np.array([1.0, 0.0])
        want = 0.5 * 4.0 / 4.0 + PLAIN_LASSO.nu * 1.0
        assert penalized_objective(prob, PLAIN_LASSO, beta) == pytest.approx(want)

    def test_problem_validation(self):
        with pytest.raises(ValueError):
            LinearProblem(np.eye(3), np.ones(4))
        with pytest.raises(ValueError):
            LinearProblem(np.array([[1.0, np.nan]]), np.ones(1))

    def test_trace_records_all_iterates(self):
        rng = np.random.default_rng(13)
        x = rng.normal(size=(20, 4))
        y = rng.normal(size=20)
        trace = em_ridge_mixture(LinearProblem(x, y), NORMAL_GAMMA, init=np.zeros(4))
        assert isinstance(trace, EmTrace)
        assert len(trace.iterates) == len(trace.objectives) == trace.iterations + 1
        assert trace.converged
