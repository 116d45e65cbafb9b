"""Replication-style benchmark harnesses used by the CLI and the
acceptance suite: the spiked-probit estimator comparison and the
train/test holdout comparison of SVD-shrinkage methods."""

from __future__ import annotations

import numpy as np

from .data import (
    apply_standardization,
    cv_tune,
    fit_standardization,
    gen_factor_model,
    make_split,
    ridge_grid,
    sse,
)
from .ortho import GibbsConfig, fb_beta_estimate, gibbs_fit, kappa_weights, reconstruct_beta, svd_orthogonalize
from .probit import (
    RSpikeSpec,
    candes_tao_nu,
    probit_gibbs_hs,
    probit_lasso,
    probit_lasso_cv,
    probit_mle,
    simulate_rspike,
)

__all__ = ["probit_rspike_benchmark", "holdout_benchmark", "factor_pn_dataset"]

PROBIT_METHODS = ("mle", "lasso_ct", "lasso_cv", "hs")
HOLDOUT_METHODS = ("bayes", "pls", "pcr", "rr", "gprior")


def probit_rspike_benchmark(
    reps: int = 20,
    seed: int = 42,
    spec: RSpikeSpec | None = None,
    gibbs: GibbsConfig | None = None,
    methods=PROBIT_METHODS,
) -> dict:
    """Squared-error losses of probit estimators over simulated replicates.

    Returns {method: array of SSE values}, one entry per replicate.  The
    replicate seeds are spawned deterministically from ``seed``.
    """
    spec = spec or RSpikeSpec()
    results = {m: [] for m in methods}
    for rep in range(reps):
        rep_seed = seed * 100_003 + rep
        prob, beta_true = simulate_rspike(spec, rep_seed)
        loss = lambda b: sse(b, beta_true)
        if "mle" in methods:
            results["mle"].append(loss(probit_mle(prob)))
        if "lasso_ct" in methods:
            results["lasso_ct"].append(loss(probit_lasso(prob, candes_tao_nu(spec.p))))
        if "lasso_cv" in methods:
            beta, _ = probit_lasso_cv(prob, seed=rep_seed + 1)
            results["lasso_cv"].append(loss(beta))
        if "hs" in methods:
            cfg = gibbs or GibbsConfig()
            cfg = GibbsConfig(iterations=cfg.iterations, burn_in=cfg.burn_in,
                              thin=cfg.thin, seed=rep_seed + 2)
            results["hs"].append(loss(probit_gibbs_hs(prob, cfg)))
    return {m: np.array(v) for m, v in results.items()}


def factor_pn_dataset(seed, n: int = 50, p: int = 100, k: int = 6, psi: float = 1.0):
    """The p > n synthetic benchmark dataset: factor-structured predictors
    with the response driven by the lowest-variance factors."""
    return gen_factor_model(n, p, k, psi, seed=seed, response="factors")


def holdout_benchmark(
    x,
    y,
    n_splits: int = 50,
    seed: int = 42,
    methods=HOLDOUT_METHODS,
    fraction: float = 0.75,
    n_folds: int = 10,
    gibbs: GibbsConfig | None = None,
    max_components: int | None = None,
) -> dict:
    """Out-of-sample SSE over repeated train/test splits.

    Per split: standardize with training statistics only, tune each
    non-Bayes method by K-fold CV on the training part, fit, and score
    sum of squared prediction errors on the held-out part.  Returns
    {method: array of SSE, one per split}.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    results = {m: [] for m in methods}
    for split_id in range(n_splits):
        plan = make_split(n, fraction=fraction, n_folds=n_folds, seed=seed + split_id)
        std = fit_standardization(x[plan.train], y[plan.train])
        xs, ys = apply_standardization(std, x[plan.train], y[plan.train])
        xt = apply_standardization(std, x[plan.test])
        y_test = y[plan.test]
        model = svd_orthogonalize(xs, ys)
        comp_cap = model.rank if max_components is None else min(max_components, model.rank)
        comp_grid = list(range(1, comp_cap + 1))

        def score(beta):
            return sse(xt @ beta + std.y_mean, y_test)

        for method in methods:
            if method == "bayes":
                cfg = gibbs or GibbsConfig()
                cfg = GibbsConfig(iterations=cfg.iterations, burn_in=cfg.burn_in,
                                  thin=cfg.thin, seed=seed * 977 + split_id)
                beta = fb_beta_estimate(model, gibbs_fit(model, cfg))
            elif method == "rr":
                nu = cv_tune(xs, ys, "rr", ridge_grid(xs), plan.folds)
                beta = reconstruct_beta(model, kappa_weights(model, "rr", nu=nu))
            elif method in ("pcr", "pls"):
                k = cv_tune(xs, ys, method, comp_grid, plan.folds)
                beta = reconstruct_beta(
                    model, kappa_weights(model, method, n_components=min(int(k), model.rank))
                )
            elif method == "gprior":
                from .data import gprior_grid

                g = cv_tune(xs, ys, "gprior", gprior_grid(), plan.folds)
                beta = reconstruct_beta(model, kappa_weights(model, "gprior", g=g))
            else:
                raise ValueError(f"unknown holdout method {method!r}")
            results[method].append(score(beta))
    return {m: np.array(v) for m, v in results.items()}
