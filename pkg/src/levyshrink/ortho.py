"""SVD-orthogonalized shrinkage regression.

Writing the design as X = U D W' turns regression into an r-dimensional
normal-means problem for alpha = W' beta with per-component noise
sigma^2 / d_j^2.  Ridge, principal components, partial least squares, and
g-prior fits all reduce to component-wise shrinkage weights kappa_j applied
to alpha_hat; the fully Bayes variant learns the weights through a
global-local scale mixture sampled by a Gibbs chain with conjugate
inverse-gamma sweeps.  Everything here works identically for p > n, where
the rank r < p and W acts as the pullback to the original coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SvdModel",
    "ShrinkageProfile",
    "GibbsConfig",
    "ChainSummary",
    "svd_orthogonalize",
    "kappa_weights",
    "reconstruct_beta",
    "gibbs_fit",
    "fb_beta_estimate",
]

RANK_TOL = 1e-10  # singular values below RANK_TOL * d_1 are truncated
PLS_COND_LIMIT = 1e12


@dataclass
class SvdModel:
    """Thin, rank-truncated SVD of a regression problem."""

    left: np.ndarray      # U, n x r
    singular: np.ndarray  # d, descending, all positive
    right: np.ndarray     # W, p x r
    alpha_hat: np.ndarray  # D^{-1} U' y

    @property
    def rank(self) -> int:
        return self.singular.size

    @property
    def n_features(self) -> int:
        return self.right.shape[0]


def svd_orthogonalize(x, y, rank_tol: float = RANK_TOL) -> SvdModel:
    """Thin SVD with rank truncation and the orthogonalized OLS estimate."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2 or x.shape[1] < 1:
        raise ValueError("design must be an n x p array with n >= 2, p >= 1")
    if y.shape != (x.shape[0],):
        raise ValueError("response length must match the design")
    u, d, wt = np.linalg.svd(x, full_matrices=False)
    if d.size == 0 or d[0] <= 0.0:
        raise ValueError("design matrix is identically zero")
    keep = d > rank_tol * d[0]
    u, d, w = u[:, keep], d[keep], wt[keep].T
    alpha_hat = (u.T @ y) / d
    return SvdModel(left=u, singular=d, right=w, alpha_hat=alpha_hat)


@dataclass
class ShrinkageProfile:
    """Per-component multipliers applied to alpha_hat along the right
    singular directions.  PLS weights may exceed one; the others lie in
    [0, 1]."""

    method: str
    kappa: np.ndarray
    ill_conditioned: bool = False


def kappa_weights(
    model: SvdModel,
    method: str,
    nu: float | None = None,
    n_components: int | None = None,
    g: float | None = None,
) -> ShrinkageProfile:
    """Exact shrinkage weights for "rr", "pcr", "gprior", or "pls".

    rr: d_j^2 / (nu + d_j^2).  pcr: indicator of the leading
    ``n_components`` directions.  gprior: the constant g / (1 + g).
    pls: kappa_j = sum_k theta_k d_j^{2k} where theta solves the moment
    system eta = M theta built from alpha_hat and the singular values;
    a system with condition number above 1e12 falls back to the
    minimum-norm pseudo-inverse and flags the profile.
    """
    d2 = model.singular ** 2
    r = model.rank
    if method == "rr":
        if nu is None or not nu > 0:
            raise ValueError("ridge weights need nu > 0")
        return ShrinkageProfile("rr", d2 / (nu + d2))
    if method == "pcr":
        k = _check_components(n_components, r)
        kappa = (np.arange(r) < k).astype(float)
        return ShrinkageProfile("pcr", kappa)
    if method == "gprior":
        if g is None or not g > 0:
            raise ValueError("g-prior weights need g > 0")
        return ShrinkageProfile("gprior", np.full(r, g / (1.0 + g)))
    if method == "pls":
        k = _check_components(n_components, r)
        return _pls_weights(model, k)
    raise ValueError(f"unknown shrinkage method {method!r}")


def _check_components(k, r):
    if k is None or not 1 <= k <= r:
        raise ValueError(f"n_components must lie in 1..{r}")
    return int(k)


def _pls_weights(model: SvdModel, k: int) -> ShrinkageProfile:
    # The moment system eta = M theta is the normal-equation form of a
    # weighted polynomial fit: minimize sum_j d_j^2 alpha_hat_j^2
    # (1 - kappa(s_j))^2 over polynomials kappa with zero constant term
    # and degree <= k in s_j = d_j^2.  Solving the fit directly in a
    # Chebyshev basis avoids squaring the Vandermonde conditioning; a
    # rank-deficient fit falls back to the minimum-norm solution and is
    # flagged.
    s = (model.singular / model.singular[0]) ** 2
    weights = model.singular * np.abs(model.alpha_hat)  # sqrt of d^2 alpha^2
    basis = s[:, None] * np.polynomial.chebyshev.chebvander(2.0 * s - 1.0, k - 1)
    design = weights[:, None] * basis
    coef, _, rank, sv = np.linalg.lstsq(design, weights, rcond=None)
    cond = sv[0] / sv[-1] if sv[-1] > 0 else np.inf
    ill = rank < k or cond > PLS_COND_LIMIT
    kappa = basis @ coef
    return ShrinkageProfile("pls", kappa, ill_conditioned=ill)


def reconstruct_beta(model: SvdModel, profile: ShrinkageProfile) -> np.ndarray:
    """beta = sum_j kappa_j alpha_hat_j w_j; kappa = 1 recovers OLS
    (the minimum-norm solution when p > n)."""
    if profile.kappa.shape != (model.rank,):
        raise ValueError("profile length does not match model rank")
    return model.right @ (profile.kappa * model.alpha_hat)


# ----------------------------------------------------------------------
# Fully Bayes shrinkage: global-local Gibbs sampler
# ----------------------------------------------------------------------


@dataclass
class GibbsConfig:
    """Chain settings and priors.

    Default priors put half-Cauchy scales on the local and global
    standard deviations (inverted-beta(1/2, 1/2) on tau^2 and each
    lambda_j^2, realized through conjugate inverse-gamma auxiliaries) and
    the Jeffreys 1/sigma^2 prior on the noise variance.  ``fix_tau2``,
    ``fix_lambda2``, ``fix_sigma2`` freeze the corresponding blocks,
    which recovers ridge / g-prior style degenerate cases.
    """

    iterations: int = 10_000
    burn_in: int = 2_000
    thin: int = 1
    seed: int = 0
    ci_level: float = 0.75
    keep_draws: bool = False
    fix_tau2: float | None = None
    fix_lambda2: np.ndarray | float | None = None
    fix_sigma2: float | None = None

    def __post_init__(self):
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError("burn-in must be smaller than the iteration count")
        if self.thin < 1:
            raise ValueError("thinning must be at least 1")
        if not 0.0 < self.ci_level < 1.0:
            raise ValueError("interval level must lie in (0, 1)")


@dataclass
class ChainSummary:
    """Posterior summaries of one chain."""

    kappa_mean: np.ndarray
    kappa_lower: np.ndarray
    kappa_upper: np.ndarray
    alpha_mean: np.ndarray
    sigma2_mean: float
    tau2_mean: float
    n_draws: int
    ci_level: float
    draws: dict | None = None


def _inv_gamma(rng, shape, scale):
    return scale / rng.gamma(shape, 1.0, size=np.shape(scale) or None)


def gibbs_fit(model: SvdModel, config: GibbsConfig) -> ChainSummary:
    """Gibbs chain over (alpha, lambda^2, tau^2, sigma^2).

    Full conditionals: alpha_j is normal with mean kappa_j alpha_hat_j and
    variance sigma^2 kappa_j / d_j^2 where kappa_j = tau^2 lambda_j^2
    d_j^2 / (1 + tau^2 lambda_j^2 d_j^2); the scale blocks are
    inverse-gamma through the half-Cauchy auxiliary decomposition;
    sigma^2 is inverse-gamma with shape r.  Deterministic given the seed.
    """
    r = model.rank
    if r == 0:
        raise ValueError("model has rank zero")
    rng = np.random.default_rng(config.seed)
    d2 = model.singular ** 2
    ahat = model.alpha_hat

    lam2 = np.ones(r) if config.fix_lambda2 is None \
        else np.broadcast_to(np.asarray(config.fix_lambda2, dtype=float), (r,)).copy()
    tau2 = 1.0 if config.fix_tau2 is None else float(config.fix_tau2)
    sigma2 = 1.0 if config.fix_sigma2 is None else float(config.fix_sigma2)
    xi = np.ones(r)
    zeta = 1.0

    kept = (config.iterations - config.burn_in + config.thin - 1) // config.thin
    kappa_draws = np.empty((kept, r))
    alpha_sum = np.zeros(r)
    sigma2_sum = 0.0
    tau2_sum = 0.0
    alpha_draws = np.empty((kept, r)) if config.keep_draws else None
    idx = 0

    for it in range(config.iterations):
        scale = tau2 * lam2 * d2
        kappa = scale / (1.0 + scale)
        alpha = kappa * ahat + np.sqrt(sigma2 * kappa / d2) * rng.standard_normal(r)

        if config.fix_lambda2 is None:
            lam2 = _inv_gamma(rng, 1.0, 1.0 / xi + alpha ** 2 / (2.0 * sigma2 * tau2))
            xi = _inv_gamma(rng, 1.0, 1.0 + 1.0 / lam2)
        if config.fix_tau2 is None:
            rate = 1.0 / zeta + np.sum(alpha ** 2 / lam2) / (2.0 * sigma2)
            tau2 = float(_inv_gamma(rng, 0.5 * (r + 1.0), rate))
            zeta = float(_inv_gamma(rng, 1.0, 1.0 + 1.0 / tau2))
        if config.fix_sigma2 is None:
            rss = np.sum(d2 * (ahat - alpha) ** 2)
            prior_ss = np.sum(alpha ** 2 / (tau2 * lam2))
            sigma2 = float(_inv_gamma(rng, float(r), 0.5 * (rss + prior_ss)))

        if it >= config.burn_in and (it - config.burn_in) % config.thin == 0:
            kappa_draws[idx] = kappa
            alpha_sum += alpha
            sigma2_sum += sigma2
            tau2_sum += tau2
            if alpha_draws is not None:
                alpha_draws[idx] = alpha
            idx += 1

    if not (np.isfinite(kappa_draws).all() and np.isfinite(alpha_sum).all()):
        raise ArithmeticError("chain produced non-finite draws")

    lo, hi = 0.5 - config.ci_level / 2.0, 0.5 + config.ci_level / 2.0
    draws = None
    if config.keep_draws:
        draws = {"kappa": kappa_draws, "alpha": alpha_draws}
    return ChainSummary(
        kappa_mean=kappa_draws.mean(axis=0),
        kappa_lower=np.quantile(kappa_draws, lo, axis=0),
        kappa_upper=np.quantile(kappa_draws, hi, axis=0),
        alpha_mean=alpha_sum / idx,
        sigma2_mean=sigma2_sum / idx,
        tau2_mean=tau2_sum / idx,
        n_draws=idx,
        ci_level=config.ci_level,
        draws=draws,
    )


def fb_beta_estimate(model: SvdModel, summary: ChainSummary) -> np.ndarray:
    """Pull the posterior-mean alpha back through W (the canonical
    pseudo-inverse direction when p > n)."""
    return model.right @ summary.alpha_mean
