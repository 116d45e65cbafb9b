"""Penalties and priors built from subordinator Laplace exponents.

A subordinator with Laplace exponent psi induces the penalty
nu * psi(f(beta)) for a transform f, and exp(-penalty) is a normal scale
mixture on the precision scale when f(beta) = beta^2 / 2.  The conditional
posterior mean of the mixing precision, nu * psi'(f(beta)), supplies the
EM reweighting used by the mode-finding solvers.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .subordinators import Subordinator

__all__ = [
    "Penalty",
    "MixturePenalty",
    "PoleError",
    "NonIntegrableError",
    "penalty_value",
    "penalty_gradient",
    "conditional_moment",
    "prior_log_density",
    "log_normalizer",
    "penalty_is_integrable",
    "has_finite_inverse_moment",
    "mixture_penalty",
]

TRANSFORMS = ("half_square", "abs")

WEIGHT_FLOOR = 1e-8  # |beta| clamp where psi' blows up at the origin


class PoleError(ValueError):
    """conditional moment requested at a pole of psi'."""


class NonIntegrableError(ValueError):
    """exp(-penalty) has infinite mass, so no proper prior exists."""


@dataclass(frozen=True)
class Penalty:
    """Penalty nu * psi(f(beta)) for a subordinator exponent psi.

    transform "half_square" uses f(beta) = beta^2 / 2 (precision-scale
    normal mixture), "abs" uses f(beta) = |beta| (double-exponential
    mixture).  For the stable family under half_square the exponent is
    scale-calibrated to (2t)^alpha so the induced prior is exactly the
    bridge prior exp(-nu |beta|^(2 alpha)); index 1/2 gives the plain
    lasso penalty nu |beta| with inverse-Gaussian precision mixing.
    """

    subordinator: Subordinator
    transform: str
    nu: float

    def __post_init__(self):
        if self.transform not in TRANSFORMS:
            raise ValueError(f"unknown transform {self.transform!r}")
        if not self.nu > 0:
            raise ValueError("nu must be positive")

    @property
    def _bridge_calibrated(self) -> bool:
        return self.subordinator.family == "stable" and self.transform == "half_square"

    def exponent(self, t):
        """Effective exponent psi_eff(t), before the nu scaling."""
        if self._bridge_calibrated:
            t = np.asarray(t, dtype=float)
            out = (2.0 * t) ** self.subordinator.index
            return out if out.ndim else float(out)
        return self.subordinator.laplace_exponent(t)

    def exponent_deriv(self, t):
        if self._bridge_calibrated:
            a = self.subordinator.index
            t = np.asarray(t, dtype=float)
            out = 2.0 * a * (2.0 * t) ** (a - 1.0)
            return out if out.ndim else float(out)
        return self.subordinator.laplace_exponent_deriv(t)

    @property
    def deriv_diverges_at_zero(self) -> bool:
        """psi_eff'(t) -> inf as t -> 0 (stable families with index < 1)."""
        return self.subordinator.family == "stable"

    def _f(self, beta):
        beta = np.asarray(beta, dtype=float)
        if self.transform == "half_square":
            return 0.5 * beta * beta
        return np.abs(beta)


@dataclass(frozen=True)
class MixturePenalty:
    """Non-separable penalty chi(sum_j psi(f(beta_j))).

    The outer subordinator (observed at time one) mixes over the inner
    penalty's global regularization level; with an inner lasso and an
    outer stable(alpha) exponent the result is (sum |beta_j|)^alpha.
    """

    outer: Subordinator
    inner: Penalty

    def __post_init__(self):
        if abs(self.outer.time - 1.0) > 1e-12:
            raise ValueError("outer subordinator must be observed at time 1")


def penalty_value(pen: Penalty, beta):
    """nu * psi_eff(f(beta)): zero at zero, even, nondecreasing in |beta|."""
    return pen.nu * pen.exponent(pen._f(beta))


def penalty_gradient(pen: Penalty, beta):
    """d/dbeta of the penalty, via the chain rule (beta != 0 for abs)."""
    beta = np.asarray(beta, dtype=float)
    inner = pen.nu * pen.exponent_deriv(pen._f(beta))
    if pen.transform == "half_square":
        out = inner * beta
    else:
        out = inner * np.sign(beta)
    return out if out.ndim else float(out)


def conditional_moment(pen: Penalty, beta, floor: float | None = None):
    """Posterior mean of the mixing variable T given beta.

    Under p(T | beta) proportional to exp(-T f(beta)) p(T) this equals
    nu * psi_eff'(f(beta)).  Where psi_eff' diverges at the origin the
    moment has a pole at beta = 0; passing ``floor`` clamps |beta| away
    from zero instead of raising (the EM solvers use the clamped form).
    """
    beta = np.asarray(beta, dtype=float)
    if pen.deriv_diverges_at_zero:
        if floor is None:
            if np.any(beta == 0.0):
                raise PoleError("conditional moment diverges at beta = 0; the limit is +inf")
        else:
            beta = np.where(np.abs(beta) < floor, floor, beta)
    out = np.asarray(pen.nu * pen.exponent_deriv(pen._f(beta)))
    return out if out.ndim else float(out)


def penalty_is_integrable(pen: Penalty) -> bool:
    """Whether exp(-penalty) has finite mass over the real line."""
    fam = pen.subordinator.family
    if fam == "compound_poisson":
        return False  # exponent is bounded, tails do not decay
    if fam == "gamma":
        # tails (1 + f(beta))^(-nu): algebraic decay
        return pen.nu > 0.5 if pen.transform == "half_square" else pen.nu > 1.0
    return True


def has_finite_inverse_moment(pen: Penalty) -> bool:
    """Whether E[1/T] is finite, i.e. the integral of exp(-nu psi_eff) over
    (0, inf) converges.  Required by the size-biased posterior-mean form."""
    fam = pen.subordinator.family
    if fam == "compound_poisson":
        return False
    if fam == "gamma":
        return pen.nu > 1.0
    return True


@functools.lru_cache(maxsize=128)
def log_normalizer(pen: Penalty) -> float:
    """log of the prior normalizing constant, cached per penalty.

    Computed once by adaptive quadrature of exp(-penalty) over the real
    line (relative tolerance 1e-12, split at the origin where abs-type
    penalties have a kink).
    """
    if not penalty_is_integrable(pen):
        raise NonIntegrableError(
            f"exp(-penalty) is not integrable for {pen.subordinator.family} "
            f"with transform {pen.transform} at nu={pen.nu}"
        )

    def density(b):
        return math.exp(-penalty_value(pen, b))

    half, _ = quad(density, 0.0, np.inf, epsabs=1e-14, epsrel=1e-12, limit=400)
    return -math.log(2.0 * half)


def prior_log_density(pen: Penalty, beta):
    """log of the normalized prior density: log C - nu psi_eff(f(beta))."""
    return log_normalizer(pen) - penalty_value(pen, beta)


def mixture_penalty(mix: MixturePenalty, beta) -> float:
    """chi of the summed inner exponents; not separable across coordinates."""
    beta = np.asarray(beta, dtype=float)
    inner = penalty_value(mix.inner, beta)
    return float(mix.outer.laplace_exponent(float(np.sum(inner))))
