"""Subordinator families and related infinitely divisible laws.

A subordinator is a nondecreasing Levy process T(s), characterized by its
Laplace exponent psi through E[exp(-t T(s))] = exp(-s psi(t)).  This module
provides closed-form Laplace exponents, Levy densities, and exact increment
samplers for four subordinator families plus a deterministic drift, along
with the two-groups (compound Poisson plus Gaussian noise) generator and the
Meixner / generalized-z family used for log-variance constructions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

__all__ = [
    "Subordinator",
    "gamma_process",
    "stable_process",
    "inverse_gaussian_process",
    "compound_poisson_process",
    "drift_process",
    "IncrementVector",
    "sample_two_groups",
    "interlace",
    "GeneralizedZ",
    "z_char_fn",
    "meixner_density",
    "gz_levy_density",
    "gz_brownian_part",
    "lamperti_mixing_density",
]

FAMILIES = ("gamma", "stable", "inverse_gaussian", "compound_poisson", "drift")


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class Subordinator:
    """A subordinator family observed over a horizon ``time``.

    Parameters other than ``family`` and ``time`` are family specific:
    ``index`` for the stable family (in (0,1)), ``rate`` for the
    inverse-Gaussian family, ``jump_rate``/``jump_sd`` for the compound
    Poisson family.  The compound Poisson subordinator uses half-normal
    jump magnitudes |N(0, jump_sd^2)| so the path stays nondecreasing.
    """

    family: str
    time: float = 1.0
    index: float | None = None
    rate: float | None = None
    jump_rate: float | None = None
    jump_sd: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown subordinator family {self.family!r}")
        if not self.time > 0:
            raise ValueError("observation time must be positive")
        if self.family == "stable":
            if self.index is None or not 0.0 < self.index < 1.0:
                raise ValueError("stable index must lie strictly in (0, 1)")
        if self.family == "inverse_gaussian":
            if self.rate is None or not self.rate > 0:
                raise ValueError("inverse-Gaussian rate must be positive")
        if self.family == "compound_poisson":
            if self.jump_rate is None or not self.jump_rate > 0:
                raise ValueError("jump rate must be positive")
            if self.jump_sd is None or not self.jump_sd >= 0:
                raise ValueError("jump sd must be nonnegative")

    # ------------------------------------------------------------------
    # Laplace exponent and its derivative
    # ------------------------------------------------------------------

    def laplace_exponent(self, t):
        """psi(t) with psi(0) = 0, nondecreasing and concave.

        Raises for negative ``t``.
        """
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("Laplace exponent argument must be nonnegative")
        if self.family == "gamma":
            out = np.log1p(t)
        elif self.family == "stable":
            out = t ** self.index
        elif self.family == "inverse_gaussian":
            r = self.rate
            out = np.sqrt(r * r + 2.0 * t) - r
        elif self.family == "compound_poisson":
            # MGF of a half-normal jump: E exp(-t|J|) = erfcx(eta t / sqrt 2)
            out = self.jump_rate * (1.0 - special.erfcx(self.jump_sd * t / math.sqrt(2.0)))
        else:  # drift
            out = t.copy()
        return out if out.ndim else float(out)

    def laplace_exponent_deriv(self, t):
        """d/dt psi(t), strictly positive for t >= 0."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("Laplace exponent argument must be nonnegative")
        if self.family == "gamma":
            out = 1.0 / (1.0 + t)
        elif self.family == "stable":
            a = self.index
            out = a * t ** (a - 1.0)
        elif self.family == "inverse_gaussian":
            r = self.rate
            out = 1.0 / np.sqrt(r * r + 2.0 * t)
        elif self.family == "compound_poisson":
            eta = self.jump_sd
            u = eta * t / math.sqrt(2.0)
            out = self.jump_rate * eta * (math.sqrt(2.0 / math.pi) - eta * t * special.erfcx(u))
        else:
            out = np.ones_like(t)
        return out if out.ndim else float(out)

    # ------------------------------------------------------------------
    # Levy measure
    # ------------------------------------------------------------------

    def levy_density(self, x):
        """Density of the Levy measure on (0, inf).

        The drift family has no jumps (density identically zero, drift
        coefficient one); the identity psi(t) = integral of (1 - e^{-tx})
        against this density therefore holds for the four jump families
        only.
        """
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0):
            raise ValueError("Levy density is defined on x > 0")
        if self.family == "gamma":
            out = np.exp(-x) / x
        elif self.family == "stable":
            a = self.index
            out = a / special.gamma(1.0 - a) * x ** (-1.0 - a)
        elif self.family == "inverse_gaussian":
            r = self.rate
            out = x ** -1.5 * np.exp(-0.5 * r * r * x) / math.sqrt(2.0 * math.pi)
        elif self.family == "compound_poisson":
            eta = self.jump_sd
            out = self.jump_rate * math.sqrt(2.0 / math.pi) / eta * np.exp(-0.5 * (x / eta) ** 2)
        else:
            out = np.zeros_like(x)
        return out if out.ndim else float(out)

    @property
    def drift_coefficient(self) -> float:
        return 1.0 if self.family == "drift" else 0.0

    # ------------------------------------------------------------------
    # Sampling
    # ------------------------------------------------------------------

    def sample_increments(self, p: int, seed) -> "IncrementVector":
        """p independent increments of T on the regular grid time/p.

        Each increment is an exact draw from the law of T(time/p); their
        sum is distributed as T(time).
        """
        if p < 1:
            raise ValueError("need at least one increment")
        rng = _rng(seed)
        ds = self.time / p
        if self.family == "gamma":
            values = rng.gamma(ds, 1.0, size=p)
        elif self.family == "stable":
            values = ds ** (1.0 / self.index) * _positive_stable(self.index, p, rng)
        elif self.family == "inverse_gaussian":
            # T(ds) is inverse-Gaussian with mean ds/rate and shape ds^2
            values = rng.wald(ds / self.rate, ds * ds, size=p)
        elif self.family == "compound_poisson":
            values = _compound_poisson_sums(
                rng, self.jump_rate * ds, self.jump_sd, p, signed=False
            )
        else:
            values = np.full(p, ds)
        return IncrementVector(values=values, grid_step=ds, kind="precision")


def gamma_process(time: float = 1.0) -> Subordinator:
    return Subordinator("gamma", time=time)


def stable_process(index: float, time: float = 1.0) -> Subordinator:
    return Subordinator("stable", time=time, index=index)


def inverse_gaussian_process(rate: float, time: float = 1.0) -> Subordinator:
    return Subordinator("inverse_gaussian", time=time, rate=rate)


def compound_poisson_process(jump_rate: float, jump_sd: float, time: float = 1.0) -> Subordinator:
    return Subordinator("compound_poisson", time=time, jump_rate=jump_rate, jump_sd=jump_sd)


def drift_process(time: float = 1.0) -> Subordinator:
    """Deterministic subordinator T(s) = s, Laplace exponent psi(t) = t."""
    return Subordinator("drift", time=time)


def _positive_stable(alpha: float, size: int, rng) -> np.ndarray:
    """Positive alpha-stable draws normalized so E exp(-tX) = exp(-t^alpha).

    Kanter's specialization of the Chambers-Mallows-Stuck method.
    """
    u = rng.uniform(0.0, math.pi, size=size)
    e = rng.standard_exponential(size=size)
    a = alpha
    factor = np.sin(a * u) / np.sin(u) ** (1.0 / a)
    ratio = np.sin((1.0 - a) * u) / e
    return factor * ratio ** ((1.0 - a) / a)


def _compound_poisson_sums(rng, mean_count, jump_sd, p, signed):
    counts = rng.poisson(mean_count, size=p)
    total = int(counts.sum())
    values = np.zeros(p)
    if total > 0 and jump_sd > 0:
        jumps = rng.normal(0.0, jump_sd, size=total)
        if not signed:
            jumps = np.abs(jumps)
        nonzero = counts > 0
        stops = np.cumsum(counts[nonzero])
        starts = stops - counts[nonzero]
        sums = np.add.reduceat(jumps, starts)
        values[nonzero] = sums
    return values


@dataclass(frozen=True)
class IncrementVector:
    """Increments of a process on a regular grid.

    ``kind`` records what the increments stand for: "variance" or
    "precision" increments must be nonnegative, "coefficient" increments
    (two-groups draws) and "log_variance" increments are signed.
    """

    values: np.ndarray
    grid_step: float
    kind: str = "variance"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size < 1:
            raise ValueError("increments must form a nonempty vector")
        if not self.grid_step > 0:
            raise ValueError("grid step must be positive")
        if self.kind not in ("variance", "precision", "log_variance", "coefficient"):
            raise ValueError(f"unknown increment kind {self.kind!r}")
        if self.kind in ("variance", "precision") and np.any(values < 0):
            raise ValueError("variance/precision increments must be nonnegative")

    def __len__(self):
        return self.values.size


def sample_two_groups(theta: float, delta: float, eta: float, p: int, seed) -> IncrementVector:
    """Increments of a compound Poisson process with N(0, eta^2) jumps.

    Each of the p grid cells of width delta holds the sum of the signed
    normal jumps landing in it; a cell is exactly zero with probability
    exp(-theta delta).  This is the sparse two-groups coefficient
    generator: jump rate theta controls signal abundance, eta the signal
    scale.
    """
    if theta <= 0 or delta <= 0 or eta < 0:
        raise ValueError("theta and delta must be positive, eta nonnegative")
    if p < 1:
        raise ValueError("need at least one increment")
    rng = _rng(seed)
    values = _compound_poisson_sums(rng, theta * delta, eta, p, signed=True)
    return IncrementVector(values=values, grid_step=delta, kind="coefficient")


def interlace(increments: IncrementVector, noise_scale: float, seed) -> IncrementVector:
    """Add Brownian-noise increments: observed = signal + noise_scale * W.

    Per cell of width delta the noise contribution is N(0, noise_scale^2 *
    delta).  The noise scale is a free parameter of the simulation.
    """
    if noise_scale < 0:
        raise ValueError("noise scale must be nonnegative")
    rng = _rng(seed)
    sd = noise_scale * math.sqrt(increments.grid_step)
    noisy = increments.values + rng.normal(0.0, sd, size=len(increments))
    return IncrementVector(values=noisy, grid_step=increments.grid_step, kind="coefficient")


# ----------------------------------------------------------------------
# Meixner / z / generalized-z family (log-variance scale)
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class GeneralizedZ:
    """Generalized-z distribution with parameters (a, b, mu, sigma, delta).

    The characteristic function is
    [B(a + i sigma t / 2 pi, b - i sigma t / 2 pi) / B(a, b)]^{2 delta}
    times exp(i mu t).  delta = 1/2 with a + b = 1 is the Meixner case,
    the law of (sigma / 2 pi) * logit(kappa) + mu with kappa ~ Be(a, b);
    a = b = 1/2 gives the symmetric (hyperbolic secant type) member whose
    exponential is an inverted-beta variance.
    """

    a: float = 0.5
    b: float = 0.5
    mu: float = 0.0
    sigma: float = 2.0 * math.pi
    delta: float = 0.5

    def __post_init__(self):
        for name in ("a", "b", "sigma", "delta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def c(self) -> float:
        """Asymmetry angle pi(2a - 1), meaningful in the a + b = 1 case."""
        return math.pi * (2.0 * self.a - 1.0)

    def increments(self, p: int) -> "GeneralizedZ":
        """Parameters of one of p self-similar increments."""
        return GeneralizedZ(self.a, self.b, self.mu / p, self.sigma, self.delta / p)

    def sample(self, size: int, seed, terms: int = 160) -> np.ndarray:
        """Draws via the two-sided gamma series of the Levy measure.

        The Levy density expands into gamma convolutions with scales
        sigma / (2 pi (b + m)) on the positive side and a on the negative
        side; the series is truncated after ``terms`` terms and the
        remainder replaced by a moment-matched normal (its exact mean and
        variance follow from digamma/trigamma tails).  When delta = 1/2
        and a + b = 1 the exact logit-beta representation is used instead.
        """
        rng = _rng(seed)
        if abs(self.delta - 0.5) < 1e-14 and abs(self.a + self.b - 1.0) < 1e-12:
            kappa = rng.beta(self.a, self.b, size=size)
            return self.mu + self.sigma / (2.0 * math.pi) * (np.log(kappa) - np.log1p(-kappa))
        shape = 2.0 * self.delta
        m = np.arange(terms)
        scale_pos = self.sigma / (2.0 * math.pi * (self.b + m))
        scale_neg = self.sigma / (2.0 * math.pi * (self.a + m))
        pos = rng.gamma(shape, 1.0, size=(size, terms)) * scale_pos
        neg = rng.gamma(shape, 1.0, size=(size, terms)) * scale_neg
        out = self.mu + pos.sum(axis=1) - neg.sum(axis=1)
        # exact moments of the dropped tail
        coef = self.delta * self.sigma / math.pi
        tail_mean = coef * (special.polygamma(0, self.a + terms) - special.polygamma(0, self.b + terms))
        tail_var = coef * self.sigma / (2.0 * math.pi) * (
            special.polygamma(1, self.b + terms) + special.polygamma(1, self.a + terms)
        )
        return out + rng.normal(tail_mean, math.sqrt(tail_var), size=size)

    def sample_increments(self, p: int, size: int, seed, terms: int = 160) -> np.ndarray:
        """size independent sums of p increment draws, shape (size,)."""
        inc = self.increments(p)
        rng = _rng(seed)
        total = np.zeros(size)
        for _ in range(p):
            total += inc.sample(size, rng, terms=terms)
        return total


def z_char_fn(params: GeneralizedZ, t):
    """Characteristic function of the generalized-z law, modulus <= 1."""
    t = np.asarray(t, dtype=float)
    w = 1j * params.sigma * t / (2.0 * math.pi)
    log_ratio = (
        special.loggamma(params.a + w)
        + special.loggamma(params.b - w)
        - special.loggamma(params.a)
        - special.loggamma(params.b)
    )
    out = np.exp(2.0 * params.delta * log_ratio + 1j * params.mu * t)
    return out if out.ndim else complex(out)


def _log_cosh(x):
    x = np.abs(x)
    return x + np.log1p(np.exp(-2.0 * x)) - math.log(2.0)


def meixner_density(params: GeneralizedZ, z):
    """Density of the Meixner member (delta = 1/2, a + b = 1).

    Uses |Gamma(1/2 + iu)|^2 = pi / cosh(pi u); the prefactor
    cos(c/2) / (sigma pi) makes the density integrate to one (checkable
    by quadrature, and against the logit-beta law at sigma = 2 pi).
    """
    if abs(params.delta - 0.5) > 1e-14:
        raise ValueError("closed-form density requires delta = 1/2")
    if abs(params.a + params.b - 1.0) > 1e-12:
        raise ValueError("closed-form density requires a + b = 1")
    z = np.asarray(z, dtype=float)
    u = (z - params.mu) / params.sigma
    c = params.c
    log_f = (
        math.log(math.cos(c / 2.0) / params.sigma)
        + c * u
        - _log_cosh(math.pi * u)
    )
    out = np.exp(log_f)
    return out if out.ndim else float(out)


def gz_levy_density(params: GeneralizedZ, x):
    """Levy density of the generalized-z law, nonnegative on x != 0.

    For x > 0 the density is 2 delta exp(-2 pi b x / sigma) divided by
    x (1 - exp(-2 pi x / sigma)); the x < 0 branch mirrors it with a in
    place of b.  This is the decaying-exponential form; it is positive,
    and integrates min(1, x^2) to a finite value.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x == 0):
        raise ValueError("Levy density has a pole at x = 0")
    ax = np.abs(x)
    rate = np.where(x > 0, params.b, params.a)
    scaled = 2.0 * math.pi * ax / params.sigma
    out = 2.0 * params.delta * np.exp(-rate * scaled) / (ax * -np.expm1(-scaled))
    return out if out.ndim else float(out)


def gz_brownian_part(params: GeneralizedZ) -> float:
    """Location coefficient of the generalized-z Levy triple, by quadrature."""
    from scipy.integrate import quad

    a, b = params.a, params.b

    def integrand(x):
        if x < 1e-12:
            return a - b  # removable singularity at zero
        return (math.exp(-b * x) - math.exp(-a * x)) / -math.expm1(-x)

    upper = 2.0 * math.pi / params.sigma
    value, _ = quad(integrand, 0.0, upper, epsabs=1e-12, epsrel=1e-12)
    return params.sigma * params.delta / math.pi * value + params.mu


def lamperti_mixing_density(alpha: float, v):
    """Mixing density of the Normal-Lamperti variance, on v > 0.

    sin(pi a)/pi * v^(a-1) / (v^(2a) + 2 v^a cos(pi a) + 1); the
    denominator equals (v^a + cos pi a)^2 + sin^2 pi a > 0.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly in (0, 1)")
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0):
        raise ValueError("density defined on v > 0")
    va = v ** alpha
    denom = (va + math.cos(math.pi * alpha)) ** 2 + math.sin(math.pi * alpha) ** 2
    out = math.sin(math.pi * alpha) / math.pi * v ** (alpha - 1.0) / denom
    return out if out.ndim else float(out)
