"""Dataset ingestion, standardization, synthetic generators, and CV plumbing."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .ortho import kappa_weights, reconstruct_beta, svd_orthogonalize

__all__ = [
    "Dataset",
    "Standardization",
    "SplitPlan",
    "FactorSample",
    "load_csv",
    "save_csv",
    "fit_standardization",
    "apply_standardization",
    "standardize_dataset",
    "make_split",
    "gen_factor_model",
    "cv_tune",
    "ridge_grid",
    "gprior_grid",
    "sse",
]


@dataclass(frozen=True)
class Standardization:
    """Per-column centering/scaling statistics and the response center.

    ``kept`` indexes the retained (non-constant) columns of the original
    design; dropped constant columns are recorded by name.
    """

    x_mean: np.ndarray
    x_scale: np.ndarray
    y_mean: float
    kept: np.ndarray
    dropped: tuple


@dataclass(frozen=True)
class Dataset:
    """Design matrix and response, optionally standardized.

    When ``standardization`` is set, every column of x has mean zero and
    unit variance and y is centered; the record holds what was applied.
    """

    x: np.ndarray
    y: np.ndarray
    column_names: tuple
    standardization: Standardization | None = None

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]


def fit_standardization(x, y, column_names=None) -> Standardization:
    x = np.asarray(x, dtype=float)
    names = tuple(column_names) if column_names is not None else tuple(
        f"x{j}" for j in range(x.shape[1])
    )
    mean = x.mean(axis=0)
    sd = x.std(axis=0, ddof=0)
    kept = np.flatnonzero(sd > 0)
    dropped = tuple(names[j] for j in np.flatnonzero(sd == 0))
    return Standardization(
        x_mean=mean[kept],
        x_scale=sd[kept],
        y_mean=float(np.mean(y)),
        kept=kept,
        dropped=dropped,
    )


def apply_standardization(std: Standardization, x, y=None):
    x = np.asarray(x, dtype=float)
    xs = (x[:, std.kept] - std.x_mean) / std.x_scale
    if y is None:
        return xs
    return xs, np.asarray(y, dtype=float) - std.y_mean


def standardize_dataset(dataset: Dataset) -> Dataset:
    """Center/scale columns to mean 0, variance 1; center the response.

    Constant columns are dropped and recorded.  Idempotent: applying it
    to an already standardized dataset reproduces the same arrays.
    """
    std = fit_standardization(dataset.x, dataset.y, dataset.column_names)
    xs, ys = apply_standardization(std, dataset.x, dataset.y)
    names = tuple(dataset.column_names[j] for j in std.kept)
    return Dataset(x=xs, y=ys, column_names=names, standardization=std)


def load_csv(path, response_column: str, standardize: bool = True) -> Dataset:
    """Parse a numeric CSV with a header row.

    Missing cells and non-numeric values raise with row/column
    diagnostics (1-based line numbers, counting the header).
    """
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if response_column not in header:
            raise ValueError(f"{path}: no column named {response_column!r} in header")
        rows = []
        bad_cells = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ValueError(
                    f"{path}:{line_no}: expected {len(header)} fields, found {len(row)}"
                )
            parsed = []
            for name, cell in zip(header, row):
                cell = cell.strip()
                if cell == "":
                    bad_cells.append(f"line {line_no}, column {name!r} (missing)")
                    parsed.append(np.nan)
                    continue
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise ValueError(
                        f"{path}:{line_no}: column {name!r}: {cell!r} is not numeric"
                    ) from None
            rows.append(parsed)
    if bad_cells:
        listing = "; ".join(bad_cells[:20])
        raise ValueError(f"{path}: missing values: {listing}")
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least 2 data rows")
    data = np.array(rows, dtype=float)
    y_idx = header.index(response_column)
    mask = np.ones(len(header), dtype=bool)
    mask[y_idx] = False
    dataset = Dataset(
        x=data[:, mask],
        y=data[:, y_idx],
        column_names=tuple(h for h in header if h != response_column),
    )
    return standardize_dataset(dataset) if standardize else dataset


def save_csv(path, header, columns):
    """Write columns (equal-length sequences) as an RFC-4180 CSV."""
    columns = [np.asarray(c) for c in columns]
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for i in range(len(columns[0])):
            writer.writerow([_format_cell(c[i]) for c in columns])


def _format_cell(v):
    if isinstance(v, (np.floating, float)):
        return format(float(v), ".12g")
    return v


@dataclass(frozen=True)
class SplitPlan:
    """Train/test partition plus fold labels over the training indices."""

    train: np.ndarray
    test: np.ndarray
    folds: np.ndarray
    fraction: float
    n_folds: int
    seed: int


def make_split(n: int, fraction: float = 0.75, n_folds: int = 10, seed: int = 0) -> SplitPlan:
    """Deterministic train/test split with balanced CV folds on the
    training part (fold sizes within one of each other)."""
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_train = int(round(fraction * n))
    train, test = perm[:n_train], perm[n_train:]
    folds = rng.permutation(n_train) % n_folds
    return SplitPlan(train=train, test=test, folds=folds,
                     fraction=fraction, n_folds=n_folds, seed=seed)


# ----------------------------------------------------------------------
# Factor-model generators
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class FactorSample:
    """Synthetic regression data with factor-structured predictors.

    ``alpha`` holds the generating coefficients in the SVD coordinates of
    the realized design (``beta`` is its pullback), so fitted shrinkage
    profiles can be scored against the truth.  ``strong_index`` marks the
    deliberately strong low-variance component when one was planted.
    """

    x: np.ndarray
    y: np.ndarray
    beta: np.ndarray
    alpha: np.ndarray
    singular_values: np.ndarray
    strong_index: int | None
    noise_sd: float


def gen_factor_model(
    n: int,
    p: int,
    k: int,
    psi: float,
    seed,
    loadings=None,
    response: str = "component",
    strong_alpha: float = 12.0,
    strong_position: float = 0.6,
    null_alpha_sd: float = 0.25,
    noise_sd: float = 1.0,
    factor_scales=None,
    response_weights=None,
) -> FactorSample:
    """Draw x_i = B f_i + psi * xi_i and a response with known structure.

    ``psi`` is the idiosyncratic noise standard deviation.  By default B
    is the all-ones p x k matrix, which concentrates the predictor
    variance on a single strong direction.

    response = "component": the coefficient vector lives in the SVD basis
    of the realized design, with one strong entry (``strong_alpha``)
    planted on the low-variance component at relative depth
    ``strong_position`` and N(0, null_alpha_sd^2) entries elsewhere;
    y = X beta + noise.

    response = "factors": y = f @ response_weights + noise, with the
    weights defaulting to loading on the smallest-scale factors
    (``factor_scales`` defaults to a decreasing geometric sequence); the
    returned alpha/beta are the implied best linear coefficients in the
    realized SVD basis.
    """
    if not (1 <= k < p):
        raise ValueError("need 1 <= k < p")
    if psi <= 0:
        raise ValueError("psi must be positive")
    rng = np.random.default_rng(seed)

    if response == "component":
        b = np.ones((p, k)) if loadings is None else np.asarray(loadings, dtype=float)
    else:
        if factor_scales is None:
            factor_scales = np.geomspace(5.0, 0.5, k)
        else:
            factor_scales = np.asarray(factor_scales, dtype=float)
        if loadings is None:
            b = rng.standard_normal((p, k)) * factor_scales
        else:
            b = np.asarray(loadings, dtype=float)
    if b.shape != (p, k):
        raise ValueError("loadings must be p x k")

    f = rng.standard_normal((n, k))
    x = f @ b.T + psi * rng.standard_normal((n, p))
    u, d, wt = np.linalg.svd(x, full_matrices=False)
    keep = d > 1e-10 * d[0]
    u, d, w = u[:, keep], d[keep], wt[keep].T
    r = d.size

    if response == "component":
        strong = min(r - 1, max(0, int(round(strong_position * r)) - 1))
        alpha = rng.normal(0.0, null_alpha_sd, size=r)
        alpha[strong] = strong_alpha
        beta = w @ alpha
        y = x @ beta + noise_sd * rng.standard_normal(n)
        return FactorSample(x=x, y=y, beta=beta, alpha=alpha, singular_values=d,
                            strong_index=strong, noise_sd=noise_sd)

    if response == "factors":
        if response_weights is None:
            response_weights = np.zeros(k)
            response_weights[-1] = 8.0
            if k >= 2:
                response_weights[-2] = 5.0
        gamma = np.asarray(response_weights, dtype=float)
        y = f @ gamma + noise_sd * rng.standard_normal(n)
        # implied coefficients of the best linear predictor, mapped to the
        # realized SVD basis: beta solves X beta ~ f gamma in population
        cov_xx = b @ b.T + psi * psi * np.eye(p)
        beta = np.linalg.solve(cov_xx, b @ gamma)
        alpha = w.T @ beta
        return FactorSample(x=x, y=y, beta=beta, alpha=alpha, singular_values=d,
                            strong_index=None, noise_sd=noise_sd)

    raise ValueError(f"unknown response mode {response!r}")


# ----------------------------------------------------------------------
# Cross-validation and scoring
# ----------------------------------------------------------------------


def sse(pred, truth) -> float:
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise ValueError("length mismatch")
    return float(np.sum((pred - truth) ** 2))


def ridge_grid(x, size: int = 30) -> np.ndarray:
    """Log-spaced ridge levels [1e-4, 1e4] times trace(X'X)/p."""
    x = np.asarray(x, dtype=float)
    scale = np.einsum("ij,ij->", x, x) / x.shape[1]
    return np.geomspace(1e-4, 1e4, size) * scale


def gprior_grid(size: int = 30) -> np.ndarray:
    return np.geomspace(1e-2, 1e4, size)


def _strength(method, value):
    # larger = more regularized: big nu, small K, small g
    return value if method == "rr" else -value


def cv_tune(x, y, method: str, grid, folds, tie_tol: float = 1e-2):
    """Grid value minimizing mean held-out SSE across folds.

    ``folds`` assigns a fold id to every row of x.  Candidates within
    ``tie_tol`` relative of the minimum count as tied (differences that
    small are far below fold-to-fold noise at K = 10) and ties break
    toward the stronger regularization: larger nu, fewer components,
    smaller g.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    folds = np.asarray(folds)
    grid = list(grid)
    if not grid:
        raise ValueError("empty grid")
    totals = np.zeros(len(grid))
    counts = 0
    for fid in np.unique(folds):
        held = folds == fid
        if held.all() or not held.any():
            continue
        model = svd_orthogonalize(x[~held], y[~held])
        counts += 1
        for gi, value in enumerate(grid):
            profile = _profile_for(model, method, value)
            beta = reconstruct_beta(model, profile)
            totals[gi] += sse(x[held] @ beta, y[held])
    if counts == 0:
        raise ValueError("fold assignment leaves no usable folds")
    best = totals.min()
    tied = [grid[i] for i in range(len(grid)) if totals[i] <= best * (1.0 + tie_tol)]
    return max(tied, key=lambda v: _strength(method, v))


def _profile_for(model, method, value):
    if method == "rr":
        return kappa_weights(model, "rr", nu=value)
    if method in ("pcr", "pls"):
        return kappa_weights(model, method, n_components=min(int(value), model.rank))
    if method == "gprior":
        return kappa_weights(model, "gprior", g=value)
    raise ValueError(f"cv_tune does not know method {method!r}")
