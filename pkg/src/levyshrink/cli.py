"""Command line interface: simulate, fit, evaluate, benchmark.

Every run writes its outputs (CSV, optional SVG) plus a manifest.json
with the fixed key set {command, flags, seed, started, elapsed_s} into
the chosen output directory, and nothing anywhere else.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from datetime import datetime, timezone

import numpy as np

from . import benchmarks, data, em, ortho, penalties, posterior_mean, subordinators, svgplot

DEFAULT_SEED = 42

FAMILY_CHOICES = ("gamma", "stable", "inverse-gaussian", "compound-poisson", "drift")
TRANSFORMS = {"sq": "half_square", "abs": "abs"}


def parse_grid(spec: str) -> np.ndarray:
    """lo:hi:step, endpoints inclusive within 1e-12."""
    try:
        lo, hi, step = (float(part) for part in spec.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be lo:hi:step, got {spec!r}") from None
    if step <= 0 or hi < lo:
        raise argparse.ArgumentTypeError("grid needs step > 0 and hi >= lo")
    count = int(math.floor((hi - lo) / step + 1e-12))
    return lo + step * np.arange(count + 1)


def _subordinator(args, time_value: float) -> subordinators.Subordinator:
    family = args.family.replace("-", "_")
    if family == "stable":
        if args.index is None:
            raise SystemExit("--index is required for the stable family")
        return subordinators.stable_process(args.index, time_value)
    if family == "inverse_gaussian":
        if args.rate is None:
            raise SystemExit("--rate is required for the inverse-Gaussian family")
        return subordinators.inverse_gaussian_process(args.rate, time_value)
    if family == "compound_poisson":
        if args.jump_rate is None or args.jump_sd is None:
            raise SystemExit("--jump-rate and --jump-sd are required for compound-poisson")
        return subordinators.compound_poisson_process(args.jump_rate, args.jump_sd, time_value)
    if family == "gamma":
        return subordinators.gamma_process(time_value)
    return subordinators.drift_process(time_value)


def _add_family_flags(parser):
    parser.add_argument("--family", choices=FAMILY_CHOICES, required=True)
    parser.add_argument("--index", type=float, help="stable index in (0,1)")
    parser.add_argument("--rate", type=float, help="inverse-Gaussian rate")
    parser.add_argument("--jump-rate", type=float)
    parser.add_argument("--jump-sd", type=float)


def _penalty(args) -> penalties.Penalty:
    sub = _subordinator(args, 1.0)
    return penalties.Penalty(sub, TRANSFORMS[args.transform], args.nu)


# ----------------------------------------------------------------------
# subcommand implementations
# ----------------------------------------------------------------------


def run_penalty_eval(args, outdir):
    pen = _penalty(args)
    grid = args.grid
    value = np.array([penalties.penalty_value(pen, b) for b in grid])
    weight = np.array(
        [penalties.conditional_moment(pen, b, floor=penalties.WEIGHT_FLOOR) for b in grid]
    )
    if penalties.penalty_is_integrable(pen):
        logd = np.array([penalties.prior_log_density(pen, b) for b in grid])
    else:
        logd = np.full(grid.size, np.nan)
    data.save_csv(os.path.join(outdir, "penalty.csv"),
                  ["beta", "penalty", "weight", "log_density"],
                  [grid, value, weight, logd])


def run_mean_curve(args, outdir):
    pen = _penalty(args)
    prob = posterior_mean.NormalMeansProblem(pen, args.sigma)
    ys = np.linspace(-args.ymax, args.ymax, args.n)
    score = np.array([posterior_mean.posterior_mean_score(prob, y) for y in ys])
    size_biased = np.array([posterior_mean.posterior_mean_size_biased(prob, y) for y in ys])
    oracle = np.array([posterior_mean.posterior_mean_quadrature(prob, y) for y in ys])
    data.save_csv(os.path.join(outdir, "mean_curve.csv"),
                  ["y", "mean_ps", "mean_levy", "mean_oracle"],
                  [ys, score, size_biased, oracle])
    if args.svg:
        svgplot.line_chart(
            os.path.join(outdir, "mean_curve.svg"), ys,
            {"posterior mean": score, "identity": ys},
            xlabel="y", ylabel="E(beta | y)", title="shrinkage curve",
        )


def run_simulate_increments(args, outdir):
    sub = _subordinator(args, args.time)
    inc = sub.sample_increments(args.count, args.seed)
    data.save_csv(os.path.join(outdir, "increments.csv"),
                  ["index", "increment"],
                  [np.arange(len(inc)), inc.values])


def run_simulate_two_groups(args, outdir):
    inc = subordinators.sample_two_groups(
        args.jump_rate, args.grid_step, args.jump_sd, args.count, args.seed
    )
    if args.noise_scale > 0:
        inc = subordinators.interlace(inc, args.noise_scale, args.seed + 1)
    data.save_csv(os.path.join(outdir, "increments.csv"),
                  ["index", "increment"],
                  [np.arange(len(inc)), inc.values])


def run_fit_em(args, outdir):
    dataset = data.load_csv(args.data, args.response)
    pen = _penalty(args)
    prob = em.LinearProblem(dataset.x, dataset.y, noise_sd=args.sigma)
    if args.transform == "sq":
        trace = em.em_ridge_mixture(prob, pen, tol=args.tol, max_iter=args.max_iter)
    else:
        trace = em.em_lla(prob, pen, tol=args.tol, max_iter=args.max_iter)
    data.save_csv(os.path.join(outdir, "coefficients.csv"),
                  ["name", "coefficient"],
                  [np.array(dataset.column_names), trace.beta])
    data.save_csv(os.path.join(outdir, "trace.csv"),
                  ["iter", "objective"],
                  [np.arange(len(trace.objectives)), np.array(trace.objectives)])


def run_fit_ortho(args, outdir):
    dataset = data.load_csv(args.data, args.response)
    model = ortho.svd_orthogonalize(dataset.x, dataset.y)
    folds = None
    if args.method in ("rr", "pcr", "pls", "gprior"):
        rng = np.random.default_rng(args.seed)
        folds = rng.integers(0, 10, dataset.n)
    lower = upper = None
    if args.method == "bayes":
        config = ortho.GibbsConfig(iterations=args.iters, burn_in=args.burn, seed=args.seed)
        summary = ortho.gibbs_fit(model, config)
        kappa = summary.kappa_mean
        lower, upper = summary.kappa_lower, summary.kappa_upper
        beta = ortho.fb_beta_estimate(model, summary)
    elif args.method == "rr":
        nu = args.nu if args.nu is not None else data.cv_tune(
            dataset.x, dataset.y, "rr", data.ridge_grid(dataset.x), folds)
        profile = ortho.kappa_weights(model, "rr", nu=nu)
        kappa = profile.kappa
        beta = ortho.reconstruct_beta(model, profile)
    elif args.method in ("pcr", "pls"):
        k = args.components if args.components is not None else data.cv_tune(
            dataset.x, dataset.y, args.method, list(range(1, model.rank + 1)), folds)
        profile = ortho.kappa_weights(model, args.method, n_components=int(k))
        kappa = profile.kappa
        beta = ortho.reconstruct_beta(model, profile)
    else:  # gprior
        g = args.g if args.g is not None else data.cv_tune(
            dataset.x, dataset.y, "gprior", data.gprior_grid(), folds)
        profile = ortho.kappa_weights(model, "gprior", g=g)
        kappa = profile.kappa
        beta = ortho.reconstruct_beta(model, profile)
    if lower is None:
        lower = upper = kappa
    data.save_csv(os.path.join(outdir, "coefficients.csv"),
                  ["name", "coefficient"],
                  [np.array(dataset.column_names), beta])
    data.save_csv(os.path.join(outdir, "kappa_profile.csv"),
                  ["component", "d", "kappa", "lo75", "hi75"],
                  [np.arange(1, model.rank + 1), model.singular, kappa, lower, upper])
    if args.svg:
        intervals = {args.method: (lower, upper)} if args.method == "bayes" else None
        svgplot.kappa_chart(os.path.join(outdir, "kappa_profile.svg"),
                            {args.method: kappa}, intervals=intervals,
                            title="per-component shrinkage")


def run_benchmark_probit(args, outdir):
    from .probit import RSpikeSpec

    spec = RSpikeSpec(p=args.p, n=args.n, r=args.r)
    results = benchmarks.probit_rspike_benchmark(reps=args.reps, seed=args.seed, spec=spec)
    methods = list(results)
    data.save_csv(os.path.join(outdir, "results.csv"),
                  ["method", "median_sse", "mean_sse"],
                  [np.array(methods),
                   np.array([float(np.median(results[m])) for m in methods]),
                   np.array([float(np.mean(results[m])) for m in methods])])


def run_benchmark_holdout(args, outdir):
    if args.data is not None:
        dataset = data.load_csv(args.data, args.response, standardize=False)
        x, y = dataset.x, dataset.y
    else:
        sample = benchmarks.factor_pn_dataset(seed=args.seed)
        x, y = sample.x, sample.y
    methods = tuple(args.methods.split(","))
    results = benchmarks.holdout_benchmark(x, y, n_splits=args.reps, seed=args.seed,
                                           methods=methods)
    data.save_csv(os.path.join(outdir, "results.csv"),
                  ["method", "mean_sse"],
                  [np.array(list(results)),
                   np.array([float(np.mean(v)) for v in results.values()])])


# ----------------------------------------------------------------------
# parser wiring
# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="levyshrink",
                                     description="shrinkage priors and penalties from subordinators")
    parser.add_argument("--out", default="out", help="output directory (default: out)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_pen = sub.add_parser("penalty", help="penalty-function utilities")
    pen_sub = p_pen.add_subparsers(dest="subcommand", required=True)
    p_eval = pen_sub.add_parser("eval", help="tabulate penalty, EM weight, log prior density")
    _add_family_flags(p_eval)
    p_eval.add_argument("--transform", choices=("sq", "abs"), default="sq")
    p_eval.add_argument("--nu", type=float, required=True)
    p_eval.add_argument("--grid", type=parse_grid, required=True, metavar="lo:hi:step")
    p_eval.set_defaults(func=run_penalty_eval, needs_seed=False)

    p_mean = sub.add_parser("mean-curve", help="posterior-mean curves under a shrinkage prior")
    _add_family_flags(p_mean)
    p_mean.add_argument("--transform", choices=("sq",), default="sq")
    p_mean.add_argument("--nu", type=float, required=True)
    p_mean.add_argument("--sigma", type=float, default=1.0)
    p_mean.add_argument("--ymax", type=float, default=10.0)
    p_mean.add_argument("--n", type=int, default=41)
    p_mean.add_argument("--svg", action="store_true")
    p_mean.set_defaults(func=run_mean_curve, needs_seed=False)

    p_sim = sub.add_parser("simulate", help="sample process increments")
    sim_sub = p_sim.add_subparsers(dest="subcommand", required=True)
    p_inc = sim_sub.add_parser("increments", help="subordinator increments on a regular grid")
    _add_family_flags(p_inc)
    p_inc.add_argument("--time", type=float, default=1.0)
    p_inc.add_argument("--count", type=int, default=100)
    p_inc.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_inc.set_defaults(func=run_simulate_increments)
    p_tg = sim_sub.add_parser("two-groups", help="sparse coefficient increments (+ optional noise)")
    p_tg.add_argument("--jump-rate", type=float, required=True)
    p_tg.add_argument("--grid-step", type=float, required=True)
    p_tg.add_argument("--jump-sd", type=float, required=True)
    p_tg.add_argument("--count", type=int, default=100)
    p_tg.add_argument("--noise-scale", type=float, default=0.0)
    p_tg.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_tg.set_defaults(func=run_simulate_two_groups)

    p_fit = sub.add_parser("fit", help="fit penalized / shrinkage regressions")
    fit_sub = p_fit.add_subparsers(dest="subcommand", required=True)
    p_em = fit_sub.add_parser("em", help="posterior mode via EM reweighting")
    _add_family_flags(p_em)
    p_em.add_argument("--transform", choices=("sq", "abs"), required=True)
    p_em.add_argument("--nu", type=float, required=True)
    p_em.add_argument("--data", required=True)
    p_em.add_argument("--response", required=True)
    p_em.add_argument("--sigma", type=float, default=1.0)
    p_em.add_argument("--tol", type=float, default=1e-8)
    p_em.add_argument("--max-iter", type=int, default=500)
    p_em.set_defaults(func=run_fit_em, needs_seed=False)
    p_or = fit_sub.add_parser("ortho", help="SVD-orthogonalized shrinkage fits")
    p_or.add_argument("--method", choices=("rr", "pcr", "pls", "gprior", "bayes"), required=True)
    p_or.add_argument("--data", required=True)
    p_or.add_argument("--response", required=True)
    p_or.add_argument("--nu", type=float)
    p_or.add_argument("--components", "--K", type=int, dest="components")
    p_or.add_argument("--g", type=float)
    p_or.add_argument("--iters", type=int, default=10_000)
    p_or.add_argument("--burn", type=int, default=2_000)
    p_or.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_or.add_argument("--svg", action="store_true")
    p_or.set_defaults(func=run_fit_ortho)

    p_bench = sub.add_parser("benchmark", help="replication-style benchmarks")
    bench_sub = p_bench.add_subparsers(dest="subcommand", required=True)
    p_pr = bench_sub.add_parser("probit-rspike", help="spiked probit estimator comparison")
    p_pr.add_argument("--reps", type=int, default=20)
    p_pr.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_pr.add_argument("--p", type=int, default=25)
    p_pr.add_argument("--n", type=int, default=500)
    p_pr.add_argument("--r", type=int, default=5)
    p_pr.set_defaults(func=run_benchmark_probit)
    p_ho = bench_sub.add_parser("holdout", help="train/test comparison of shrinkage methods")
    p_ho.add_argument("--data", help="CSV path; omit to use the synthetic factor dataset")
    p_ho.add_argument("--response", help="response column name (with --data)")
    p_ho.add_argument("--reps", type=int, default=50)
    p_ho.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_ho.add_argument("--methods", default="bayes,pls,pcr,rr")
    p_ho.set_defaults(func=run_benchmark_holdout)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    for i, token in enumerate(argv):
        # let grid values start with a minus sign, as in --grid -3:3:0.1
        if token == "--grid" and i + 1 < len(argv):
            argv[i] = f"--grid={argv[i + 1]}"
            del argv[i + 1]
            break
    args = parser.parse_args(argv)
    outdir = args.out
    os.makedirs(outdir, exist_ok=True)
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.monotonic()
    try:
        args.func(args, outdir)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1
    flags = {
        k: v for k, v in vars(args).items()
        if k not in ("func", "needs_seed", "command", "subcommand", "out") and v is not None
    }
    flags = {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in flags.items()}
    manifest = {
        "command": " ".join(filter(None, [args.command, getattr(args, "subcommand", None)])),
        "flags": flags,
        "seed": getattr(args, "seed", DEFAULT_SEED),
        "started": started,
        "elapsed_s": round(time.monotonic() - t0, 3),
    }
    with open(os.path.join(outdir, "manifest.json"), "w") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
