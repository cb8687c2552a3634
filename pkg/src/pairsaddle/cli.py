"""Command line interface.

Subcommands::

    estimate   fit a model to one dataset, print estimates and sandwich ses
    test       evaluate the test statistics for one dataset against a null
    coverage   Monte Carlo coverage study from a JSON config
    qq         statistic quantiles against the chi-square reference
    sizecurve  actual size and relative error on an alpha grid
    region     statistic maps over a 2-d grid of null values

Study subcommands write delimited output plus a rendered PNG next to it
(``--no-plot`` skips the figure).  Exit status: 0 success, 1 an experiment
or bootstrap was unstable or a computation failed, 2 usage errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from pathlib import Path

import numpy as np

from .classic import classic_test
from .dataio import load_dataset
from .errors import ConfigError, DomainError, PairsaddleError, ParseError
from .experiments import (
    STATISTIC_NAMES,
    ExperimentConfig,
    coverage_csv,
    emit_qq_data,
    emit_size_and_relerr,
    evaluate_region,
    qq_csv,
    region_csv,
    run_coverage,
    size_csv,
)
from .figures import render_coverage, render_qq, render_region, render_size
from .inference import fit_mple, godambe_matrices
from .models import Ar1Model, GeostatModel, GradientView, MvnModel, RobustTuning
from .numerics import RngStream, chisq_tail
from .saddlepoint import bootstrap_pw_sp, stat_pw_sp

__all__ = ["main", "entry_point"]

_DATA_KIND = {"mvn": "rows", "ar1": "series", "geostat": "field"}
_TEST_ORDER = ("pw", "wald", "score", "pw1", "cb", "inv", "sp")
_KIND_OF = {"pw": "pw", "wald": "wald", "score": "score", "pw1": "moment", "cb": "cb", "inv": "inv"}


def _parse_kv(text, what):
    """``a=1,b=2.5`` into an ordered dict of floats."""
    out = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise ConfigError(f"{what} entries need name=value, got {item!r}")
        name, _, raw = item.partition("=")
        try:
            out[name.strip()] = float(raw)
        except ValueError as exc:
            raise ConfigError(f"{what} value for {name.strip()!r} is not a number: {raw!r}") from exc
    if not out:
        raise ConfigError(f"{what} must not be empty")
    return out


def _parse_grid(text):
    """``rho=0.1:0.9:17,sigma2=0.5:2:16`` into name -> linspace."""
    grid = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        name, _, raw = item.partition("=")
        parts = raw.split(":")
        if "=" not in item or len(parts) != 3:
            raise ConfigError(f"grid entries need name=lo:hi:count, got {item!r}")
        try:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ConfigError(f"bad grid entry {item!r}") from exc
        if count < 2 or not hi > lo:
            raise ConfigError(f"grid entry {item!r} needs hi > lo and count >= 2")
        grid[name.strip()] = np.linspace(lo, hi, count)
    if len(grid) != 2:
        raise ConfigError("region grids need exactly two name=lo:hi:count entries")
    return grid


def _parse_tuning(text):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ConfigError("tuning needs three comma-separated constants a,b,c")
    try:
        values = tuple(math.inf if p in ("inf", "") else float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"bad tuning {text!r}") from exc
    return RobustTuning(*values)


def _build_model(args, data):
    """Model instance shaped to the loaded dataset."""
    tuning = _parse_tuning(args.tuning) if getattr(args, "tuning", None) else None
    if args.model == "mvn":
        if tuning is not None:
            raise ConfigError("the row-sample model has no bounded estimating system")
        data = np.atleast_2d(np.asarray(data, dtype=float))
        return MvnModel(data.shape[1]), data
    if args.model == "ar1":
        return Ar1Model(tuning) if tuning is not None else Ar1Model(), data
    side = int(round(math.sqrt(np.asarray(data).size)))
    block_side = getattr(args, "block_side", None)
    if block_side is None:
        raise ConfigError("geostat commands need --block-side")
    model = (
        GeostatModel(side, block_side, tuning)
        if tuning is not None
        else GeostatModel(side, block_side)
    )
    return model, np.asarray(data, dtype=float).reshape(side, side)


def _null_theta(model, text):
    values = _parse_kv(text, "null")
    missing = [n for n in model.param_names if n not in values]
    unknown = [n for n in values if n not in model.param_names]
    if missing or unknown:
        raise ConfigError(
            f"null must set exactly {model.param_names}; missing {missing}, unknown {unknown}"
        )
    return np.array([values[n] for n in model.param_names])


def _print(lines, out_path=None):
    text = "\n".join(lines) + "\n"
    if out_path is None:
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text, encoding="utf-8")


def _cmd_estimate(args):
    data = load_dataset(args.data, _DATA_KIND[args.model])
    model, data = _build_model(args, data)
    units = model.units(data)
    fit = fit_mple(model, units)
    # Only the row-sample model scores are exact gradients; the moment-form
    # systems have non-symmetric sensitivities.
    matrices = godambe_matrices(model, fit.theta_hat, units, gradient_system=args.model == "mvn")
    se = np.sqrt(np.diag(matrices.v) / matrices.n_units)
    lines = ["parameter,estimate,std_error"]
    for name, value, err in zip(model.param_names, fit.theta_hat, se):
        lines.append(f"{name},{value:.10g},{err:.10g}")
    lines.append(
        f"# n_units: {matrices.n_units} iterations: {fit.iterations} "
        f"residual: {fit.residual_norm:.3e}"
    )
    out = Path(args.out) / "estimate.csv" if args.out else None
    if out:
        out.parent.mkdir(parents=True, exist_ok=True)
    _print(lines, out)
    if out:
        sys.stdout.write(f"wrote {out}\n")
    return 0


def _cmd_test(args):
    data = load_dataset(args.data, _DATA_KIND[args.model])
    model, data = _build_model(args, data)
    units = model.units(data)
    theta0 = _null_theta(model, args.null)
    grad = GradientView(model)
    stream = RngStream(args.seed, 0)
    fit_grad = fit_mple(grad, units)
    g_null = godambe_matrices(grad, theta0, units)
    g_fit = godambe_matrices(grad, fit_grad.theta_hat, units)
    fit_score = fit_grad if args.model == "mvn" else fit_mple(model, units)

    rows = []
    for label in _TEST_ORDER:
        if label == "sp":
            outcome = stat_pw_sp(model, units, theta0, fit_score)
        else:
            outcome = classic_test(
                _KIND_OF[label], grad, units, theta0, fit_grad,
                g_null=g_null, g_fit=g_fit,
                rng=stream.child(2) if label == "pw" else None,
                lambda_draws=args.lambda_draws,
            )
        rows.append((label, outcome))
    if args.bootstrap:
        outcome = bootstrap_pw_sp(
            model, units, theta0, args.bootstrap, stream.child(1), fit_score
        )
        rows.append(("sp_boot", outcome))
    if args.full_lr:
        if not getattr(model, "has_full_loglik", False):
            raise ConfigError(f"the full-likelihood ratio is unavailable for {args.model}")
        theta_full = model.fit_full(data)
        value = max(
            2.0 * (model.full_loglik(theta_full, data) - model.full_loglik(theta0, data)), 0.0
        )
        lines_w = (value, chisq_tail(value, model.p))
        rows.append(("w", lines_w))

    lines = ["statistic,value,df,p_value,calibration,note"]
    for label, outcome in rows:
        if label == "w":
            value, p_value = outcome
            lines.append(f"w,{value:.10g},{model.p},{p_value:.10g},chisq,")
        else:
            lines.append(
                f"{label},{outcome.value:.10g},{outcome.df},{outcome.p_value:.10g},"
                f"{outcome.calibration},{outcome.note}"
            )
    out = Path(args.out) / "test.csv" if args.out else None
    if out:
        out.parent.mkdir(parents=True, exist_ok=True)
    _print(lines, out)
    if out:
        sys.stdout.write(f"wrote {out}\n")
    return 0


def _load_config(args):
    config = ExperimentConfig.from_file(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.threads is not None:
        overrides["threads"] = args.threads
    if getattr(args, "replications", None) is not None:
        overrides["replications"] = args.replications
    if overrides:
        config = dataclasses.replace(config, **overrides)
    return config


def _outdir(args):
    out = Path(args.out) if args.out else Path.cwd()
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_coverage(args):
    config = _load_config(args)
    report = run_coverage(config)
    out = _outdir(args)
    csv_path = out / "coverage.csv"
    csv_path.write_text(coverage_csv(report), encoding="utf-8")
    sys.stdout.write(f"wrote {csv_path}\n")
    if not args.no_plot:
        png_path = out / "coverage.png"
        render_coverage(report, png_path)
        sys.stdout.write(f"wrote {png_path}\n")
    return 0


def _cmd_qq(args):
    config = _load_config(args)
    table = emit_qq_data(config, args.statistic)
    out = _outdir(args)
    csv_path = out / f"qq_{args.statistic}.csv"
    csv_path.write_text(qq_csv(table), encoding="utf-8")
    sys.stdout.write(f"wrote {csv_path}\n")
    if not args.no_plot:
        png_path = out / f"qq_{args.statistic}.png"
        render_qq(table, png_path)
        sys.stdout.write(f"wrote {png_path}\n")
    return 0


def _cmd_sizecurve(args):
    config = _load_config(args)
    alphas = tuple(float(a) for a in args.alphas.split(",")) if args.alphas else None
    table = (
        emit_size_and_relerr(config, args.statistic, alphas)
        if alphas
        else emit_size_and_relerr(config, args.statistic)
    )
    out = _outdir(args)
    csv_path = out / f"size_{args.statistic}.csv"
    csv_path.write_text(size_csv(table), encoding="utf-8")
    sys.stdout.write(f"wrote {csv_path}\n")
    if not args.no_plot:
        png_path = out / f"size_{args.statistic}.png"
        render_size(table, png_path)
        sys.stdout.write(f"wrote {png_path}\n")
    return 0


def _cmd_region(args):
    data = load_dataset(args.data, _DATA_KIND[args.model])
    model, data = _build_model(args, data)
    grid = _parse_grid(args.grid)
    fixed = _parse_kv(args.fixed, "fixed") if args.fixed else None
    statistics = tuple(s.strip() for s in args.stats.split(",") if s.strip())
    unknown = [s for s in statistics if s not in STATISTIC_NAMES or s in ("sp_boot", "w")]
    if unknown:
        raise ConfigError(f"statistics {unknown} are not available on region grids")
    table = evaluate_region(
        model, data, grid, statistics,
        fixed=fixed, rng=RngStream(args.seed, 0), lambda_draws=args.lambda_draws,
    )
    out = _outdir(args)
    csv_path = out / "region.csv"
    csv_path.write_text(region_csv(table), encoding="utf-8")
    sys.stdout.write(f"wrote {csv_path}\n")
    if not args.no_plot:
        png_path = out / "region.png"
        render_region(table, png_path, level=args.level)
        sys.stdout.write(f"wrote {png_path}\n")
    return 0


def _add_model_options(parser, *, tuning=True, block_side=True):
    parser.add_argument("--model", required=True, choices=("mvn", "ar1", "geostat"))
    parser.add_argument("--data", required=True, help="delimited dataset path")
    if tuning:
        parser.add_argument("--tuning", help="bounded-score constants a,b,c (ar1, geostat)")
    if block_side:
        parser.add_argument("--block-side", type=int, dest="block_side", help="geostat block side")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pairsaddle",
        description="pairwise-likelihood tests with saddlepoint calibration",
    )
    parser.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    parser.add_argument("--threads", type=int, default=None, help="worker processes")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--no-plot", action="store_true", help="skip PNG rendering")
    sub = parser.add_subparsers(dest="command", required=True)

    p_est = sub.add_parser("estimate", help="fit one dataset")
    _add_model_options(p_est)
    p_est.set_defaults(func=_cmd_estimate)

    p_test = sub.add_parser("test", help="test a null on one dataset")
    _add_model_options(p_test)
    p_test.add_argument("--null", required=True, help="null parameters name=value,...")
    p_test.add_argument("--bootstrap", type=int, default=0, help="tilted bootstrap resamples")
    p_test.add_argument("--full-lr", action="store_true", dest="full_lr")
    p_test.add_argument("--lambda-draws", type=int, default=50_000, dest="lambda_draws")
    p_test.set_defaults(func=_cmd_test)

    p_cov = sub.add_parser("coverage", help="Monte Carlo coverage study")
    p_cov.add_argument("--config", required=True, help="JSON experiment config")
    p_cov.add_argument("--replications", type=int, default=None)
    p_cov.set_defaults(func=_cmd_coverage)

    p_qq = sub.add_parser("qq", help="statistic against chi-square quantiles")
    p_qq.add_argument("--config", required=True)
    p_qq.add_argument("--statistic", required=True)
    p_qq.add_argument("--replications", type=int, default=None)
    p_qq.set_defaults(func=_cmd_qq)

    p_size = sub.add_parser("sizecurve", help="actual size on an alpha grid")
    p_size.add_argument("--config", required=True)
    p_size.add_argument("--statistic", required=True)
    p_size.add_argument("--alphas", help="comma-separated nominal sizes")
    p_size.add_argument("--replications", type=int, default=None)
    p_size.set_defaults(func=_cmd_sizecurve)

    p_reg = sub.add_parser("region", help="statistic maps over a 2-d null grid")
    _add_model_options(p_reg)
    p_reg.add_argument("--grid", required=True, help="two entries name=lo:hi:count")
    p_reg.add_argument("--fixed", help="frozen parameters name=value,...")
    p_reg.add_argument("--stats", default="pw,wald,sp", help="statistics to map")
    p_reg.add_argument("--level", type=float, default=0.95, help="region level to outline")
    p_reg.add_argument("--lambda-draws", type=int, default=50_000, dest="lambda_draws")
    p_reg.set_defaults(func=_cmd_region)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ConfigError, ParseError, FileNotFoundError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except PairsaddleError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


def entry_point():
    raise SystemExit(main())
