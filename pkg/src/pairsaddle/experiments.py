"""Monte Carlo coverage harness and tabular emitters.

``run_coverage`` simulates ``replications`` datasets at the true parameters,
evaluates the configured statistics against the null equal to the truth, and
aggregates one-sided coverage per nominal level.  Replication ``r`` always
draws from the stream ``(master_seed, r)`` regardless of worker count or
scheduling, and aggregation sorts by replication index, so reports are
byte-identical across reruns and thread counts.  Wall time is kept out of
the delimited outputs for the same reason.

Per-replication failures (non-convergent fits, hull violations, singular
matrices) are excluded and counted per statistic; more than five percent of
replications failing for any configured statistic raises
:class:`ExperimentUnstable`.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .classic import classic_test
from .errors import (
    BootstrapUnstable,
    ConfigError,
    DomainError,
    ExperimentUnstable,
    HullViolation,
    NoConvergence,
    NotPositiveDefinite,
    SingularJacobian,
)
from .inference import expected_matrices_mc, fit_mple, godambe_matrices
from .models import (
    Ar1Model,
    ContaminationSpec,
    FixedParamsModel,
    GeostatModel,
    GradientView,
    MvnModel,
    RobustTuning,
    default_block_side,
)
from .numerics import RngStream, chisq_quantile, chisq_tail
from .saddlepoint import bootstrap_pw_sp, stat_pw_sp

__all__ = [
    "ExperimentConfig",
    "CoverageRow",
    "CoverageReport",
    "QQTable",
    "SizeTable",
    "RegionTable",
    "run_coverage",
    "emit_qq_data",
    "emit_size_and_relerr",
    "evaluate_region",
    "qq_table_from_values",
    "coverage_csv",
    "qq_csv",
    "size_csv",
    "region_csv",
]

STATISTIC_NAMES = ("pw", "pw1", "wald", "score", "cb", "inv", "sp", "sp_boot", "w")
MODEL_NAMES = ("mvn", "ar1", "geostat")

_CLASSIC_KIND = {"pw": "pw", "pw1": "moment", "wald": "wald", "score": "score", "cb": "cb", "inv": "inv"}
_NEEDS_NULL_MATRICES = {"pw", "pw1", "score", "inv"}
_NEEDS_FIT_MATRICES = {"wald", "cb"}

_REPLICATION_ERRORS = (
    NoConvergence,
    HullViolation,
    DomainError,
    NotPositiveDefinite,
    SingularJacobian,
    BootstrapUnstable,
)

FAILURE_TOLERANCE = 0.05


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo study: model, truth, shape, statistics, seeds.

    ``true_params`` doubles as the tested null.  ``tuning`` selects a
    bounded estimating system for the saddlepoint statistics (the classical
    statistics always use the likelihood gradient system).  ``matrix_mode``
    chooses empirical matrices, Monte Carlo expected matrices (suffix
    ``_e`` on the statistic labels), or both.
    """

    model: str
    true_params: dict
    shape: dict
    replications: int
    statistics: tuple = ("sp",)
    levels: tuple = (0.9, 0.95, 0.99)
    matrix_mode: str = "empirical"
    bootstrap_b: int = 200
    tuning: Optional[tuple] = None
    contamination: Optional[dict] = None
    master_seed: int = 0
    expected_m: int = 10_000
    expected_m_fit: int = 1_000
    lambda_draws: int = 50_000
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "statistics", tuple(self.statistics))
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))
        if self.tuning is not None:
            object.__setattr__(self, "tuning", tuple(float(v) for v in self.tuning))
        self.validate()

    def validate(self):
        if self.model not in MODEL_NAMES:
            raise ConfigError(f"unknown model {self.model!r}; expected one of {MODEL_NAMES}")
        if self.replications < 1:
            raise ConfigError(f"replications must be positive, got {self.replications}")
        unknown = [
            s
            for s in self.statistics
            if s not in STATISTIC_NAMES
            and not (s.endswith("_e") and s[:-2] in _CLASSIC_KIND)
        ]
        if unknown:
            raise ConfigError(
                f"unknown statistics {unknown}; expected among {STATISTIC_NAMES} "
                "or an _e suffixed classical name"
            )
        if not self.statistics:
            raise ConfigError("at least one statistic must be configured")
        labels = _labels(self)
        if len(set(labels)) != len(labels):
            raise ConfigError(f"statistics expand to repeated labels {labels}")
        for level in self.levels:
            if not 0.0 < level < 1.0:
                raise ConfigError(f"levels must lie in (0, 1), got {level}")
        if not self.levels:
            raise ConfigError("at least one level must be configured")
        if self.matrix_mode not in ("empirical", "mc-expected", "both"):
            raise ConfigError(f"unknown matrix_mode {self.matrix_mode!r}")
        if self.bootstrap_b < 1:
            raise ConfigError(f"bootstrap_b must be positive, got {self.bootstrap_b}")
        if self.tuning is not None and len(self.tuning) != 3:
            raise ConfigError("tuning must be three clipping constants (a, b, c)")
        if self.tuning is not None and self.model == "mvn":
            raise ConfigError("the row-sample model has no bounded estimating system")
        if self.contamination is not None and self.model != "ar1":
            raise ConfigError("contamination applies to the ar1 model only")
        if "w" in self.statistics and self.model == "geostat":
            raise ConfigError("the full-likelihood ratio is unavailable for geostat")
        if self.expected_m < 1000 or self.expected_m_fit < 1000:
            raise ConfigError("expected-matrix Monte Carlo sizes must be at least 1000")
        if self.lambda_draws < 10_000:
            raise ConfigError("lambda_draws must be at least 10^4")
        if self.threads < 1:
            raise ConfigError(f"threads must be positive, got {self.threads}")
        _build_bundle(self)  # validates model shape and parameter names

    @classmethod
    def from_dict(cls, payload):
        known = set(cls.__dataclass_fields__)
        unknown = set(payload) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys {sorted(unknown)}")
        try:
            return cls(**payload)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path):
        with open(path, "r", encoding="utf-8") as handle:
            try:
                payload = json.load(handle)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
        return cls.from_dict(payload)

    def echo(self):
        """Reproducibility echo: every field that affects the numbers.

        Thread count is excluded because results do not depend on it.
        """
        payload = {
            "model": self.model,
            "true_params": dict(sorted(self.true_params.items())),
            "shape": dict(sorted(self.shape.items())),
            "replications": self.replications,
            "statistics": list(self.statistics),
            "levels": list(self.levels),
            "matrix_mode": self.matrix_mode,
            "bootstrap_b": self.bootstrap_b,
            "tuning": list(self.tuning) if self.tuning is not None else None,
            "contamination": dict(sorted(self.contamination.items())) if self.contamination else None,
            "master_seed": self.master_seed,
            "expected_m": self.expected_m,
            "expected_m_fit": self.expected_m_fit,
            "lambda_draws": self.lambda_draws,
        }
        return payload

    def echo_json(self):
        return json.dumps(self.echo(), sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class _ModelBundle:
    base: object
    grad: object
    score: object
    theta0: np.ndarray
    sim_shape: object
    contamination: Optional[ContaminationSpec]


def _theta_from_dict(model, params):
    missing = [n for n in model.param_names if n not in params]
    unknown = [n for n in params if n not in model.param_names]
    if missing or unknown:
        raise ConfigError(
            f"parameters must be exactly {model.param_names}; missing {missing}, unknown {unknown}"
        )
    theta = np.array([float(params[n]) for n in model.param_names])
    if not model.in_domain(theta):
        raise ConfigError(f"true_params {params} outside the model domain")
    return theta


def _shape_value(shape, key, minimum):
    try:
        value = int(shape[key])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"shape needs integer {key!r}, got {shape}") from exc
    if value < minimum:
        raise ConfigError(f"shape {key}={value} below minimum {minimum}")
    return value


def _build_bundle(config):
    tuning = RobustTuning(*config.tuning) if config.tuning is not None else None
    if config.model == "mvn":
        q = _shape_value(config.shape, "q", 2)
        n = _shape_value(config.shape, "n", 2)
        extra = set(config.shape) - {"n", "q"}
        if extra:
            raise ConfigError(f"unknown shape keys {sorted(extra)} for mvn")
        base = MvnModel(q)
        theta0 = _theta_from_dict(base, config.true_params)
        return _ModelBundle(base, GradientView(base), base, theta0, n, None)
    if config.model == "ar1":
        q = _shape_value(config.shape, "q", 3)
        extra = set(config.shape) - {"q"}
        if extra:
            raise ConfigError(f"unknown shape keys {sorted(extra)} for ar1")
        base = Ar1Model()
        theta0 = _theta_from_dict(base, config.true_params)
        scoring = Ar1Model(tuning) if tuning is not None else base
        contamination = None
        if config.contamination is not None:
            payload = dict(config.contamination)
            unknown = set(payload) - {"xi", "mu_u", "sigma2_u"}
            if unknown:
                raise ConfigError(f"unknown contamination keys {sorted(unknown)}")
            if "xi" not in payload:
                raise ConfigError("contamination needs at least xi")
            # Default outliers centered at the process mean with 25x the
            # innovation variance.
            mu_u = payload.get("mu_u")
            if mu_u is None:
                mu_u = theta0[0] / (1.0 - theta0[1])
            sigma2_u = payload.get("sigma2_u")
            if sigma2_u is None:
                sigma2_u = 25.0 * theta0[2]
            try:
                contamination = ContaminationSpec(float(payload["xi"]), float(mu_u), float(sigma2_u))
            except DomainError as exc:
                raise ConfigError(str(exc)) from exc
        return _ModelBundle(base, GradientView(base), scoring, theta0, q, contamination)
    # geostat
    q = _shape_value(config.shape, "q", 2)
    extra = set(config.shape) - {"q", "block_side"}
    if extra:
        raise ConfigError(f"unknown shape keys {sorted(extra)} for geostat")
    if "phi" not in config.true_params:
        raise ConfigError("geostat true_params must include phi")
    block_side = config.shape.get("block_side")
    if block_side is None:
        block_side = default_block_side(float(config.true_params["phi"]))
    try:
        base = GeostatModel(q, int(block_side))
        scoring = GeostatModel(q, int(block_side), tuning) if tuning is not None else base
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    theta0 = _theta_from_dict(base, config.true_params)
    return _ModelBundle(base, GradientView(base), scoring, theta0, q, None)


def _labels(config):
    """Expand bare classical names by matrix mode; explicit ``_e`` names pass through."""
    labels = []
    for name in config.statistics:
        if name in _CLASSIC_KIND:
            if config.matrix_mode in ("empirical", "both"):
                labels.append(name)
            if config.matrix_mode in ("mc-expected", "both"):
                labels.append(name + "_e")
        else:
            labels.append(name)
    return labels


def _needs_expected_null(config):
    return any(
        label.endswith("_e") and label[:-2] in _NEEDS_NULL_MATRICES
        for label in _labels(config)
    )


def _precompute_expected_null(config, bundle):
    if not _needs_expected_null(config):
        return None
    return expected_matrices_mc(
        bundle.grad,
        bundle.theta0,
        bundle.sim_shape,
        config.expected_m,
        RngStream(config.master_seed, 0).child(0),
    )


class _Lazy:
    """Memoize shared per-replication pieces, replaying failures."""

    def __init__(self):
        self._cache = {}

    def get(self, key, builder):
        if key not in self._cache:
            try:
                self._cache[key] = (True, builder())
            except _REPLICATION_ERRORS as exc:
                self._cache[key] = (False, exc)
        ok, payload = self._cache[key]
        if not ok:
            raise payload
        return payload


def _replicate(config, bundle, g_null_expected, r):
    """Evaluate every configured statistic on replication ``r``.

    Returns a dict label -> (value, p_value) with ``None`` marking a failed
    statistic.
    """
    stream = RngStream(config.master_seed, r)
    out = {}
    try:
        if config.model == "ar1":
            data = bundle.base.simulate(
                bundle.theta0, bundle.sim_shape, stream.child(0), bundle.contamination
            )
        else:
            data = bundle.base.simulate(bundle.theta0, bundle.sim_shape, stream.child(0))
        units = bundle.grad.units(data)
    except _REPLICATION_ERRORS:
        return {label: None for label in _labels(config)}

    lazy = _Lazy()
    theta0 = bundle.theta0

    def fit_grad():
        return lazy.get("fit_grad", lambda: fit_mple(bundle.grad, units))

    def fit_score():
        if bundle.score is bundle.base and config.model == "mvn":
            return fit_grad()
        return lazy.get("fit_score", lambda: fit_mple(bundle.score, units))

    def null_bundle(expected):
        if expected:
            if g_null_expected is None:
                raise DomainError("expected null matrices were not precomputed")
            return g_null_expected
        return lazy.get("g_null_emp", lambda: godambe_matrices(bundle.grad, theta0, units))

    def fit_bundle(expected):
        if expected:
            def build():
                fit = fit_grad()
                return expected_matrices_mc(
                    bundle.grad,
                    fit.theta_hat,
                    bundle.sim_shape,
                    config.expected_m_fit,
                    stream.child(3),
                )
            return lazy.get("g_fit_exp", build)

        def build_emp():
            fit = fit_grad()
            return godambe_matrices(bundle.grad, fit.theta_hat, units)

        return lazy.get("g_fit_emp", build_emp)

    for label in _labels(config):
        name = label[:-2] if label.endswith("_e") else label
        expected = label.endswith("_e")
        try:
            if name in _CLASSIC_KIND:
                kind = _CLASSIC_KIND[name]
                g_null = null_bundle(expected) if name in _NEEDS_NULL_MATRICES else None
                g_fit = fit_bundle(expected) if name in _NEEDS_FIT_MATRICES else None
                fit = fit_grad() if kind != "score" else None
                rng = stream.child(4 if expected else 2) if name == "pw" else None
                outcome = classic_test(
                    kind, bundle.grad, units, theta0, fit,
                    g_null=g_null, g_fit=g_fit,
                    rng=rng, lambda_draws=config.lambda_draws,
                )
            elif name == "sp":
                outcome = stat_pw_sp(bundle.score, units, theta0, fit_score())
            elif name == "sp_boot":
                outcome = bootstrap_pw_sp(
                    bundle.score, units, theta0, config.bootstrap_b,
                    stream.child(1), fit_score(),
                )
            else:  # name == "w"
                theta_full = lazy.get("fit_full", lambda: bundle.base.fit_full(data))
                value = 2.0 * (
                    bundle.base.full_loglik(theta_full, data)
                    - bundle.base.full_loglik(theta0, data)
                )
                value = max(value, 0.0)
                out[label] = (value, chisq_tail(value, bundle.base.p))
                continue
            out[label] = (outcome.value, outcome.p_value)
        except _REPLICATION_ERRORS:
            out[label] = None
    return out


def _replicate_chunk(config, r_values, g_null_expected):
    bundle = _build_bundle(config)
    return [(r, _replicate(config, bundle, g_null_expected, r)) for r in r_values]


@dataclass(frozen=True)
class RawResults:
    """Per-replication values and p-values, ordered by replication index."""

    labels: tuple
    values: dict
    p_values: dict
    failures: dict
    replications: int
    df: int
    config: ExperimentConfig
    wall_seconds: float


def _run_raw(config):
    start = time.perf_counter()
    bundle = _build_bundle(config)
    g_null_expected = _precompute_expected_null(config, bundle)
    r_values = list(range(1, config.replications + 1))
    if config.threads == 1:
        rows = _replicate_chunk(config, r_values, g_null_expected)
    else:
        chunks = [list(c) for c in np.array_split(r_values, min(config.threads * 4, len(r_values))) if len(c)]
        rows = []
        with ProcessPoolExecutor(max_workers=config.threads) as pool:
            futures = [
                pool.submit(_replicate_chunk, config, chunk, g_null_expected)
                for chunk in chunks
            ]
            for future in futures:
                rows.extend(future.result())
    rows.sort(key=lambda item: item[0])
    labels = tuple(_labels(config))
    values = {label: np.full(config.replications, np.nan) for label in labels}
    p_values = {label: np.full(config.replications, np.nan) for label in labels}
    failures = {label: 0 for label in labels}
    for r, row in rows:
        for label in labels:
            cell = row.get(label)
            if cell is None:
                failures[label] += 1
            else:
                values[label][r - 1] = cell[0]
                p_values[label][r - 1] = cell[1]
    wall = time.perf_counter() - start
    return RawResults(
        labels=labels,
        values=values,
        p_values=p_values,
        failures=failures,
        replications=config.replications,
        df=bundle.base.p,
        config=config,
        wall_seconds=wall,
    )


def _check_stability(raw):
    for label in raw.labels:
        if raw.failures[label] > FAILURE_TOLERANCE * raw.replications:
            raise ExperimentUnstable(
                f"statistic {label!r} failed on {raw.failures[label]} of "
                f"{raw.replications} replications (tolerance {FAILURE_TOLERANCE:.0%})"
            )


@dataclass(frozen=True)
class CoverageRow:
    statistic: str
    level: float
    coverage: float
    mc_se: float
    failures: int


@dataclass(frozen=True)
class CoverageReport:
    """Aggregated coverage table plus reproducibility metadata.

    ``wall_seconds`` is informational and never serialized into the
    delimited output.
    """

    rows: tuple
    config_echo: str
    replications: int
    wall_seconds: float


def run_coverage(config):
    """Run the study and aggregate one-sided coverage per statistic and level."""
    raw = _run_raw(config)
    _check_stability(raw)
    rows = []
    for label in raw.labels:
        p = raw.p_values[label]
        good = ~np.isnan(p)
        n_eff = int(good.sum())
        for level in sorted(config.levels):
            covered = float((p[good] >= 1.0 - level).mean()) if n_eff else math.nan
            se = math.sqrt(covered * (1.0 - covered) / n_eff) if n_eff else math.nan
            rows.append(
                CoverageRow(
                    statistic=label,
                    level=level,
                    coverage=covered,
                    mc_se=se,
                    failures=raw.failures[label],
                )
            )
    # Coverage is monotone in the level by construction; guard the invariant.
    for label in raw.labels:
        series = [row.coverage for row in rows if row.statistic == label]
        assert all(a <= b + 1e-12 for a, b in zip(series, series[1:]))
    return CoverageReport(
        rows=tuple(rows),
        config_echo=config.echo_json(),
        replications=config.replications,
        wall_seconds=raw.wall_seconds,
    )


@dataclass(frozen=True)
class QQTable:
    statistic: str
    df: int
    empirical: np.ndarray
    theoretical: np.ndarray
    n_effective: int
    failures: int
    config_echo: str


def qq_table_from_values(values, df):
    """Sorted sample values against matching chi-square quantiles."""
    values = np.asarray(values, dtype=float)
    values = values[~np.isnan(values)]
    if values.size < 1:
        raise DomainError("need at least one finite value for a quantile table")
    empirical = np.sort(values)
    n = empirical.size
    probs = (np.arange(1, n + 1) - 0.5) / n
    theoretical = np.array([chisq_quantile(p, df) for p in probs])
    return empirical, theoretical


def emit_qq_data(config, statistic):
    """Replicated statistic values against chi-square quantiles."""
    raw = _run_raw(config)
    _check_stability(raw)
    if statistic not in raw.labels:
        raise ConfigError(f"statistic {statistic!r} is not in the configured list {raw.labels}")
    values = raw.values[statistic]
    empirical, theoretical = qq_table_from_values(values, raw.df)
    return QQTable(
        statistic=statistic,
        df=raw.df,
        empirical=empirical,
        theoretical=theoretical,
        n_effective=empirical.size,
        failures=raw.failures[statistic],
        config_echo=config.echo_json(),
    )


@dataclass(frozen=True)
class SizeTable:
    statistic: str
    alphas: np.ndarray
    actual: np.ndarray
    relative_error: np.ndarray
    n_effective: int
    failures: int
    config_echo: str


def emit_size_and_relerr(config, statistic, alphas=(0.01, 0.02, 0.05, 0.1, 0.15, 0.2)):
    """Actual rejection rates and relative size errors on an alpha grid."""
    alphas = np.asarray(sorted(float(a) for a in alphas))
    if alphas.size == 0 or np.any(alphas <= 0) or np.any(alphas >= 1):
        raise ConfigError("alphas must lie strictly inside (0, 1)")
    raw = _run_raw(config)
    _check_stability(raw)
    if statistic not in raw.labels:
        raise ConfigError(f"statistic {statistic!r} is not in the configured list {raw.labels}")
    p = raw.p_values[statistic]
    p = p[~np.isnan(p)]
    if p.size == 0:
        raise ExperimentUnstable(f"no successful replications for {statistic!r}")
    actual = np.array([float((p <= a).mean()) for a in alphas])
    rel = (actual - alphas) / alphas
    return SizeTable(
        statistic=statistic,
        alphas=alphas,
        actual=actual,
        relative_error=rel,
        n_effective=p.size,
        failures=raw.failures[statistic],
        config_echo=config.echo_json(),
    )


@dataclass(frozen=True)
class RegionTable:
    """Statistic values and p-values over a 2-d null grid for one dataset."""

    param_x: str
    param_y: str
    statistics: tuple
    rows: tuple  # (x, y, statistic, value, p_value)
    metadata: str


def evaluate_region(model, data, grid, statistics, *, fixed=None, rng=None, lambda_draws=50_000):
    """Evaluate statistics over a grid of 2-d null values for one dataset.

    ``grid`` maps the two free parameter names to value arrays; remaining
    parameters are frozen via ``fixed``.  Grid nodes where a statistic is
    unavailable (hull violation, singular matrices) carry NaN.
    """
    sub = FixedParamsModel(model, fixed) if fixed else model
    if sub.p != 2:
        raise DomainError("region grids need exactly two free parameters")
    names = tuple(sub.param_names)
    if set(grid) != set(names):
        raise DomainError(f"grid keys must be exactly {names}, got {sorted(grid)}")
    for name in statistics:
        if name not in STATISTIC_NAMES or name in ("sp_boot", "w"):
            raise DomainError(f"statistic {name!r} is not available on region grids")
    units = sub.units(data)
    grad_view = GradientView(sub)
    fit_grad = fit_mple(grad_view, units)
    g_fit = godambe_matrices(grad_view, fit_grad.theta_hat, units)
    fit_score = fit_grad if isinstance(model, MvnModel) and not fixed else fit_mple(sub, units)
    rows = []
    node = 0
    for x in np.asarray(grid[names[0]], dtype=float):
        for y in np.asarray(grid[names[1]], dtype=float):
            node += 1
            theta0 = np.array([x, y])
            if not sub.in_domain(theta0):
                continue
            g_null = None
            for name in statistics:
                value = math.nan
                p_value = math.nan
                try:
                    if name == "sp":
                        outcome = stat_pw_sp(sub, units, theta0, fit_score)
                    else:
                        if name in _NEEDS_NULL_MATRICES and g_null is None:
                            g_null = godambe_matrices(grad_view, theta0, units)
                        outcome = classic_test(
                            _CLASSIC_KIND[name], grad_view, units, theta0, fit_grad,
                            g_null=g_null if name in _NEEDS_NULL_MATRICES else None,
                            g_fit=g_fit if name in _NEEDS_FIT_MATRICES else None,
                            rng=rng.child(node) if (rng is not None and name == "pw") else None,
                            lambda_draws=lambda_draws,
                        )
                    value, p_value = outcome.value, outcome.p_value
                except _REPLICATION_ERRORS:
                    pass
                rows.append((float(x), float(y), name, value, p_value))
    metadata = json.dumps(
        {
            "fixed": dict(sorted((fixed or {}).items())),
            "grid": {k: [float(v) for v in np.asarray(grid[k], dtype=float)] for k in names},
            "statistics": list(statistics),
        },
        sort_keys=True,
        separators=(",", ":"),
    )
    return RegionTable(
        param_x=names[0], param_y=names[1], statistics=tuple(statistics),
        rows=tuple(rows), metadata=metadata,
    )


def coverage_csv(report):
    """Deterministic delimited rendering of a coverage report."""
    lines = [f"# config: {report.config_echo}"]
    lines.append("statistic,level,coverage,mc_se,failures")
    for row in report.rows:
        lines.append(
            f"{row.statistic},{row.level:.6g},{row.coverage:.6f},{row.mc_se:.6f},{row.failures}"
        )
    return "\n".join(lines) + "\n"


def qq_csv(table):
    lines = [f"# config: {table.config_echo}"]
    lines.append(f"# statistic: {table.statistic} df: {table.df} failures: {table.failures}")
    lines.append("empirical_quantile,theoretical_quantile")
    for emp, theo in zip(table.empirical, table.theoretical):
        lines.append(f"{emp:.10g},{theo:.10g}")
    return "\n".join(lines) + "\n"


def size_csv(table):
    lines = [f"# config: {table.config_echo}"]
    lines.append(f"# statistic: {table.statistic} n_effective: {table.n_effective} failures: {table.failures}")
    lines.append("alpha,actual_size,relative_error")
    for alpha, actual, rel in zip(table.alphas, table.actual, table.relative_error):
        lines.append(f"{alpha:.10g},{actual:.10g},{rel:.10g}")
    return "\n".join(lines) + "\n"


def region_csv(table):
    lines = [f"# region: {table.metadata}"]
    lines.append(f"{table.param_x},{table.param_y},statistic,value,p_value")
    for x, y, name, value, p_value in table.rows:
        lines.append(f"{x:.10g},{y:.10g},{name},{value:.10g},{p_value:.10g}")
    return "\n".join(lines) + "\n"
