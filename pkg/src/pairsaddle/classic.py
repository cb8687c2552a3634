"""Classical pairwise-likelihood test statistics.

The likelihood ratio ``pw``, the sandwich Wald and score statistics, and
the three adjusted ratios: moment-matched ``pw / kappa1``, the
Chandler-Bate-style rescaled Wald, and the invariant score-over-sensitivity
rescaling.  All of them are defined through the pairwise log likelihood and
its gradient system; the sensitivity and variability matrices are supplied
by the caller so empirical and Monte Carlo expected versions share one code
path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import DomainError, NotPositiveDefinite
from .numerics import as_generator, chisq_tail, h_inv_j_eigenvalues, solve_spd

__all__ = [
    "TestOutcome",
    "EigenAdjustment",
    "MCPValue",
    "VALID_KINDS",
    "stat_pl_ratio",
    "stat_wald",
    "stat_score",
    "kappa_factors",
    "stat_moment",
    "stat_cb",
    "stat_inv",
    "linear_chisq_pvalue",
    "classic_test",
]

VALID_KINDS = ("pw", "wald", "score", "moment", "cb", "inv", "sp")


@dataclass(frozen=True)
class TestOutcome:
    """One evaluated test statistic.

    ``value`` is never negative: tiny negative roundoff is clamped to zero
    and flagged.  ``kappa`` carries the adjustment factor of the rescaled
    statistics.  ``calibration`` names the reference distribution used for
    ``p_value`` (chi-square, Monte Carlo weighted chi-square mixture, or
    bootstrap).  ``degenerate`` marks statistics returned as zero by
    continuity because the fit coincides with the null.
    """

    kind: str
    value: float
    df: int
    p_value: float
    kappa: Optional[float] = None
    provenance: Optional[str] = None
    calibration: str = "chisq"
    clamped: bool = False
    degenerate: bool = False
    note: str = ""


class EigenAdjustment(NamedTuple):
    """Eigenvalues of ``inv(h) j`` and their mean ``kappa1``."""

    lambdas: np.ndarray
    kappa1: float


class MCPValue(NamedTuple):
    p_value: float
    se: float


def _clamp(raw):
    raw = float(raw)
    return (0.0, True) if raw < 0 else (raw, False)


def stat_pl_ratio(pl_fit, pl_null):
    """Twice the pairwise log-likelihood gain of the fit over the null."""
    return 2.0 * (float(pl_fit) - float(pl_null))


def stat_wald(theta_hat, theta0, v_fit, n_units):
    """Sandwich Wald quadratic form ``n d' inv(v) d``."""
    d = np.asarray(theta_hat, dtype=float) - np.asarray(theta0, dtype=float)
    return float(n_units * d @ solve_spd(v_fit, d))


def stat_score(score_null, j_null, n_units):
    """Score quadratic form ``ps' inv(j) ps / n`` at the null."""
    ps = np.asarray(score_null, dtype=float)
    return float(ps @ solve_spd(j_null, ps) / n_units)


def kappa_factors(matrices):
    """Eigenvalue adjustment derived from a matrix bundle at the null.

    Eigenvalues of ``inv(h) j`` are clipped at zero when they are negative
    within roundoff of the largest; more negative values indicate an invalid
    variability matrix and raise :class:`DomainError`.
    """
    lambdas = h_inv_j_eigenvalues(matrices.j, matrices.h)
    floor = -1e-10 * max(1.0, float(np.abs(lambdas).max()))
    if np.any(lambdas < floor):
        raise DomainError(f"negative eigenvalue {lambdas.min():.3e} in inv(h) j")
    lambdas = np.maximum(lambdas, 0.0)
    return EigenAdjustment(lambdas=lambdas, kappa1=float(lambdas.mean()))


def stat_moment(pl_ratio, kappa1):
    """First-moment matched ratio ``pw / kappa1``."""
    if not kappa1 > 0:
        raise DomainError(f"kappa1 must be positive, got {kappa1}")
    return float(pl_ratio / kappa1)


def stat_cb(wald_value, theta_hat, theta0, h_fit, n_units, pl_ratio):
    """Wald rescaled so its value matches the curvature of the ratio.

    Returns ``(value, kappa)`` with ``kappa = n d' h d / pw`` at the fit.
    """
    d = np.asarray(theta_hat, dtype=float) - np.asarray(theta0, dtype=float)
    try:
        quad = float(n_units * d @ np.asarray(h_fit, dtype=float) @ d)
    except ValueError as exc:
        raise DomainError(str(exc)) from exc
    kappa = quad / pl_ratio
    return float(wald_value / kappa), float(kappa)


def stat_inv(score_value, score_null, h_null, n_units, pl_ratio):
    """Score statistic rescaled by the sensitivity quadratic form.

    Returns ``(value, kappa)`` with
    ``kappa = ps' inv(h) ps / (n pw)`` at the null, making the result
    invariant under fixed linear maps of the estimating system.
    """
    ps = np.asarray(score_null, dtype=float)
    try:
        solved = np.linalg.solve(np.asarray(h_null, dtype=float), ps)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"sensitivity matrix is singular: {exc}") from exc
    kappa = float(ps @ solved / (n_units * pl_ratio))
    return float(score_value / kappa), kappa


def linear_chisq_pvalue(lambdas, x, draws, rng):
    """Monte Carlo tail of a nonnegative chi-square mixture at ``x``.

    Simulates ``sum_j lambda_j Z_j^2`` with at least 10^4 draws and returns
    the tail estimate with its binomial standard error.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.ndim != 1 or lambdas.size == 0 or np.any(lambdas < 0):
        raise DomainError("lambdas must be a non-empty nonnegative vector")
    if x < 0:
        raise DomainError(f"threshold must be nonnegative, got {x}")
    if draws < 10_000:
        raise DomainError(f"need at least 10^4 draws, got {draws}")
    gen = as_generator(rng)
    z = gen.standard_normal((int(draws), lambdas.size))
    mixture = (z**2 * lambdas).sum(axis=1)
    p_hat = float((mixture >= x).mean())
    se = float(np.sqrt(p_hat * (1.0 - p_hat) / draws))
    return MCPValue(p_hat, se)


def _is_degenerate(theta_hat, theta0, pl_ratio):
    d_inf = float(np.max(np.abs(np.asarray(theta_hat) - np.asarray(theta0))))
    scale = 1.0 + float(np.max(np.abs(theta_hat)))
    return d_inf <= 1e-10 * scale or abs(pl_ratio) <= 1e-12


def classic_test(
    kind,
    model,
    data,
    theta0,
    fit=None,
    g_null=None,
    g_fit=None,
    *,
    rng=None,
    lambda_draws=50_000,
):
    """Evaluate one classical statistic as a :class:`TestOutcome`.

    The statistics are functionals of the pairwise likelihood and its
    gradient system, so ``fit`` must solve the gradient estimating equation
    and the matrix bundles must be gradient-based.  ``g_null`` matrices are
    required by ``score``, ``moment`` and ``inv``; ``g_fit`` by ``wald`` and
    ``cb``.  The raw ratio ``pw`` is calibrated against the weighted
    chi-square mixture by Monte Carlo when both ``g_null`` and ``rng`` are
    supplied, else against the first-order chi-square with a cautionary
    note.
    """
    if kind not in VALID_KINDS or kind == "sp":
        raise DomainError(f"unknown classical statistic kind {kind!r}")
    units = model.units(data)
    n = model.n_units(units)
    theta0 = model.check_theta(theta0)
    df = model.p

    def needs_fit():
        if fit is None:
            raise DomainError(f"statistic {kind!r} requires a fit")
        if not fit.converged:
            raise DomainError("fit did not converge")
        return np.asarray(fit.theta_hat, dtype=float)

    def needs(bundle, name):
        if bundle is None:
            raise DomainError(f"statistic {kind!r} requires {name} matrices")
        return bundle

    if kind == "score":
        bundle = needs(g_null, "null")
        ps = model.unit_gradients(theta0, units).sum(axis=0)
        value, clamped = _clamp(stat_score(ps, bundle.j, n))
        return TestOutcome(
            kind=kind,
            value=value,
            df=df,
            p_value=chisq_tail(value, df),
            provenance=bundle.provenance,
            clamped=clamped,
        )

    theta_hat = needs_fit()
    pl_fit = model.pairwise_loglik(theta_hat, units)
    pl_null = model.pairwise_loglik(theta0, units)
    pl_ratio = stat_pl_ratio(pl_fit, pl_null)

    if kind == "pw":
        value, clamped = _clamp(pl_ratio)
        if g_null is not None and rng is not None:
            adjustment = kappa_factors(g_null)
            mc = linear_chisq_pvalue(adjustment.lambdas, value, lambda_draws, rng)
            return TestOutcome(
                kind=kind,
                value=value,
                df=df,
                p_value=mc.p_value,
                provenance=g_null.provenance,
                calibration="mc-linear",
                clamped=clamped,
                note=f"mc se {mc.se:.2e}",
            )
        return TestOutcome(
            kind=kind,
            value=value,
            df=df,
            p_value=chisq_tail(value, df),
            clamped=clamped,
            note="chi-square reference is first-order only for pw",
        )

    if kind == "wald":
        bundle = needs(g_fit, "fit")
        value, clamped = _clamp(stat_wald(theta_hat, theta0, bundle.v, n))
        return TestOutcome(
            kind=kind,
            value=value,
            df=df,
            p_value=chisq_tail(value, df),
            provenance=bundle.provenance,
            clamped=clamped,
        )

    if kind == "moment":
        bundle = needs(g_null, "null")
        adjustment = kappa_factors(bundle)
        value, clamped = _clamp(stat_moment(max(pl_ratio, 0.0), adjustment.kappa1))
        return TestOutcome(
            kind=kind,
            value=value,
            df=df,
            p_value=chisq_tail(value, df),
            kappa=adjustment.kappa1,
            provenance=bundle.provenance,
            clamped=clamped or pl_ratio < 0,
        )

    if kind == "cb":
        bundle = needs(g_fit, "fit")
        if _is_degenerate(theta_hat, theta0, pl_ratio):
            return TestOutcome(
                kind=kind, value=0.0, df=df, p_value=1.0,
                provenance=bundle.provenance, degenerate=True,
            )
        wald_value = stat_wald(theta_hat, theta0, bundle.v, n)
        raw, kappa = stat_cb(wald_value, theta_hat, theta0, bundle.h, n, pl_ratio)
        value, clamped = _clamp(raw)
        return TestOutcome(
            kind=kind,
            value=value,
            df=df,
            p_value=chisq_tail(value, df),
            kappa=kappa,
            provenance=bundle.provenance,
            clamped=clamped,
        )

    # kind == "inv"
    bundle = needs(g_null, "null")
    if _is_degenerate(theta_hat, theta0, pl_ratio):
        return TestOutcome(
            kind=kind, value=0.0, df=df, p_value=1.0,
            provenance=bundle.provenance, degenerate=True,
        )
    ps = model.unit_gradients(theta0, units).sum(axis=0)
    score_value = stat_score(ps, bundle.j, n)
    raw, kappa = stat_inv(score_value, ps, bundle.h, n, pl_ratio)
    value, clamped = _clamp(raw)
    return TestOutcome(
        kind=kind,
        value=value,
        df=df,
        p_value=chisq_tail(value, df),
        kappa=kappa,
        provenance=bundle.provenance,
        clamped=clamped,
    )
