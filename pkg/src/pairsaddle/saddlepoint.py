"""Nonparametric saddlepoint statistic for estimating equations.

The null is represented by exponentially tilted unit weights: ``solve_tilt``
finds the backward Kullback-Leibler projection of the empirical distribution
onto the set of distributions under which the null scores have mean zero.
``solve_saddle`` then minimizes the tilted cumulant generating function of
the scores evaluated at the fit; minus twice the sample size times that
minimum is the statistic.  It is first-order chi-square and can instead be
calibrated by resampling units from the tilted weights and refitting.

Both solvers run damped Newton from zero on strictly convex systems; a
diverging tilt vector or a stalled line search signals that zero is outside
the convex hull of the scores, reported as :class:`HullViolation` (the null
is untestable at this sample).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classic import TestOutcome
from .errors import (
    DomainError,
    HullViolation,
    NoConvergence,
    NotPositiveDefinite,
    SingularJacobian,
    BootstrapUnstable,
)
from .inference import _dogleg_rescue, fit_mple
from .numerics import RngStream, categorical_sample, chisq_tail, log_sum_exp, newton_system

__all__ = [
    "TiltSolution",
    "SaddleSolution",
    "solve_tilt",
    "solve_saddle",
    "stat_pw_sp",
    "bootstrap_pw_sp",
]


@dataclass(frozen=True)
class TiltSolution:
    """Tilted weights representing the null on the observed units.

    ``beta`` is the tilt vector, ``weights`` the resulting unit
    probabilities (positive, summing to one, giving the null scores mean
    zero), and ``kl_backward`` their Kullback-Leibler divergence from the
    uniform weights.
    """

    beta: np.ndarray
    weights: np.ndarray
    kl_backward: float


@dataclass(frozen=True)
class SaddleSolution:
    """Minimizer ``lam`` and minimum ``k_w <= 0`` of the tilted CGF."""

    lam: np.ndarray
    k_w: float


def _validate_scores(scores, p_min_rows=True):
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 2 or scores.shape[0] < 1:
        raise DomainError(f"scores must be a non-empty (n, p) matrix, got {scores.shape}")
    if not np.all(np.isfinite(scores)):
        raise DomainError("scores have non-finite entries")
    n, p = scores.shape
    if p_min_rows and n < p + 1:
        raise DomainError(f"need at least p + 1 = {p + 1} units, got {n}")
    return scores


def _softmax(logits):
    shifted = logits - logits.max()
    w = np.exp(shifted)
    return w / w.sum()


def _tilt_root(scores, base_logw=None, label="tilt"):
    """Solve the stationarity equation of an exponentially tilted family.

    Finds ``v`` with ``sum_i w_i(v) s_i = 0`` where
    ``w_i(v) ~ exp(c_i + s_i' v)`` and ``c`` are optional base log weights.
    Returns ``(v, logZ(v), w(v))`` with ``logZ = log sum exp(c + S v)``.
    """
    n, p = scores.shape
    base = np.zeros(n) if base_logw is None else base_logw

    def weights_at(v):
        return _softmax(base + scores @ v)

    def mean_score(v):
        return weights_at(v) @ scores

    def jac(v):
        w = weights_at(v)
        mean = w @ scores
        return scores.T @ (scores * w[:, None]) - np.outer(mean, mean)

    col_scale = np.maximum(np.abs(scores).max(axis=0), 1e-12)

    def diverged(v):
        return bool(np.any(np.abs(v) * col_scale > 1e3))

    tol = 1e-9 * max(1.0, float(np.abs(scores).max()))
    try:
        result = newton_system(mean_score, np.zeros(p), jacobian=jac, tol=tol, guard=diverged)
    except (NoConvergence, SingularJacobian) as exc:
        # A stalled line search on a badly scaled system is not proof that
        # no root exists; retry with the MINPACK dogleg before concluding.
        rescue = _dogleg_rescue(mean_score, np.zeros(p), tol, jac=jac)
        if rescue is None or diverged(rescue.x):
            raise HullViolation(
                f"{label} equation has no solution; zero appears to lie outside "
                f"the convex hull of the scores ({exc})"
            ) from exc
        result = rescue
    v = result.x
    log_z = log_sum_exp(base + scores @ v)
    return v, log_z, weights_at(v)


def solve_tilt(scores):
    """Backward KL projection of the uniform weights onto the null.

    ``scores`` are the per-unit estimating functions at the null value.
    """
    scores = _validate_scores(scores)
    beta, _, weights = _tilt_root(scores, label="tilt")
    positive = weights > 0
    kl = float(np.sum(weights[positive] * np.log(weights[positive] * scores.shape[0])))
    return TiltSolution(beta=beta, weights=weights, kl_backward=kl)


def solve_saddle(scores_fit, tilt):
    """Minimize the tilted cumulant generating function of the fit scores.

    The stationarity equation is weighted by the tilted null weights; at
    ``lam = 0`` the CGF is zero, so the minimum is nonpositive.
    """
    scores_fit = _validate_scores(scores_fit, p_min_rows=False)
    weights = np.asarray(tilt.weights, dtype=float)
    if weights.shape != (scores_fit.shape[0],):
        raise DomainError("tilt weights do not match the number of units")
    base = np.log(np.maximum(weights, 1e-300))
    lam, log_z, _ = _tilt_root(scores_fit, base_logw=base, label="saddlepoint")
    return SaddleSolution(lam=lam, k_w=min(float(log_z), 0.0))


def _sp_value(model, units, theta0, theta_hat):
    scores_null = model.unit_scores(theta0, units)
    tilt = solve_tilt(scores_null)
    scores_fit = model.unit_scores(theta_hat, units)
    saddle = solve_saddle(scores_fit, tilt)
    n = model.n_units(units)
    return max(-2.0 * n * saddle.k_w, 0.0), tilt, saddle


def _resolve_fit(model, units, fit):
    if fit is None:
        return fit_mple(model, units)
    if not fit.converged:
        raise DomainError("fit did not converge")
    return fit


def stat_pw_sp(model, data, theta0, fit=None):
    """Saddlepoint statistic as a :class:`TestOutcome` (chi-square reference).

    Raises :class:`HullViolation` when the null is untestable at this
    sample.  ``fit`` defaults to the model's own estimating-equation fit.
    """
    units = model.units(data)
    theta0 = model.check_theta(theta0)
    fit = _resolve_fit(model, units, fit)
    value, _, _ = _sp_value(model, units, theta0, fit.theta_hat)
    return TestOutcome(
        kind="sp",
        value=value,
        df=model.p,
        p_value=chisq_tail(value, model.p),
    )


def bootstrap_pw_sp(model, data, theta0, b_resamples, rng, fit=None, *, max_failure_rate=0.1):
    """Saddlepoint statistic calibrated by the tilted bootstrap.

    Units are resampled with the tilted null weights; each resample is
    refitted through the unweighted estimating equation and its saddlepoint
    statistic recomputed.  The p-value is ``(1 + #{resampled >= observed})
    / (successes + 1)``.  Resamples failing to produce a statistic are
    excluded up to ``max_failure_rate`` of ``b_resamples``; beyond that the
    calibration raises :class:`BootstrapUnstable`.
    """
    if b_resamples < 1:
        raise DomainError(f"need at least one resample, got {b_resamples}")
    if not isinstance(rng, RngStream):
        raise DomainError("bootstrap_pw_sp needs an RngStream for reproducibility")
    units = model.units(data)
    theta0 = model.check_theta(theta0)
    fit = _resolve_fit(model, units, fit)
    observed, tilt, _ = _sp_value(model, units, theta0, fit.theta_hat)
    n = model.n_units(units)
    exceed = 0
    successes = 0
    failures = 0
    for b in range(int(b_resamples)):
        indices = categorical_sample(tilt.weights, rng.child(b), size=n)
        resampled = model.resample(units, indices)
        try:
            fit_b = fit_mple(model, resampled, theta0=model.default_start(resampled))
            value_b, _, _ = _sp_value(model, resampled, theta0, fit_b.theta_hat)
        except (NoConvergence, HullViolation, DomainError, NotPositiveDefinite, SingularJacobian):
            failures += 1
            continue
        successes += 1
        if value_b >= observed:
            exceed += 1
    if failures > max_failure_rate * b_resamples:
        raise BootstrapUnstable(
            f"{failures} of {b_resamples} resamples failed "
            f"(tolerance {max_failure_rate:.0%})"
        )
    p_value = (1.0 + exceed) / (successes + 1.0)
    return TestOutcome(
        kind="sp",
        value=observed,
        df=model.p,
        p_value=p_value,
        calibration="bootstrap",
        note=f"resamples={successes}, failures={failures}",
    )
