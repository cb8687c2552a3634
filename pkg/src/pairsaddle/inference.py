"""Estimating-equation fits and sandwich information matrices.

``fit_mple`` solves the total estimating equation by damped Newton in each
model's unconstrained internal coordinates, so iterates can never leave the
parameter domain and the fitted root is invariant to the coordinate choice.
The variability and sensitivity matrices ``J`` and ``H`` are per-unit
averages; their Monte Carlo expectations replace unavailable closed forms.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize

from .errors import (
    DegenerateScores,
    DomainError,
    NoConvergence,
    NotPositiveDefinite,
    SingularJacobian,
)
from .numerics import NewtonResult, RngStream, central_jacobian, newton_system

__all__ = [
    "FitResult",
    "GodambeMatrices",
    "fit_mple",
    "empirical_j",
    "empirical_h",
    "godambe_v",
    "godambe_matrices",
    "expected_matrices_mc",
]


@dataclass(frozen=True)
class FitResult:
    """Root of the total estimating equation.

    ``residual_norm`` is the max-norm of the mean per-unit score at
    ``theta_hat``; ``converged`` asserts it met the requested tolerance.
    """

    theta_hat: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class GodambeMatrices:
    """Sandwich ingredients evaluated at one parameter point.

    ``j`` is the per-unit score covariance, ``h`` the per-unit sensitivity
    (minus the mean score Jacobian), and ``v = inv(h) j inv(h)^T`` the
    asymptotic covariance of the fit.  ``provenance`` records whether the
    matrices are empirical averages from one dataset or Monte Carlo
    expectations; standard errors accompany the latter.
    """

    h: np.ndarray
    j: np.ndarray
    v: np.ndarray
    provenance: str
    eval_point: np.ndarray
    n_units: int
    se_h: Optional[np.ndarray] = None
    se_j: Optional[np.ndarray] = None


def fit_mple(model, data, theta0=None, *, tol=1e-8, max_iter=200, trust_radius=5.0):
    """Solve the total estimating equation of ``model`` on ``data``.

    Convergence requires the mean per-unit score to reach ``tol`` in max
    norm.  Iterates are confined to a max-norm ball of ``trust_radius``
    around the start in internal coordinates: bounded estimating systems
    saturate at extreme parameters and can develop spurious roots there, so
    a root is accepted only near the data-driven start.  On a stalled solve
    the model's ``refine_start`` hook, when present, restarts Newton once
    from a refined iterate, then a bounded trust-region least-squares solve
    is attempted; failure after that raises :class:`NoConvergence` carrying
    the best :class:`FitResult`.
    """
    units = model.units(data)
    n = model.n_units(units)
    if n < 1:
        raise DomainError("no units to fit")
    start = np.asarray(theta0, dtype=float) if theta0 is not None else model.default_start(units)
    start = model.check_theta(start)
    eta0 = model.to_internal(start)

    def mean_score_internal(eta):
        theta = model.from_internal(eta)
        return model.unit_scores(theta, units).mean(axis=0)

    def outside(eta):
        return bool(np.abs(eta - eta0).max() > trust_radius)

    def solve_from(theta_start):
        return newton_system(
            mean_score_internal,
            model.to_internal(theta_start),
            tol=tol,
            max_iter=max_iter,
            guard=outside,
        )

    try:
        result = solve_from(start)
    except (NoConvergence, SingularJacobian) as exc:
        best = getattr(exc, "best", None)
        best_eta = best.x if best is not None else eta0
        refine = getattr(model, "refine_start", None)
        if refine is not None:
            refined = refine(model.from_internal(best_eta), units)
            try:
                result = solve_from(model.check_theta(refined))
            except (NoConvergence, SingularJacobian) as exc2:
                best2 = getattr(exc2, "best", None)
                exc, best_eta = exc2, best2.x if best2 is not None else best_eta
                result = None
            else:
                exc = None
        else:
            result = None
        if result is None:
            result = _bounded_rescue(mean_score_internal, best_eta, eta0, trust_radius, tol)
            if result is None:
                raise _fit_failure(exc, model) from exc
    theta_hat = model.from_internal(result.x)
    return FitResult(
        theta_hat=theta_hat,
        residual_norm=result.residual_norm,
        iterations=result.iterations,
        converged=True,
    )


def _bounded_rescue(func, x0, center, radius, tol):
    """Box-constrained least-squares root attempt; ``None`` unless it meets ``tol``.

    Damped Newton stalls on ill-conditioned score ridges; the reflective
    trust region handles internal rescaling while honoring the root box.
    """
    lower, upper = center - radius, center + radius
    x0 = np.clip(np.asarray(x0, dtype=float), lower + 1e-9, upper - 1e-9)
    try:
        sol = optimize.least_squares(
            func, x0, bounds=(lower, upper), method="trf",
            xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000,
        )
    except (ValueError, FloatingPointError):
        return None
    residual = np.asarray(sol.fun, dtype=float)
    if not np.all(np.isfinite(residual)) or float(np.abs(residual).max()) > tol:
        return None
    return NewtonResult(
        x=np.asarray(sol.x, dtype=float),
        residual_norm=float(np.abs(residual).max()),
        iterations=int(sol.nfev),
    )


def _dogleg_rescue(func, x0, tol, jac=None):
    """One `scipy.optimize.root` hybr attempt; ``None`` unless it meets ``tol``."""
    try:
        sol = optimize.root(func, np.asarray(x0, dtype=float), jac=jac, method="hybr")
    except (ValueError, FloatingPointError):
        return None
    residual = np.asarray(sol.fun, dtype=float)
    if not np.all(np.isfinite(residual)) or float(np.abs(residual).max()) > tol:
        return None
    return NewtonResult(
        x=np.asarray(sol.x, dtype=float),
        residual_norm=float(np.abs(residual).max()),
        iterations=int(sol.nfev),
    )


def _fit_failure(exc, model):
    best_newton = getattr(exc, "best", None)
    best = None
    if best_newton is not None:
        best = FitResult(
            theta_hat=model.from_internal(best_newton.x),
            residual_norm=best_newton.residual_norm,
            iterations=best_newton.iterations,
            converged=False,
        )
    return NoConvergence(f"fit did not converge: {exc}", best=best)


def empirical_j(scores):
    """Average outer product of the per-unit scores, shape ``(p, p)``.

    Warns :class:`DegenerateScores` when the matrix is numerically rank
    deficient (the downstream solves will then raise).
    """
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 2 or scores.shape[0] < 1:
        raise DomainError(f"scores must be a non-empty (n, p) matrix, got {scores.shape}")
    n = scores.shape[0]
    j_mat = scores.T @ scores / n
    eigs = np.linalg.eigvalsh(j_mat)
    if eigs[-1] <= 0 or eigs[0] <= 1e-12 * max(eigs[-1], 1e-300):
        warnings.warn("unit score matrix is numerically rank deficient", DegenerateScores)
    return j_mat


def empirical_h(model, theta, data, *, gradient_system=True):
    """Minus the Jacobian of the mean per-unit score at ``theta``.

    Computed by central differences.  For gradient-type systems the result
    is symmetrized; a relative asymmetry beyond 1e-4 indicates the system is
    not a gradient and triggers :class:`DegenerateScores`.
    """
    units = model.units(data)
    theta = model.check_theta(theta)
    evaluate = model.unit_gradients if gradient_system else model.unit_scores

    def mean_score(t):
        return evaluate(t, units).mean(axis=0)

    h_mat = -central_jacobian(mean_score, theta)
    if gradient_system:
        scale = max(1.0, float(np.abs(h_mat).max()))
        asym = float(np.abs(h_mat - h_mat.T).max())
        if asym > 1e-4 * scale:
            warnings.warn(
                f"sensitivity matrix asymmetry {asym:.2e} exceeds gradient-system tolerance",
                DegenerateScores,
            )
        h_mat = 0.5 * (h_mat + h_mat.T)
    return h_mat


def godambe_v(h_mat, j_mat):
    """Sandwich covariance ``inv(h) j inv(h)^T``, symmetrized."""
    h_mat = np.asarray(h_mat, dtype=float)
    j_mat = np.asarray(j_mat, dtype=float)
    try:
        half = np.linalg.solve(h_mat, j_mat)
        v_mat = np.linalg.solve(h_mat, half.T).T
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"sensitivity matrix is singular: {exc}") from exc
    return 0.5 * (v_mat + v_mat.T)


def godambe_matrices(model, theta, data, *, provenance="empirical", gradient_system=True):
    """Empirical ``(h, j, v)`` bundle at ``theta`` from one dataset."""
    units = model.units(data)
    theta = model.check_theta(theta)
    evaluate = model.unit_gradients if gradient_system else model.unit_scores
    scores = evaluate(theta, units)
    j_mat = empirical_j(scores)
    h_mat = empirical_h(model, theta, units, gradient_system=gradient_system)
    return GodambeMatrices(
        h=h_mat,
        j=j_mat,
        v=godambe_v(h_mat, j_mat),
        provenance=provenance,
        eval_point=theta,
        n_units=model.n_units(units),
    )


def expected_matrices_mc(model, theta, shape, m_datasets, rng, *, gradient_system=True):
    """Monte Carlo expected ``(h, j, v)`` at ``theta``.

    Averages the empirical matrices over ``m_datasets`` fresh datasets
    simulated from the model at ``theta`` (at least 1000, so the Monte Carlo
    error is small against the statistic tolerances).  Entrywise standard
    errors of the averaged ``h`` and ``j`` are reported.
    """
    if m_datasets < 1000:
        raise DomainError(f"need at least 1000 Monte Carlo datasets, got {m_datasets}")
    if not isinstance(rng, RngStream):
        raise DomainError("expected_matrices_mc needs an RngStream for reproducibility")
    theta = model.check_theta(theta)
    p = model.p
    sum_h = np.zeros((p, p))
    sum_j = np.zeros((p, p))
    sum_h2 = np.zeros((p, p))
    sum_j2 = np.zeros((p, p))
    n_units = None
    evaluate = None
    for r in range(m_datasets):
        data = model.simulate(theta, shape, rng.child(r))
        units = model.units(data)
        if evaluate is None:
            evaluate = model.unit_gradients if gradient_system else model.unit_scores
            n_units = model.n_units(units)
        scores = evaluate(theta, units)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateScores)
            j_mat = scores.T @ scores / scores.shape[0]
            h_mat = empirical_h(model, theta, units, gradient_system=gradient_system)
        sum_j += j_mat
        sum_j2 += j_mat**2
        sum_h += h_mat
        sum_h2 += h_mat**2
    j_bar = sum_j / m_datasets
    h_bar = sum_h / m_datasets
    se_j = np.sqrt(np.maximum(sum_j2 / m_datasets - j_bar**2, 0.0) / m_datasets)
    se_h = np.sqrt(np.maximum(sum_h2 / m_datasets - h_bar**2, 0.0) / m_datasets)
    return GodambeMatrices(
        h=h_bar,
        j=j_bar,
        v=godambe_v(h_bar, j_bar),
        provenance="mc-expected",
        eval_point=theta,
        n_units=n_units,
        se_h=se_h,
        se_j=se_j,
    )
