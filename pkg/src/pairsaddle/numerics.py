"""Numerical kernel shared by the statistical modules.

Dense symmetric linear algebra, a damped Newton solver for square nonlinear
systems, central-difference Jacobians, chi-square tail areas, stable
log-sum-exp, inverse-CDF categorical sampling, and reproducible random
streams.  Everything here is deterministic given its inputs; randomness
enters only through an explicit :class:`RngStream`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy import linalg as sla
from scipy import special, stats

from .errors import DomainError, NoConvergence, NotPositiveDefinite, SingularJacobian

__all__ = [
    "cholesky_spd",
    "solve_spd",
    "h_inv_j_eigenvalues",
    "NewtonResult",
    "newton_system",
    "central_jacobian",
    "chisq_tail",
    "chisq_quantile",
    "log_sum_exp",
    "categorical_sample",
    "RngStream",
    "as_generator",
]


def _as_square_matrix(a, name="matrix"):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} has non-finite entries")
    return a


def cholesky_spd(a, *, pivot_rtol=1e-12):
    """Lower Cholesky factor of a symmetric positive definite matrix.

    Raises :class:`NotPositiveDefinite` when the factorization fails or when
    any pivot falls at or below ``pivot_rtol * trace(a) / order``, which
    rejects numerically semidefinite inputs instead of returning a factor
    dominated by roundoff.
    """
    a = _as_square_matrix(a)
    scale = max(1.0, float(np.abs(a).max()))
    if not np.allclose(a, a.T, atol=1e-8 * scale):
        raise DomainError("matrix is not symmetric")
    try:
        lower = sla.cholesky(a, lower=True, check_finite=False)
    except sla.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    order = a.shape[0]
    tol = pivot_rtol * float(np.trace(a)) / order
    pivots = np.diag(lower) ** 2
    if np.any(pivots <= tol):
        raise NotPositiveDefinite(
            f"smallest pivot {pivots.min():.3e} at or below tolerance {tol:.3e}"
        )
    return lower


def solve_spd(a, b):
    """Solve ``a x = b`` for symmetric positive definite ``a``."""
    lower = cholesky_spd(a)
    y = sla.solve_triangular(lower, b, lower=True, check_finite=False)
    return sla.solve_triangular(lower.T, y, lower=False, check_finite=False)


def h_inv_j_eigenvalues(j_mat, h_mat):
    """Eigenvalues of ``inv(h) j`` for symmetric ``j`` and SPD ``h``.

    Computed from the symmetric congruent form ``inv(L) j inv(L)^T`` with
    ``h = L L^T``, so the result is real and sorted ascending.
    """
    j_mat = _as_square_matrix(j_mat, "j")
    h_mat = _as_square_matrix(h_mat, "h")
    if j_mat.shape != h_mat.shape:
        raise DomainError("j and h must have the same shape")
    lower = cholesky_spd(h_mat)
    half = sla.solve_triangular(lower, j_mat, lower=True, check_finite=False)
    whitened = sla.solve_triangular(lower, half.T, lower=True, check_finite=False)
    whitened = 0.5 * (whitened + whitened.T)
    return np.linalg.eigvalsh(whitened)


class NewtonResult(NamedTuple):
    x: np.ndarray
    residual_norm: float
    iterations: int


def newton_system(
    f,
    x0,
    jacobian=None,
    *,
    tol=1e-9,
    max_iter=200,
    max_halvings=30,
    guard=None,
):
    """Solve the square system ``f(x) = 0`` by damped Newton iteration.

    Each step is halved until the Euclidean residual strictly decreases;
    thirty failed halvings raise :class:`NoConvergence`, as does exhausting
    ``max_iter`` or tripping the optional ``guard`` divergence predicate.
    A Jacobian the linear solver rejects raises :class:`SingularJacobian`.
    Convergence is declared when ``max|f(x)| <= tol``.
    """
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    fx = np.atleast_1d(np.asarray(f(x), dtype=float))
    if fx.shape != x.shape:
        raise DomainError(f"f must map R^{x.size} to R^{x.size}, got {fx.shape}")
    if not np.all(np.isfinite(fx)):
        raise DomainError("f(x0) is not finite")
    norm = float(np.linalg.norm(fx))
    for iteration in range(1, max_iter + 1):
        if float(np.max(np.abs(fx))) <= tol:
            return NewtonResult(x, float(np.max(np.abs(fx))), iteration - 1)
        jac = jacobian(x) if jacobian is not None else central_jacobian(f, x)
        jac = np.atleast_2d(np.asarray(jac, dtype=float))
        if not np.all(np.isfinite(jac)):
            raise SingularJacobian("Jacobian has non-finite entries")
        try:
            step = np.linalg.solve(jac, -fx)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(str(exc)) from exc
        accepted = False
        scale = 1.0
        for _ in range(max_halvings + 1):
            x_new = x + scale * step
            try:
                f_new = np.atleast_1d(np.asarray(f(x_new), dtype=float))
            except (OverflowError, FloatingPointError):
                # A probe beyond the representable range is a rejected step,
                # not an error.
                f_new = np.full_like(fx, np.nan)
            if np.all(np.isfinite(f_new)):
                norm_new = float(np.linalg.norm(f_new))
                if norm_new < norm:
                    x, fx, norm = x_new, f_new, norm_new
                    accepted = True
                    break
            scale *= 0.5
        if not accepted:
            raise NoConvergence(
                f"line search stalled at iteration {iteration} (residual {norm:.3e})",
                best=NewtonResult(x, norm, iteration),
            )
        if guard is not None and guard(x):
            raise NoConvergence(
                f"divergence guard tripped at iteration {iteration}",
                best=NewtonResult(x, norm, iteration),
            )
    if float(np.max(np.abs(fx))) <= tol:
        return NewtonResult(x, float(np.max(np.abs(fx))), max_iter)
    raise NoConvergence(
        f"no convergence in {max_iter} iterations (residual {norm:.3e})",
        best=NewtonResult(x, norm, max_iter),
    )


def central_jacobian(f, x, step=None):
    """Central-difference Jacobian of ``f`` at ``x``.

    The default per-coordinate step is ``max(1e-6, 1e-6 * |x_j|)``.
    Returns an ``(m, k)`` array for ``f: R^k -> R^m``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    fx = np.atleast_1d(np.asarray(f(x), dtype=float))
    cols = []
    for j in range(x.size):
        h = step if step is not None else max(1e-6, 1e-6 * abs(x[j]))
        forward = x.copy()
        backward = x.copy()
        forward[j] += h
        backward[j] -= h
        hi = np.atleast_1d(np.asarray(f(forward), dtype=float))
        lo = np.atleast_1d(np.asarray(f(backward), dtype=float))
        cols.append((hi - lo) / (2.0 * h))
    return np.column_stack(cols).reshape(fx.size, x.size)


def chisq_tail(x, df):
    """Upper tail probability ``P(X >= x)`` for a chi-square with ``df`` degrees."""
    if df < 1 or int(df) != df:
        raise DomainError(f"degrees of freedom must be a positive integer, got {df}")
    if not np.isfinite(x) or x < 0:
        raise DomainError(f"quantile must be finite and nonnegative, got {x}")
    return float(special.gammaincc(df / 2.0, x / 2.0))


def chisq_quantile(prob, df):
    """Lower quantile of a chi-square with ``df`` degrees at probability ``prob``."""
    if df < 1 or int(df) != df:
        raise DomainError(f"degrees of freedom must be a positive integer, got {df}")
    if not 0.0 <= prob < 1.0:
        raise DomainError(f"probability must lie in [0, 1), got {prob}")
    return float(stats.chi2.ppf(prob, df))


def log_sum_exp(values):
    """Stable ``log(sum(exp(values)))`` for a non-empty vector."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise DomainError("log_sum_exp of an empty vector")
    return float(special.logsumexp(values))


def categorical_sample(weights, rng, size=None):
    """Inverse-CDF draws from a categorical distribution.

    ``weights`` must be nonnegative and sum to one within 1e-10.  Returns a
    single integer index when ``size`` is None, otherwise an integer array.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1 or weights.size == 0:
        raise DomainError("weights must be a non-empty vector")
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise DomainError("weights must be finite and nonnegative")
    total = float(weights.sum())
    if abs(total - 1.0) > 1e-10:
        raise DomainError(f"weights must sum to one, got {total!r}")
    cdf = np.cumsum(weights)
    cdf[-1] = 1.0
    gen = as_generator(rng)
    u = gen.random(size=size)
    idx = np.searchsorted(cdf, u, side="right")
    idx = np.minimum(idx, weights.size - 1)
    return int(idx) if size is None else idx


@dataclass(frozen=True)
class RngStream:
    """Value object naming one reproducible random sequence.

    A stream is identified by ``(master_seed, stream_index)`` plus an
    optional ``path`` of child indices for nested loops (replications that
    spawn bootstrap resamples, and so on).  Two streams with equal fields
    always generate identical draws; streams differing in any field are
    statistically independent.  ``generator()`` builds a fresh generator
    positioned at the start of the sequence each time it is called.
    """

    master_seed: int
    stream_index: int = 0
    path: tuple = ()

    def child(self, index):
        return RngStream(self.master_seed, self.stream_index, (*self.path, int(index)))

    def generator(self):
        seq = np.random.SeedSequence(
            self.master_seed, spawn_key=(self.stream_index, *self.path)
        )
        return np.random.default_rng(seq)


def as_generator(rng):
    """Accept an :class:`RngStream` or a ``numpy.random.Generator``."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise DomainError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")
