"""Shared oracles and stub models for the test suite.

Everything here is deliberately independent of the package internals: finite
differences are coded directly, the brute-force minimizers use golden-section
search, and the equicorrelated-row moments come from hand-derived closed
forms.  Tests compare package output against these, not the other way round.
"""

from __future__ import annotations

import math

import numpy as np

from pairsaddle.models.base import ScoreModel


# ---------------------------------------------------------------------------
# finite differences


def fd_gradient(func, theta, step=1e-6):
    """Central-difference gradient of a scalar function, O(step^2)."""
    theta = np.asarray(theta, dtype=float)
    grad = np.empty(theta.size)
    for j in range(theta.size):
        h = step * max(1.0, abs(theta[j]))
        tp = theta.copy()
        tm = theta.copy()
        tp[j] += h
        tm[j] -= h
        grad[j] = (func(tp) - func(tm)) / (2.0 * h)
    return grad


# ---------------------------------------------------------------------------
# brute-force one-dimensional minimizer


def golden_minimum(func, lo, hi, tol=1e-13, max_iter=400):
    """Golden-section minimizer of a unimodal function on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = float(lo), float(hi)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = func(c), func(d)
    for _ in range(max_iter):
        if b - a < tol * max(1.0, abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = func(d)
    x = 0.5 * (a + b)
    return x, func(x)


def bracket_minimum(func, x0=0.0, step=0.5, grow=2.0, max_iter=200):
    """Expand a bracket [lo, hi] containing a minimum of a convex function."""
    lo, hi = x0 - step, x0 + step
    flo, f0, fhi = func(lo), func(x0), func(hi)
    for _ in range(max_iter):
        if f0 <= flo and f0 <= fhi:
            return lo, hi
        if flo < fhi:
            lo, x0, f0 = lo - grow * (hi - lo), lo, flo
            flo = func(lo)
        else:
            x0, f0, hi = hi, fhi, hi + grow * (hi - lo)
            fhi = func(hi)
    raise RuntimeError("failed to bracket a minimum")


# ---------------------------------------------------------------------------
# equicorrelated-row closed forms (hand-derived; used as matrix oracles)
#
# For one row y of length q with common mean mu, variance sigma2 and
# correlation rho, write t = sum_j (y_j - mu), and with w = y - mu let
# s2 = sum_j (w_j - mean(w))^2 + t^2/q ... concretely the per-row unit score
# of the pairwise likelihood is an affine function of (t, t^2, s2) where
# s2 = sum_j w_j^2.  The moments of (t, t^2, s2) under the model follow from
# normal theory of the exchangeable covariance structure.


def equicorr_stat_moments(theta, q):
    """Mean and covariance of (t, t^2, s2) for one centered row at theta."""
    sigma2, rho = theta[1], theta[2]
    vt = q * sigma2 * (1.0 + (q - 1) * rho)
    a = sigma2 * (1.0 - rho)
    mean = np.array([0.0, vt, vt / q + (q - 1) * a])
    cov = np.array(
        [
            [vt, 0.0, 0.0],
            [0.0, 2 * vt**2, 2 * vt**2 / q],
            [0.0, 2 * vt**2 / q, 2 * vt**2 / q**2 + 2 * (q - 1) * a**2],
        ]
    )
    return mean, cov


def equicorr_score_map(theta_eval, q):
    """Unit score = const + L @ (t, t^2, s2) at theta_eval (data centered
    at the evaluation mean).  Rows of L are the (mu, sigma2, rho) components."""
    sigma2, rho = theta_eval[1], theta_eval[2]
    one_m = 1.0 - rho**2
    c_mu = (q - 1) / (sigma2 * (1 + rho))
    a1 = 1.0 / (2 * sigma2**2 * one_m)
    const = np.array(
        [
            0.0,
            -q * (q - 1) / (2 * sigma2),
            q * (q - 1) * rho / (2 * one_m),
        ]
    )
    lmat = np.array(
        [
            [c_mu, 0.0, 0.0],
            [0.0, -rho * a1, (q - 1 + rho) * a1],
            [
                0.0,
                (one_m + 2 * rho**2) / (2 * sigma2 * one_m**2),
                -(one_m + 2 * rho * (q - 1 + rho)) / (2 * sigma2 * one_m**2),
            ],
        ]
    )
    return const, lmat


def equicorr_expected_j(theta, q):
    """Exact per-row score covariance of the equicorrelated pairwise system."""
    _, lmat = equicorr_score_map(theta, q)
    _, cov = equicorr_stat_moments(theta, q)
    return lmat @ cov @ lmat.T


def equicorr_mean_score(theta_eval, theta_true, q):
    """Exact E_theta_true[unit score at theta_eval], including the mean shift."""
    dm = theta_true[0] - theta_eval[0]
    vt_t = q * theta_true[1] * (1 + (q - 1) * theta_true[2])
    a_t = theta_true[1] * (1 - theta_true[2])
    et = q * dm
    et2 = vt_t + q**2 * dm**2
    es2 = vt_t / q + (q - 1) * a_t + q * dm**2
    const, lmat = equicorr_score_map(theta_eval, q)
    return const + lmat @ np.array([et, et2, es2])


def equicorr_expected_h(theta, q, step=1e-6):
    """Exact sensitivity matrix: -d/dtheta' E[score(theta')] at theta."""
    theta = np.asarray(theta, dtype=float)
    h = np.zeros((3, 3))
    for j in range(3):
        hj = step * max(1.0, abs(theta[j]))
        tp = theta.copy()
        tm = theta.copy()
        tp[j] += hj
        tm[j] -= hj
        h[:, j] = -(equicorr_mean_score(tp, theta, q) - equicorr_mean_score(tm, theta, q)) / (
            2 * hj
        )
    return 0.5 * (h + h.T)


# ---------------------------------------------------------------------------
# reparametrized model views


class LinearMapModel(ScoreModel):
    """A model under the linear reparametrization whose unit scores are the
    base scores mapped by a fixed invertible matrix ``a``.

    With eta the new parameter and theta = a.T @ eta, the chain rule gives
    score rows s' = s @ a.T and the pairwise log likelihood is unchanged
    pointwise, which is exactly the transformation the invariance statements
    quantify over.
    """

    def __init__(self, base, a_mat):
        self.base = base
        self.a_mat = np.asarray(a_mat, dtype=float)
        if self.a_mat.shape != (base.p, base.p):
            raise ValueError("map must be square of the base dimension")
        self.a_inv_t = np.linalg.inv(self.a_mat).T
        self.param_names = tuple(f"eta{i + 1}" for i in range(base.p))
        self.unit_kind = base.unit_kind

    def to_view(self, theta):
        return self.a_inv_t @ np.asarray(theta, dtype=float)

    def to_base(self, eta):
        return self.a_mat.T @ np.asarray(eta, dtype=float)

    # identity internal coordinates: the view is only evaluated, never fitted
    def in_domain(self, eta):
        return self.base.in_domain(self.to_base(eta))

    def domain_probe(self):
        return self.to_view(self.base.domain_probe())

    def to_internal(self, eta):
        return np.asarray(eta, dtype=float)

    def from_internal(self, eta):
        return np.asarray(eta, dtype=float)

    def units(self, data):
        return self.base.units(data)

    def n_units(self, units):
        return self.base.n_units(units)

    def resample(self, units, indices):
        return self.base.resample(units, indices)

    def unit_scores(self, eta, units):
        return self.base.unit_scores(self.to_base(eta), units) @ self.a_mat.T

    def unit_gradients(self, eta, units):
        return self.base.unit_gradients(self.to_base(eta), units) @ self.a_mat.T

    def pairwise_loglik(self, eta, units):
        return self.base.pairwise_loglik(self.to_base(eta), units)

    def simulate(self, eta, shape, rng):
        return self.base.simulate(self.to_base(eta), shape, rng)

    def default_start(self, units):
        return self.to_view(self.base.default_start(units))


class MvnTanhLogModel(ScoreModel):
    """Equicorrelated model in (mu, log sigma2, atanh rho) coordinates.

    A smooth nonlinear bijection with diagonal Jacobian
    diag(1, sigma2, 1 - rho^2); unit scores pick up that factor pointwise.
    """

    param_names = ("mu", "log_sigma2", "atanh_rho")

    def __init__(self, base):
        self.base = base
        self.unit_kind = base.unit_kind

    @staticmethod
    def to_base(eta):
        return np.array([eta[0], math.exp(eta[1]), math.tanh(eta[2])])

    @staticmethod
    def to_view(theta):
        return np.array([theta[0], math.log(theta[1]), math.atanh(theta[2])])

    @staticmethod
    def jac_diag(eta):
        return np.array([1.0, math.exp(eta[1]), 1.0 - math.tanh(eta[2]) ** 2])

    def in_domain(self, eta):
        return bool(np.all(np.isfinite(eta))) and self.base.in_domain(self.to_base(eta))

    def domain_probe(self):
        return self.to_view(self.base.domain_probe())

    def to_internal(self, eta):
        return np.asarray(eta, dtype=float)

    def from_internal(self, eta):
        return np.asarray(eta, dtype=float)

    def units(self, data):
        return self.base.units(data)

    def n_units(self, units):
        return self.base.n_units(units)

    def resample(self, units, indices):
        return self.base.resample(units, indices)

    def unit_scores(self, eta, units):
        return self.base.unit_scores(self.to_base(eta), units) * self.jac_diag(eta)

    def unit_gradients(self, eta, units):
        return self.base.unit_gradients(self.to_base(eta), units) * self.jac_diag(eta)

    def pairwise_loglik(self, eta, units):
        return self.base.pairwise_loglik(self.to_base(eta), units)

    def simulate(self, eta, shape, rng):
        return self.base.simulate(self.to_base(eta), shape, rng)

    def default_start(self, units):
        return self.to_view(self.base.default_start(units))


# ---------------------------------------------------------------------------
# stub models


class LocationModel(ScoreModel):
    """One-parameter normal location system: unit score rows are x_i - theta.

    Small enough that every downstream quantity is known in closed form
    (theta_hat is the sample mean, the pairwise log likelihood is the usual
    Gaussian one with unit variance).
    """

    param_names = ("loc",)
    unit_kind = "point"

    def in_domain(self, theta):
        return True

    def domain_probe(self):
        return np.zeros(1)

    def to_internal(self, theta):
        return np.asarray(theta, dtype=float)

    def from_internal(self, eta):
        return np.asarray(eta, dtype=float)

    def units(self, data):
        return np.atleast_1d(np.asarray(data, dtype=float))

    def n_units(self, units):
        return int(units.size)

    def resample(self, units, indices):
        return units[np.asarray(indices, dtype=int)]

    def unit_scores(self, theta, units):
        return (units - theta[0]).reshape(-1, 1)

    def pairwise_loglik(self, theta, units):
        return float(-0.5 * np.sum((units - theta[0]) ** 2))

    def simulate(self, theta, shape, rng):
        gen = rng.generator()
        return theta[0] + gen.standard_normal(int(shape))

    def default_start(self, units):
        return np.array([float(np.mean(units))])


class FixedResampleModel(LocationModel):
    """Location model whose resampling always returns one fixed dataset.

    Models the degenerate-tilt limit where the resampling distribution is a
    point mass, so every bootstrap replicate is identical.
    """

    def __init__(self, fixed_units):
        self.fixed_units = np.atleast_1d(np.asarray(fixed_units, dtype=float))

    def resample(self, units, indices):
        return self.fixed_units.copy()


class HullBreakResampleModel(LocationModel):
    """Location model whose resamples always violate the hull condition.

    Resampling returns units strictly above the null value, so the tilting
    step of every bootstrap replicate fails.
    """

    def __init__(self, theta0_value):
        self.theta0_value = float(theta0_value)

    def resample(self, units, indices):
        return self.theta0_value + 1.0 + np.abs(units)


class TwoSystemModel(ScoreModel):
    """One-parameter stub with hand-picked score matrices at two points.

    ``unit_scores`` returns ``null_rows`` at theta = 0 and ``fit_rows`` at
    theta = 1, letting tests drive the saddlepoint statistic with exactly
    the score configurations of the closed-form fixtures.
    """

    param_names = ("theta",)
    unit_kind = "point"

    def __init__(self, null_rows, fit_rows):
        self.null_rows = np.asarray(null_rows, dtype=float).reshape(-1, 1)
        self.fit_rows = np.asarray(fit_rows, dtype=float).reshape(-1, 1)

    def in_domain(self, theta):
        return True

    def domain_probe(self):
        return np.zeros(1)

    def to_internal(self, theta):
        return np.asarray(theta, dtype=float)

    def from_internal(self, eta):
        return np.asarray(eta, dtype=float)

    def units(self, data):
        return np.atleast_1d(np.asarray(data, dtype=float))

    def n_units(self, units):
        return int(self.null_rows.shape[0])

    def resample(self, units, indices):
        return units

    def unit_scores(self, theta, units):
        if abs(float(theta[0]) - 1.0) < 1e-12:
            return self.fit_rows.copy()
        return self.null_rows.copy()

    def pairwise_loglik(self, theta, units):
        return 0.0

    def simulate(self, theta, shape, rng):
        return np.zeros(int(shape))

    def default_start(self, units):
        return np.ones(1)
