"""First-order autoregression scored through adjacent conditional pairs.

A length-``q`` series contributes ``q - 1`` exchangeable units, the adjacent
pairs ``(y_{j-1}, y_j)``.  The pairwise log likelihood is the sum of the
conditional normal terms, and the estimating system is either its exact
gradient (classical tuning) or a bounded version clipping the standardized
residual, the conditioning value, and the squared residual of the scale
equation (Mallows-style slope, Huber Proposal 2 scale).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from ..errors import DomainError
from ..numerics import as_generator
from .base import ScoreModel
from .robust import CLASSICAL, RobustTuning, huber_psi

__all__ = [
    "Ar1Params",
    "ContaminationSpec",
    "simulate_ar1",
    "pl_ar1",
    "ar1_unit_score",
    "ar1_full_loglik",
    "ar1_full_mle",
    "Ar1Model",
]


@dataclass(frozen=True)
class Ar1Params:
    """Parameters ``(phi0, phi1, sigma2)`` of a stationary AR(1)."""

    phi0: float
    phi1: float
    sigma2: float

    def __post_init__(self):
        if not abs(self.phi1) < 1:
            raise DomainError(f"phi1 must lie in (-1, 1), got {self.phi1}")
        if not self.sigma2 > 0:
            raise DomainError(f"sigma2 must be positive, got {self.sigma2}")

    @property
    def theta(self):
        return np.array([self.phi0, self.phi1, self.sigma2])

    @property
    def mean(self):
        return self.phi0 / (1.0 - self.phi1)


@dataclass(frozen=True)
class ContaminationSpec:
    """Additive-outlier mixture for the innovation sequence.

    Each innovation gains an independent ``N(mu_u, sigma2_u)`` shock with
    probability ``xi``; outliers enter the recursion and therefore
    propagate forward.
    """

    xi: float
    mu_u: float
    sigma2_u: float

    def __post_init__(self):
        if not 0.0 <= self.xi <= 1.0:
            raise DomainError(f"xi must lie in [0, 1], got {self.xi}")
        if self.sigma2_u < 0:
            raise DomainError(f"sigma2_u must be nonnegative, got {self.sigma2_u}")


def _validate_series(data):
    series = np.asarray(data, dtype=float)
    if series.ndim != 1 or series.size < 2:
        raise DomainError(f"series must be 1-d with at least 2 values, got shape {series.shape}")
    if not np.all(np.isfinite(series)):
        raise DomainError("series has non-finite entries")
    return series


def _as_pairs(data):
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 2:
        if not np.all(np.isfinite(arr)):
            raise DomainError("pair units have non-finite entries")
        return arr
    series = _validate_series(arr)
    return np.column_stack([series[:-1], series[1:]])


def simulate_ar1(params, q, rng, contamination=None):
    """Simulate a length-``q`` series, optionally with additive outliers.

    The first value is drawn from the clean stationary law; outliers only
    enter the innovations of the recursion.
    """
    if q < 2:
        raise DomainError(f"series length must be at least 2, got {q}")
    gen = as_generator(rng)
    sd = math.sqrt(params.sigma2)
    y = np.empty(q)
    y[0] = params.mean + sd / math.sqrt(1.0 - params.phi1**2) * gen.standard_normal()
    shocks = sd * gen.standard_normal(q - 1)
    if contamination is not None and contamination.xi > 0:
        hit = gen.random(q - 1) < contamination.xi
        outliers = contamination.mu_u + math.sqrt(contamination.sigma2_u) * gen.standard_normal(q - 1)
        shocks = shocks + np.where(hit, outliers, 0.0)
    for j in range(1, q):
        y[j] = params.phi0 + params.phi1 * y[j - 1] + shocks[j - 1]
    return y


def pl_ar1(params, data):
    """Sum of conditional normal log densities over adjacent pairs
    (2*pi constants dropped)."""
    pairs = _as_pairs(data)
    resid = pairs[:, 1] - params.phi0 - params.phi1 * pairs[:, 0]
    m = pairs.shape[0]
    return float(-0.5 * m * math.log(params.sigma2) - (resid**2).sum() / (2.0 * params.sigma2))


def _unit_scores(params, pairs, tuning):
    x = pairs[:, 0]
    y = pairs[:, 1]
    sd = math.sqrt(params.sigma2)
    r = (y - params.phi0 - params.phi1 * x) / sd
    psi_r = huber_psi(r, tuning.a)
    slope = psi_r * huber_psi(x, tuning.b)
    scale = huber_psi(r, tuning.c) ** 2 - tuning.beta_c
    return np.column_stack([psi_r, slope, scale])


def _unit_gradients(params, pairs):
    x = pairs[:, 0]
    y = pairs[:, 1]
    v = params.sigma2
    e = y - params.phi0 - params.phi1 * x
    return np.column_stack([e / v, e * x / v, e**2 / (2.0 * v**2) - 0.5 / v])


def ar1_unit_score(params, series, j, tuning=CLASSICAL):
    """Estimating-function row of the pair ``(y_{j-1}, y_j)``, ``2 <= j <= q``
    with 1-based observation indices."""
    series = _validate_series(series)
    q = series.size
    if not 2 <= j <= q:
        raise DomainError(f"pair index j must satisfy 2 <= j <= {q}, got {j}")
    pair = np.array([[series[j - 2], series[j - 1]]])
    return _unit_scores(params, pair, tuning)[0]


def ar1_full_loglik(params, series):
    """Exact stationary Gaussian log likelihood of the series."""
    series = _validate_series(series)
    var0 = params.sigma2 / (1.0 - params.phi1**2)
    head = -0.5 * (math.log(2 * math.pi * var0) + (series[0] - params.mean) ** 2 / var0)
    resid = series[1:] - params.phi0 - params.phi1 * series[:-1]
    m = series.size - 1
    tail = -0.5 * (m * math.log(2 * math.pi * params.sigma2) + (resid**2).sum() / params.sigma2)
    return float(head + tail)


def _ols_start(pairs):
    x = pairs[:, 0]
    y = pairs[:, 1]
    xc = x - x.mean()
    denom = float((xc**2).sum())
    phi1 = float((xc * (y - y.mean())).sum() / denom) if denom > 0 else 0.0
    phi1 = min(max(phi1, -1.0 + 1e-6), 1.0 - 1e-6)
    phi0 = float(y.mean() - phi1 * x.mean())
    resid = y - phi0 - phi1 * x
    sigma2 = max(float((resid**2).mean()), 1e-12)
    return np.array([phi0, phi1, sigma2])


def ar1_full_mle(series):
    """Joint maximum likelihood estimate of the stationary AR(1).

    Maximizes the exact likelihood over unconstrained coordinates
    ``(phi0, atanh phi1, log sigma2)`` starting from least squares.
    """
    series = _validate_series(series)
    model = Ar1Model()
    start = model.to_internal(_ols_start(_as_pairs(series)))

    def negative(eta):
        theta = model.from_internal(eta)
        return -ar1_full_loglik(Ar1Params(*theta), series)

    result = optimize.minimize(negative, start, method="L-BFGS-B", options={"gtol": 1e-9})
    theta = model.from_internal(result.x)
    return Ar1Params(float(theta[0]), float(theta[1]), float(theta[2]))


class Ar1Model(ScoreModel):
    """Adjacent-pair AR(1) estimating system as a :class:`ScoreModel`.

    ``tuning`` selects the bounded system; the default is classical
    (unbounded), whose location and slope rows are the pairwise score
    rescaled by ``sigma`` and whose scale row is rescaled by ``2 sigma2``.
    ``simulate`` takes the series length as its shape and an optional
    :class:`ContaminationSpec`.
    """

    param_names = ("phi0", "phi1", "sigma2")
    unit_kind = "adjacent-pair"

    def __init__(self, tuning=CLASSICAL):
        if not isinstance(tuning, RobustTuning):
            raise DomainError("tuning must be a RobustTuning")
        self.tuning = tuning

    def _params(self, theta):
        return Ar1Params(float(theta[0]), float(theta[1]), float(theta[2]))

    def in_domain(self, theta):
        return bool(abs(theta[1]) < 1 and theta[2] > 0)

    def domain_probe(self):
        return np.array([0.0, 0.1, 1.0])

    def to_internal(self, theta):
        return np.array([theta[0], math.atanh(theta[1]), math.log(theta[2])])

    def from_internal(self, eta):
        return np.array([eta[0], math.tanh(eta[1]), math.exp(eta[2])])

    def units(self, data):
        return _as_pairs(data)

    def n_units(self, units):
        return units.shape[0]

    def resample(self, units, indices):
        return units[np.asarray(indices, dtype=int)]

    def unit_scores(self, theta, units):
        return _unit_scores(self._params(theta), units, self.tuning)

    def unit_gradients(self, theta, units):
        return _unit_gradients(self._params(theta), units)

    def pairwise_loglik(self, theta, units):
        return pl_ar1(self._params(theta), units)

    def simulate(self, theta, shape, rng, contamination=None):
        return simulate_ar1(self._params(theta), int(shape), rng, contamination)

    def default_start(self, units):
        return _ols_start(units)

    def refine_start(self, theta, units, steps=50):
        """Iteratively reweighted refinement of a stalled robust fit."""
        x = units[:, 0]
        y = units[:, 1]
        z = huber_psi(x, self.tuning.b)
        phi0, phi1, sigma2 = (float(t) for t in theta)
        for _ in range(steps):
            sd = math.sqrt(sigma2)
            r = (y - phi0 - phi1 * x) / sd
            with np.errstate(invalid="ignore", divide="ignore"):
                w = np.where(np.abs(r) > 1e-12, huber_psi(r, self.tuning.a) / r, 1.0)
            lhs = np.array([[w.sum(), (w * x).sum()], [(w * z).sum(), (w * z * x).sum()]])
            rhs = np.array([(w * y).sum(), (w * z * y).sum()])
            try:
                phi0, phi1 = np.linalg.solve(lhs, rhs)
            except np.linalg.LinAlgError:
                break
            phi1 = min(max(float(phi1), -1.0 + 1e-9), 1.0 - 1e-9)
            r = (y - phi0 - phi1 * x) / math.sqrt(sigma2)
            sigma2 = max(sigma2 * float((huber_psi(r, self.tuning.c) ** 2).mean()) / self.tuning.beta_c, 1e-12)
        return np.array([phi0, phi1, sigma2])

    # Full-likelihood benchmark used by the likelihood ratio statistic.
    has_full_loglik = True

    def full_loglik(self, theta, data):
        return ar1_full_loglik(self._params(theta), _validate_series(data))

    def fit_full(self, data):
        return ar1_full_mle(data).theta
