"""Equicorrelated multivariate normal rows.

Each of ``n`` independent rows holds ``q`` exchangeable coordinates with
common mean ``mu``, variance ``sigma2`` and correlation ``rho``.  The
pairwise log likelihood sums the bivariate normal log densities over all
unordered coordinate pairs within each row; rows are the exchangeable units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from ..errors import DomainError
from ..numerics import as_generator
from .base import ScoreModel

__all__ = [
    "MvnParams",
    "simulate_equicorr",
    "pl_mvn",
    "mvn_unit_score",
    "mvn_full_loglik",
    "mvn_full_mle",
    "MvnModel",
]


@dataclass(frozen=True)
class MvnParams:
    """Parameters ``(mu, sigma2, rho)`` of a row of width ``q``."""

    mu: float
    sigma2: float
    rho: float
    q: int

    def __post_init__(self):
        if int(self.q) != self.q or self.q < 1:
            raise DomainError(f"row width q must be a positive integer, got {self.q}")
        if not self.sigma2 > 0:
            raise DomainError(f"sigma2 must be positive, got {self.sigma2}")
        lo = rho_lower(self.q)
        if not lo < self.rho < 1:
            raise DomainError(f"rho must lie in ({lo}, 1) for q={self.q}, got {self.rho}")

    @property
    def theta(self):
        return np.array([self.mu, self.sigma2, self.rho])


def rho_lower(q):
    """Lower edge of the valid correlation range for row width ``q``."""
    return -1.0 / (q - 1) if q > 1 else -1.0


def _validate_rows(data, q=None):
    rows = np.asarray(data, dtype=float)
    if rows.ndim != 2:
        raise DomainError(f"row sample must be 2-d, got shape {rows.shape}")
    if q is not None and rows.shape[1] != q:
        raise DomainError(f"expected rows of width {q}, got {rows.shape[1]}")
    if not np.all(np.isfinite(rows)):
        raise DomainError("row sample has non-finite entries")
    return rows


def simulate_equicorr(params, n, rng):
    """Draw ``n`` independent equicorrelated rows.

    Uses the rank-one construction ``x = sqrt(1-rho) z + a (sum z) 1`` with
    ``a = (sqrt(1-rho+q rho) - sqrt(1-rho)) / q``, which has unit variance
    and pairwise correlation ``rho`` exactly.
    """
    if n < 1:
        raise DomainError(f"need at least one row, got {n}")
    gen = as_generator(rng)
    q = params.q
    z = gen.standard_normal((n, q))
    root = math.sqrt(1.0 - params.rho)
    a = (math.sqrt(1.0 - params.rho + q * params.rho) - root) / q
    x = root * z + a * z.sum(axis=1, keepdims=True)
    return params.mu + math.sqrt(params.sigma2) * x


def _row_stats(params, rows):
    centered = rows - params.mu
    t = centered.sum(axis=1)
    s2 = (centered**2).sum(axis=1)
    return t, s2


def pl_mvn(params, data):
    """Pairwise log likelihood of the row sample (2*pi constants dropped)."""
    if params.q < 2:
        raise DomainError("pairwise likelihood needs rows of width q >= 2")
    rows = _validate_rows(data, params.q)
    q, rho, sigma2 = params.q, params.rho, params.sigma2
    t, s2 = _row_stats(params, rows)
    quad = (q - 1 + rho) * s2 - rho * t**2
    n = rows.shape[0]
    const = -0.5 * n * q * (q - 1) * (math.log(sigma2) + 0.5 * math.log(1 - rho**2))
    return float(const - quad.sum() / (2.0 * sigma2 * (1 - rho**2)))


def _score_rows(params, rows):
    q, rho, sigma2 = params.q, params.rho, params.sigma2
    t, s2 = _row_stats(params, rows)
    one_m = 1.0 - rho**2
    quad = (q - 1 + rho) * s2 - rho * t**2
    d_mu = (q - 1) * t / (sigma2 * (1 + rho))
    d_sigma2 = -q * (q - 1) / (2.0 * sigma2) + quad / (2.0 * sigma2**2 * one_m)
    d_rho = q * (q - 1) * rho / (2.0 * one_m) - (
        (s2 - t**2) * one_m + 2.0 * rho * quad
    ) / (2.0 * sigma2 * one_m**2)
    return np.column_stack([d_mu, d_sigma2, d_rho])


def mvn_unit_score(params, data, i):
    """Gradient contribution of row ``i`` (0-based) to the pairwise score."""
    rows = _validate_rows(data, params.q)
    if not 0 <= i < rows.shape[0]:
        raise DomainError(f"row index {i} out of range for {rows.shape[0]} rows")
    return _score_rows(params, rows[i : i + 1])[0]


def mvn_full_loglik(params, data):
    """Exact joint normal log likelihood of the row sample."""
    rows = _validate_rows(data, params.q)
    q, rho, sigma2 = params.q, params.rho, params.sigma2
    t, s2 = _row_stats(params, rows)
    logdet = (
        q * math.log(sigma2)
        + (q - 1) * math.log(1 - rho)
        + math.log(1 + (q - 1) * rho)
    )
    quad = (s2 - rho * t**2 / (1 + (q - 1) * rho)) / (sigma2 * (1 - rho))
    n = rows.shape[0]
    return float(-0.5 * (n * q * math.log(2 * math.pi) + n * logdet + quad.sum()))


def mvn_full_mle(data):
    """Closed-form joint maximum likelihood estimate.

    The likelihood separates in ``(A, B) = (sigma2 (1-rho), sigma2 (1+(q-1) rho))``
    once ``mu`` is the grand mean, giving explicit estimators.  Estimates on
    the boundary are nudged strictly inside the domain.
    """
    rows = _validate_rows(data)
    n, q = rows.shape
    mu = float(rows.mean())
    centered = rows - mu
    t = centered.sum(axis=1)
    s2 = (centered**2).sum(axis=1)
    if q == 1:
        return MvnParams(mu, max(float(s2.mean()), 1e-12), 0.0, q)
    a_hat = float((s2 - t**2 / q).sum() / (n * (q - 1)))
    b_hat = float((t**2 / q).sum() / n)
    sigma2 = ((q - 1) * a_hat + b_hat) / q
    sigma2 = max(sigma2, 1e-12)
    rho = 1.0 - a_hat / sigma2
    lo = rho_lower(q)
    rho = min(max(rho, lo + 1e-6 * (1 - lo)), 1.0 - 1e-6)
    return MvnParams(mu, sigma2, rho, q)


class MvnModel(ScoreModel):
    """Equicorrelated MVN rows as a :class:`ScoreModel`.

    Units are rows, the estimating system is the exact pairwise score, and
    ``simulate`` takes the number of rows as its shape.
    """

    param_names = ("mu", "sigma2", "rho")
    unit_kind = "row"

    def __init__(self, q):
        if int(q) != q or q < 2:
            raise DomainError(f"row width q must be an integer >= 2, got {q}")
        self.q = int(q)

    def _params(self, theta):
        return MvnParams(float(theta[0]), float(theta[1]), float(theta[2]), self.q)

    def in_domain(self, theta):
        return bool(theta[1] > 0 and rho_lower(self.q) < theta[2] < 1)

    def domain_probe(self):
        return np.array([0.0, 1.0, 0.0])

    def to_internal(self, theta):
        lo = rho_lower(self.q)
        rho = theta[2]
        return np.array(
            [theta[0], math.log(theta[1]), math.log((rho - lo) / (1.0 - rho))]
        )

    def from_internal(self, eta):
        lo = rho_lower(self.q)
        rho = lo + (1.0 - lo) * special.expit(eta[2])
        return np.array([eta[0], math.exp(eta[1]), rho])

    def units(self, data):
        return _validate_rows(data, self.q)

    def n_units(self, units):
        return units.shape[0]

    def resample(self, units, indices):
        return units[np.asarray(indices, dtype=int)]

    def unit_scores(self, theta, units):
        return _score_rows(self._params(theta), units)

    def pairwise_loglik(self, theta, units):
        return pl_mvn(self._params(theta), units)

    def simulate(self, theta, shape, rng):
        return simulate_equicorr(self._params(theta), int(shape), rng)

    def default_start(self, units):
        return mvn_full_mle(units).theta

    # Full-likelihood benchmark used by the likelihood ratio statistic.
    has_full_loglik = True

    def full_loglik(self, theta, data):
        return mvn_full_loglik(self._params(theta), self.units(data))

    def fit_full(self, data):
        return mvn_full_mle(self.units(data)).theta
