"""Gaussian random field on a square lattice, scored through anchored
within-block pairs.

The field has mean zero and exponential covariogram
``sigma2 * exp(-3 ||h|| / phi)``.  The lattice is cut into disjoint square
blocks of side ``block_side``; each block contributes one exchangeable unit
made of the pairs joining its top-left anchor site to every other site in
the block (an anchor star).  Trailing rows and columns that do not fill a
block are unused.

The pairwise log likelihood uses the working conditionals
``y_j | y_k ~ N(rho_jk y_k, sigma2)``.  The estimating system standardizes
each residual by its model-implied standard deviation
``sigma * sqrt(1 - rho_jk^2)`` so that the scale equation is unbiased at the
model, which the working-likelihood gradient is not.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import DomainError, NotPositiveDefinite
from ..numerics import as_generator, cholesky_spd
from .base import ScoreModel
from .robust import CLASSICAL, RobustTuning, huber_psi

__all__ = [
    "GeoParams",
    "BlockPartition",
    "GeoUnits",
    "exp_cov",
    "block_partition",
    "default_block_side",
    "simulate_grf",
    "pl_geostat",
    "geo_unit_score",
    "GeostatModel",
]

MAX_LATTICE_SIDE = 80


@dataclass(frozen=True)
class GeoParams:
    """Parameters ``(sigma2, phi)`` of the exponential covariogram."""

    sigma2: float
    phi: float

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise DomainError(f"sigma2 must be positive, got {self.sigma2}")
        if not self.phi > 0:
            raise DomainError(f"phi must be positive, got {self.phi}")

    @property
    def theta(self):
        return np.array([self.sigma2, self.phi])


def exp_cov(params, h):
    """Covariance ``sigma2 * exp(-3 d / phi)`` at lag ``h``.

    ``h`` may be a lag vector (its Euclidean norm is used) or a nonnegative
    scalar distance.
    """
    h = np.asarray(h, dtype=float)
    d = float(np.linalg.norm(h)) if h.ndim > 0 else float(abs(h))
    return params.sigma2 * math.exp(-3.0 * d / params.phi)


def default_block_side(phi):
    """Block side ``1 + l`` with ``l`` the smallest integer covering the
    effective range ``phi * ln(20) / 3``."""
    return 1 + math.ceil(phi * math.log(20.0) / 3.0)


@dataclass(frozen=True)
class BlockPartition:
    """Anchor-star decomposition of a ``q x q`` lattice.

    ``anchor_flat[u]`` is the row-major site index of block ``u``'s anchor,
    ``other_flat[u]`` the indices of its remaining sites in row-major order,
    and ``dist[u]`` the matching anchor-to-site distances.  Blocks are
    ordered row-major over the block grid.
    """

    q: int
    block_side: int
    n_blocks: int
    anchor_flat: np.ndarray
    other_flat: np.ndarray
    dist: np.ndarray

    @property
    def pairs_per_block(self):
        return self.block_side**2 - 1


def block_partition(q, block_side):
    """Partition the lattice into disjoint anchor-star blocks."""
    if int(q) != q or q < 2:
        raise DomainError(f"lattice side q must be an integer >= 2, got {q}")
    if q > MAX_LATTICE_SIDE:
        raise DomainError(f"lattice side q is capped at {MAX_LATTICE_SIDE}, got {q}")
    if int(block_side) != block_side or block_side < 2:
        raise DomainError(f"block side must be an integer >= 2, got {block_side}")
    q, block_side = int(q), int(block_side)
    per_axis = q // block_side
    if per_axis < 1:
        raise DomainError(f"block side {block_side} exceeds lattice side {q}")
    offsets = [(r, c) for r in range(block_side) for c in range(block_side)][1:]
    offset_arr = np.array(offsets, dtype=float)
    base_dist = np.hypot(offset_arr[:, 0], offset_arr[:, 1])
    anchors = []
    others = []
    for br in range(per_axis):
        for bc in range(per_axis):
            r0, c0 = br * block_side, bc * block_side
            anchors.append(r0 * q + c0)
            others.append([(r0 + dr) * q + (c0 + dc) for dr, dc in offsets])
    n_blocks = per_axis**2
    return BlockPartition(
        q=q,
        block_side=block_side,
        n_blocks=n_blocks,
        anchor_flat=np.array(anchors, dtype=int),
        other_flat=np.array(others, dtype=int),
        dist=np.tile(base_dist, (n_blocks, 1)),
    )


@dataclass(frozen=True)
class GeoUnits:
    """Per-block pair data: star values ``yj``, anchor values ``yk``, distances."""

    yj: np.ndarray
    yk: np.ndarray
    dist: np.ndarray

    def take(self, indices):
        idx = np.asarray(indices, dtype=int)
        return GeoUnits(self.yj[idx], self.yk[idx], self.dist[idx])

    @property
    def n_blocks(self):
        return self.yj.shape[0]


def _field_to_units(field, partition):
    field = np.asarray(field, dtype=float)
    if field.shape != (partition.q, partition.q):
        raise DomainError(
            f"field must be {partition.q} x {partition.q}, got shape {field.shape}"
        )
    if not np.all(np.isfinite(field)):
        raise DomainError("field has non-finite entries")
    flat = field.reshape(-1)
    yk = np.repeat(
        flat[partition.anchor_flat][:, None], partition.pairs_per_block, axis=1
    )
    yj = flat[partition.other_flat]
    return GeoUnits(yj=yj, yk=yk, dist=partition.dist)


@functools.lru_cache(maxsize=8)
def _correlation_cholesky(q, phi):
    coords = np.indices((q, q)).reshape(2, -1).T.astype(float)
    corr = np.exp(-3.0 * cdist(coords, coords) / phi)
    try:
        lower = cholesky_spd(corr)
    except NotPositiveDefinite:
        # Exponential correlation is positive definite in exact arithmetic;
        # a one-shot jitter absorbs roundoff on large lattices.
        lower = cholesky_spd(corr + 1e-10 * np.eye(corr.shape[0]))
    lower.setflags(write=False)
    return lower


def simulate_grf(params, q, rng):
    """Draw one mean-zero field on the ``q x q`` lattice."""
    if int(q) != q or q < 2:
        raise DomainError(f"lattice side q must be an integer >= 2, got {q}")
    if q > MAX_LATTICE_SIDE:
        raise DomainError(f"lattice side q is capped at {MAX_LATTICE_SIDE}, got {q}")
    gen = as_generator(rng)
    lower = _correlation_cholesky(int(q), float(params.phi))
    z = gen.standard_normal(q * q)
    return (math.sqrt(params.sigma2) * (lower @ z)).reshape(q, q)


def _pair_quantities(params, units):
    rho = np.exp(-3.0 * units.dist / params.phi)
    resid = units.yj - rho * units.yk
    drho = (3.0 * units.dist / params.phi**2) * rho
    return rho, resid, drho


def pl_geostat(params, field, partition):
    """Working-conditional pairwise log likelihood over all block pairs
    (2*pi constants dropped)."""
    units = field if isinstance(field, GeoUnits) else _field_to_units(field, partition)
    return _pl_units(params, units)


def _pl_units(params, units):
    _, resid, _ = _pair_quantities(params, units)
    n_pairs = resid.size
    return float(
        -0.5 * n_pairs * math.log(params.sigma2)
        - (resid**2).sum() / (2.0 * params.sigma2)
    )


def _unit_scores(params, units, tuning):
    rho, resid, drho = _pair_quantities(params, units)
    sd = np.sqrt(params.sigma2 * (1.0 - rho**2))
    r = resid / sd
    scale_rows = (huber_psi(r, tuning.c) ** 2 - tuning.beta_c).sum(axis=1)
    range_rows = (huber_psi(r, tuning.a) * huber_psi(units.yk, tuning.b) * drho).sum(axis=1)
    return np.column_stack([scale_rows, range_rows])


def _unit_gradients(params, units):
    _, resid, drho = _pair_quantities(params, units)
    v = params.sigma2
    d_sigma2 = (resid**2 / (2.0 * v**2) - 0.5 / v).sum(axis=1)
    d_phi = (resid * units.yk * drho / v).sum(axis=1)
    return np.column_stack([d_sigma2, d_phi])


def geo_unit_score(params, field, partition, u, tuning=CLASSICAL):
    """Estimating-function row of block ``u`` (0-based, row-major blocks)."""
    units = _field_to_units(field, partition)
    if not 0 <= u < partition.n_blocks:
        raise DomainError(f"block index {u} out of range for {partition.n_blocks} blocks")
    return _unit_scores(params, units.take([u]), tuning)[0]


class GeostatModel(ScoreModel):
    """Anchor-star lattice estimating system as a :class:`ScoreModel`.

    ``simulate`` takes the lattice side (must equal the partition's) as its
    shape.  Blocks are the exchangeable units.
    """

    param_names = ("sigma2", "phi")
    unit_kind = "block"

    def __init__(self, q, block_side, tuning=CLASSICAL):
        if not isinstance(tuning, RobustTuning):
            raise DomainError("tuning must be a RobustTuning")
        self.partition = block_partition(q, block_side)
        self.q = self.partition.q
        self.tuning = tuning

    def _params(self, theta):
        return GeoParams(float(theta[0]), float(theta[1]))

    def in_domain(self, theta):
        return bool(theta[0] > 0 and theta[1] > 0)

    def domain_probe(self):
        return np.array([1.0, max(1.0, self.partition.block_side / 2.0)])

    def to_internal(self, theta):
        return np.array([math.log(theta[0]), math.log(theta[1])])

    def from_internal(self, eta):
        return np.array([math.exp(eta[0]), math.exp(eta[1])])

    def units(self, data):
        if isinstance(data, GeoUnits):
            return data
        return _field_to_units(data, self.partition)

    def n_units(self, units):
        return units.n_blocks

    def resample(self, units, indices):
        return units.take(indices)

    def unit_scores(self, theta, units):
        return _unit_scores(self._params(theta), units, self.tuning)

    def unit_gradients(self, theta, units):
        return _unit_gradients(self._params(theta), units)

    def pairwise_loglik(self, theta, units):
        return _pl_units(self._params(theta), units)

    def simulate(self, theta, shape, rng):
        if int(shape) != self.q:
            raise DomainError(f"shape {shape} does not match the partition side {self.q}")
        return simulate_grf(self._params(theta), self.q, rng)

    def default_start(self, units):
        values = np.concatenate([units.yj.ravel(), units.yk.ravel()])
        sigma2 = max(float((values**2).mean()), 1e-12)
        d_min = float(units.dist.min())
        near = units.dist <= d_min + 1e-9
        denom = float((units.yk[near] ** 2).sum())
        rho_hat = float((units.yj[near] * units.yk[near]).sum() / denom) if denom > 0 else 0.3
        rho_hat = min(max(rho_hat, 0.02), 0.98)
        phi = -3.0 * d_min / math.log(rho_hat)
        # Ranges beyond the lattice extent are not resolvable from
        # within-block pairs; keep the pilot inside the identifiable region.
        phi = min(max(phi, 0.1), 1.5 * self.q)
        return np.array([sigma2, phi])
