"""Model interface: estimating systems over exchangeable units.

A model decomposes a dataset into ``n`` exchangeable units (rows, adjacent
pairs, or spatial blocks) and evaluates per-unit estimating functions whose
rows sum to the total score.  All inference in this package (fitting,
sandwich matrices, tilting, bootstrap resampling) operates on the unit
decomposition, never on the raw dataset layout.
"""

from __future__ import annotations

import abc

import numpy as np

from ..errors import DomainError

__all__ = ["ScoreModel", "FixedParamsModel", "GradientView", "total_score", "unit_scores"]


class ScoreModel(abc.ABC):
    """Estimating system with a unit decomposition.

    Concrete models define ``param_names``, ``unit_kind`` and the abstract
    methods below.  ``unit_scores`` evaluates the active estimating system
    (robustified when the model carries finite tuning) while
    ``unit_gradients`` always returns the exact per-unit gradients of
    ``pairwise_loglik``; the two coincide whenever the estimating system is
    the plain likelihood score.
    """

    param_names: tuple = ()
    unit_kind: str = "unit"
    # All internal coordinate maps in this package act componentwise, which
    # FixedParamsModel relies on to freeze a subset of coordinates.
    componentwise_internal = True

    @property
    def p(self):
        return len(self.param_names)

    def check_theta(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.p,):
            raise DomainError(
                f"expected {self.p} parameters {self.param_names}, got shape {theta.shape}"
            )
        if not np.all(np.isfinite(theta)):
            raise DomainError("parameters must be finite")
        if not self.in_domain(theta):
            raise DomainError(f"parameters {theta} outside the model domain")
        return theta

    @abc.abstractmethod
    def in_domain(self, theta):
        """Whether ``theta`` lies in the open parameter domain."""

    @abc.abstractmethod
    def domain_probe(self):
        """Some fixed interior point of the domain, used as a filler value."""

    @abc.abstractmethod
    def to_internal(self, theta):
        """Map domain parameters to unconstrained solver coordinates."""

    @abc.abstractmethod
    def from_internal(self, eta):
        """Inverse of :meth:`to_internal`; always lands in the domain."""

    @abc.abstractmethod
    def units(self, data):
        """Normalize ``data`` into this model's unit container."""

    @abc.abstractmethod
    def n_units(self, units):
        """Number of exchangeable units."""

    @abc.abstractmethod
    def resample(self, units, indices):
        """Units selected (with repetition allowed) by integer ``indices``."""

    @abc.abstractmethod
    def unit_scores(self, theta, units):
        """Estimating-function rows, shape ``(n_units, p)``."""

    def unit_gradients(self, theta, units):
        """Per-unit gradients of :meth:`pairwise_loglik`; defaults to the scores."""
        return self.unit_scores(theta, units)

    @abc.abstractmethod
    def pairwise_loglik(self, theta, units):
        """Pairwise log likelihood, additive constants dropped."""

    @abc.abstractmethod
    def simulate(self, theta, shape, rng):
        """Draw one dataset of the given shape from the model at ``theta``."""

    @abc.abstractmethod
    def default_start(self, units):
        """Cheap in-domain starting value estimated from the units."""


class FixedParamsModel(ScoreModel):
    """A model with a subset of coordinates frozen at known values.

    The wrapped model keeps its unit decomposition; scores and gradients are
    the free columns of the base arrays evaluated at the embedded parameter
    vector.  Requires componentwise internal coordinates and a box-shaped
    domain on the base model, which every model in this package satisfies.
    """

    def __init__(self, base, fixed):
        if not base.componentwise_internal:
            raise DomainError("base model must use componentwise internal coordinates")
        unknown = set(fixed) - set(base.param_names)
        if unknown:
            raise DomainError(f"unknown fixed parameters {sorted(unknown)}")
        if len(fixed) >= len(base.param_names):
            raise DomainError("at least one parameter must remain free")
        self.base = base
        self.fixed = {name: float(value) for name, value in fixed.items()}
        self.param_names = tuple(n for n in base.param_names if n not in fixed)
        self.unit_kind = base.unit_kind
        self._free_idx = np.array(
            [i for i, n in enumerate(base.param_names) if n not in fixed], dtype=int
        )
        self._fixed_idx = np.array(
            [i for i, n in enumerate(base.param_names) if n in fixed], dtype=int
        )
        self._fixed_values = np.array(
            [self.fixed[base.param_names[i]] for i in self._fixed_idx], dtype=float
        )
        probe = np.asarray(base.domain_probe(), dtype=float).copy()
        probe[self._fixed_idx] = self._fixed_values
        if not base.in_domain(probe):
            raise DomainError(f"fixed values {self.fixed} outside the model domain")
        # Componentwise maps make the fixed slots of eta independent of the
        # free slots, so the template can be computed once from the probe.
        self._eta_template = np.asarray(base.to_internal(probe), dtype=float)

    def embed(self, theta_free):
        theta_free = np.asarray(theta_free, dtype=float)
        full = np.empty(len(self.base.param_names))
        full[self._free_idx] = theta_free
        full[self._fixed_idx] = self._fixed_values
        return full

    def in_domain(self, theta):
        return self.base.in_domain(self.embed(theta))

    def domain_probe(self):
        probe = np.asarray(self.base.domain_probe(), dtype=float)
        return probe[self._free_idx]

    def to_internal(self, theta):
        return np.asarray(self.base.to_internal(self.embed(theta)))[self._free_idx]

    def from_internal(self, eta):
        full_eta = self._eta_template.copy()
        full_eta[self._free_idx] = np.asarray(eta, dtype=float)
        return np.asarray(self.base.from_internal(full_eta))[self._free_idx]

    def units(self, data):
        return self.base.units(data)

    def n_units(self, units):
        return self.base.n_units(units)

    def resample(self, units, indices):
        return self.base.resample(units, indices)

    def unit_scores(self, theta, units):
        return self.base.unit_scores(self.embed(theta), units)[:, self._free_idx]

    def unit_gradients(self, theta, units):
        return self.base.unit_gradients(self.embed(theta), units)[:, self._free_idx]

    def pairwise_loglik(self, theta, units):
        return self.base.pairwise_loglik(self.embed(theta), units)

    def simulate(self, theta, shape, rng):
        return self.base.simulate(self.embed(theta), shape, rng)

    def default_start(self, units):
        return np.asarray(self.base.default_start(units), dtype=float)[self._free_idx]


class GradientView(ScoreModel):
    """The wrapped model with its estimating system replaced by the exact
    pairwise log-likelihood gradient.

    Classical statistics are functionals of the pairwise likelihood, so
    their fits and matrices must come from the gradient system even when the
    model's own estimating system is a robustified or rescaled variant.
    """

    def __init__(self, base):
        self.base = base
        self.param_names = base.param_names
        self.unit_kind = base.unit_kind
        self.componentwise_internal = base.componentwise_internal

    def in_domain(self, theta):
        return self.base.in_domain(theta)

    def domain_probe(self):
        return self.base.domain_probe()

    def to_internal(self, theta):
        return self.base.to_internal(theta)

    def from_internal(self, eta):
        return self.base.from_internal(eta)

    def units(self, data):
        return self.base.units(data)

    def n_units(self, units):
        return self.base.n_units(units)

    def resample(self, units, indices):
        return self.base.resample(units, indices)

    def unit_scores(self, theta, units):
        return self.base.unit_gradients(theta, units)

    def unit_gradients(self, theta, units):
        return self.base.unit_gradients(theta, units)

    def pairwise_loglik(self, theta, units):
        return self.base.pairwise_loglik(theta, units)

    def simulate(self, theta, shape, rng):
        return self.base.simulate(theta, shape, rng)

    def default_start(self, units):
        return self.base.default_start(units)

    def __getattr__(self, name):
        # Optional hooks (refine_start, fit_full, ...) surface only when the
        # wrapped model provides them.
        if name == "base":
            raise AttributeError(name)
        return getattr(self.base, name)


def total_score(model, theta, data):
    """Sum of the per-unit estimating functions, shape ``(p,)``."""
    units = model.units(data)
    return model.unit_scores(model.check_theta(theta), units).sum(axis=0)


def unit_scores(model, theta, data):
    """Per-unit estimating-function matrix, shape ``(n_units, p)``."""
    units = model.units(data)
    return model.unit_scores(model.check_theta(theta), units)
