"""Bounded estimating-function ingredients: Huber psi and its consistency
constant under the standard normal."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats

from ..errors import DomainError

__all__ = ["huber_psi", "huber_beta_const", "RobustTuning", "CLASSICAL"]


def huber_psi(r, k):
    """Huber's psi: the identity clipped to ``[-k, k]``.

    ``k = inf`` returns ``r`` unchanged.  Vectorized over ``r``.
    """
    if not k > 0:
        raise DomainError(f"clipping constant must be positive, got {k}")
    r = np.asarray(r, dtype=float)
    if math.isinf(k):
        return r + 0.0
    return np.clip(r, -k, k)


@functools.lru_cache(maxsize=None)
def huber_beta_const(c):
    """Consistency constant ``E[psi_c(Z)^2]`` for standard normal ``Z``.

    Centering the squared clipped residual by this value makes the scale
    estimating equation unbiased at the model.  Computed by adaptive
    quadrature; equals one in the unclipped limit.
    """
    if not c > 0:
        raise DomainError(f"clipping constant must be positive, got {c}")
    if math.isinf(c):
        return 1.0
    density = stats.norm.pdf

    def integrand(z):
        return huber_psi(z, c) ** 2 * density(z)

    value, _ = integrate.quad(integrand, -np.inf, np.inf, points=None, epsabs=1e-12)
    return float(value)


@dataclass(frozen=True)
class RobustTuning:
    """Clipping constants ``(a, b, c)`` of a bounded estimating system.

    ``a`` clips residuals, ``b`` clips the conditioning variable, and ``c``
    clips the residual inside the scale equation whose centering constant
    ``beta_c`` is derived automatically.  All-infinite tuning reproduces the
    unbounded moment equations.
    """

    a: float
    b: float
    c: float
    beta_c: float = field(init=False, repr=False)

    def __post_init__(self):
        for name in ("a", "b", "c"):
            value = getattr(self, name)
            if not value > 0:
                raise DomainError(f"tuning constant {name} must be positive, got {value}")
        object.__setattr__(self, "beta_c", huber_beta_const(self.c))

    @property
    def is_classical(self):
        return math.isinf(self.a) and math.isinf(self.b) and math.isinf(self.c)

    def as_tuple(self):
        return (self.a, self.b, self.c)


CLASSICAL = RobustTuning(math.inf, math.inf, math.inf)
