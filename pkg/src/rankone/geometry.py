"""Rank-one coordinates, the modular character of the parabolic, Siegel tails.

Points of real hyperbolic n-space are kept either in the upper half-space
model ``(x, y)`` with ``x`` in R^{n-1} and ``y > 0``, or radially as the
geodesic distance ``t`` from the base point ``(0, 1)``.  Along the vertical
geodesic ``x = 0`` the two agree via ``y = e^t``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

AD_DETERMINANT = "ad_determinant"
PAPER = "paper"
CONVENTIONS = (AD_DETERMINANT, PAPER)


def modular_exponent(n: int, convention: str = AD_DETERMINANT) -> int:
    """Power ``d`` with delta_P(m_lambda) = |lambda|^d."""
    if n < 2:
        raise DomainError(f"dimension n={n} must be >= 2", "n>=2", n=n)
    if convention == AD_DETERMINANT:
        return n - 1
    if convention == PAPER:
        return n
    raise DomainError(f"unknown convention {convention!r}", "convention", convention=convention)


def modular_function(lambda_abs: float, n: int, convention: str = AD_DETERMINANT) -> float:
    if not lambda_abs > 0:
        raise DomainError(f"|lambda|={lambda_abs} must be positive", "lambda_abs>0", lambda_abs=lambda_abs)
    return float(lambda_abs) ** modular_exponent(n, convention)


@dataclass(frozen=True)
class HyperbolicPoint:
    model: str
    x: tuple = ()
    y: float = 1.0
    t: float = 0.0

    def __post_init__(self):
        if self.model == "upper_half_space":
            if not self.y > 0:
                raise DomainError(f"height y={self.y} must be positive", "y>0", y=self.y)
        elif self.model == "radial":
            if not self.t >= 0:
                raise DomainError(f"radius t={self.t} must be nonnegative", "t>=0", t=self.t)
        else:
            raise DomainError(f"unknown model {self.model!r}", "model", model=self.model)

    @classmethod
    def half_space(cls, x, y) -> "HyperbolicPoint":
        x = tuple(float(v) for v in np.atleast_1d(x))
        return cls("upper_half_space", x=x, y=float(y))

    @classmethod
    def radial(cls, t) -> "HyperbolicPoint":
        return cls("radial", t=float(t))

    def to_half_space(self, n: int = 2) -> "HyperbolicPoint":
        if self.model == "upper_half_space":
            return self
        return HyperbolicPoint.half_space((0.0,) * (n - 1), math.exp(self.t))

    def to_radial(self) -> "HyperbolicPoint":
        """Geodesic distance to the base point (0, 1)."""
        if self.model == "radial":
            return self
        r2 = sum(v * v for v in self.x)
        cosh_t = 1.0 + (r2 + (self.y - 1.0) ** 2) / (2.0 * self.y)
        return HyperbolicPoint.radial(math.acosh(cosh_t))

    @property
    def z(self) -> complex:
        """Complex coordinate, only meaningful for n = 2."""
        if self.model != "upper_half_space":
            return self.to_half_space().z
        return complex(self.x[0] if self.x else 0.0, self.y)


@dataclass(frozen=True)
class SiegelDomain:
    t0: float
    n: int = 2

    def __post_init__(self):
        if not self.t0 > 0:
            raise DomainError(f"Siegel cutoff t0={self.t0} must be positive", "t0>0", t0=self.t0)
        if self.n < 2:
            raise DomainError("n must be >= 2", "n>=2", n=self.n)


class Growth(enum.Enum):
    SQUARE_INTEGRABLE = "square_integrable"
    INTEGRABLE = "integrable"
    DIVERGENT_L2 = "divergent_L2"
    DIVERGENT_L1 = "divergent_L1"


@dataclass(frozen=True)
class GrowthClass:
    sigma: float
    classification: Growth = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "classification", _classify(self.sigma))

    @property
    def is_integrable(self) -> bool:
        return self.sigma < 1.0

    @property
    def is_square_integrable(self) -> bool:
        return self.sigma < 0.5


def _classify(sigma: float) -> Growth:
    # thresholds are strict: exactly 1/2 or 1 counts as divergent
    if sigma < 0.5:
        return Growth.SQUARE_INTEGRABLE
    if sigma == 0.5:
        return Growth.DIVERGENT_L2
    if sigma < 1.0:
        return Growth.INTEGRABLE
    return Growth.DIVERGENT_L1


def classify_growth(sigma: float) -> GrowthClass:
    if not math.isfinite(sigma):
        raise DomainError(f"sigma={sigma} must be finite", "sigma finite", sigma=sigma)
    return GrowthClass(float(sigma))


def siegel_measure_tail(domain: SiegelDomain, sigma: float, cutoff: float = math.inf,
                        convention: str = PAPER) -> float:
    """Integral of |lambda|^{d(sigma-1)-1} over [t0, cutoff].

    This bounds the integral of a function growing like delta_P^sigma over a
    Siegel set.  ``cutoff=inf`` returns the limit (``inf`` when divergent).
    The default convention reproduces the chained estimate with d = n.
    """
    if not cutoff > domain.t0:
        raise DomainError(f"cutoff={cutoff} must exceed t0={domain.t0}", "cutoff>t0",
                          cutoff=cutoff, t0=domain.t0)
    d = modular_exponent(domain.n, convention)
    p = d * (sigma - 1.0)
    t0 = domain.t0
    if p == 0.0:
        return math.log(cutoff / t0)
    if math.isinf(cutoff):
        return math.inf if p > 0 else -t0 ** p / p
    return (cutoff ** p - t0 ** p) / p
