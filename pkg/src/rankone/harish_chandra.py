"""Harish-Chandra c-function of real hyperbolic n-space.

With the spectral parameter s normalized so that the critical line is
Re s = 1/2,

    c(s) = Gamma((s - 1/2)(n-1)/2) Gamma(3(n-1)/4)
           / (Gamma((s + 1/2)(n-1)/2) Gamma((n-1)/4)).

The quotient is evaluated through complex log-gamma at 30 significant digits
so that the double-precision result keeps full relative accuracy even for
|s| ~ 1e4, where the two log-gamma values are ~1e5 in size and cancel.

That formula is exactly the Plancherel c-function only for n = 3.  For other n
the spherical inversion formula needs the standard rank-one expression

    c(s) = Gamma((n-1)(s - 1/2)) Gamma(n-1) / (Gamma((n-1)s) Gamma((n-1)/2)),

which agrees with the one above at n = 3, equals 1 at s = 1 and decays at the
same rate |s|^{-(n-1)/2}.  ``formula="helgason"`` selects it; the spherical
transform and Sobolev modules always use it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import DomainError, PoleError

_DPS = 30


@dataclass(frozen=True)
class SpectralParameter:
    s: complex
    n: int = 2

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"dimension n={self.n} must be >= 2", "n>=2", n=self.n)
        s = complex(self.s)
        if not (math.isfinite(s.real) and math.isfinite(s.imag)):
            raise DomainError("s must be finite", "s finite", s=s)
        object.__setattr__(self, "s", s)

    @classmethod
    def on_critical_line(cls, tau: float, n: int = 2) -> "SpectralParameter":
        return cls(complex(0.5, tau), n)

    @property
    def tau(self) -> float:
        return self.s.imag


def _is_nonpositive_integer(z) -> bool:
    return z.imag == 0 and z.real <= 0 and z.real == round(z.real)


PAPER = "paper"
HELGASON = "helgason"


def _gamma_arguments(s: complex, n: int, formula: str):
    if formula == PAPER:
        h = (n - 1) / 2.0
        return (s - 0.5) * h, (s + 0.5) * h, mpmath.mpf(3 * (n - 1)) / 4, mpmath.mpf(n - 1) / 4
    if formula == HELGASON:
        return (n - 1) * (s - 0.5), (n - 1) * s, mpmath.mpf(n - 1), mpmath.mpf(n - 1) / 2
    raise DomainError(f"unknown c-function formula {formula!r}", "formula", formula=formula)


def c_function(p: SpectralParameter, formula: str = PAPER) -> complex:
    n, s = p.n, p.s
    with mpmath.workdps(_DPS):
        top, bottom, const_top, const_bottom = _gamma_arguments(s, n, formula)
        if _is_nonpositive_integer(top):
            raise PoleError(f"c(s) has a pole at s={s} (n={n})", argument=top, s=s, n=n)
        if _is_nonpositive_integer(bottom):
            return 0j
        log_ratio = mpmath.loggamma(mpmath.mpc(top.real, top.imag)) - mpmath.loggamma(
            mpmath.mpc(bottom.real, bottom.imag))
        const = mpmath.gamma(const_top) / mpmath.gamma(const_bottom)
        return complex(mpmath.exp(log_ratio) * const)


def c_values(tau, n: int, formula: str = PAPER) -> np.ndarray:
    """c(1/2 + i tau) on an array of tau."""
    tau = np.asarray(tau, dtype=float)
    out = np.empty(tau.shape, dtype=complex)
    for idx, t in np.ndenumerate(tau):
        out[idx] = c_function(SpectralParameter.on_critical_line(t, n), formula)
    return out


def plancherel_density(tau: float, n: int, formula: str = PAPER) -> float:
    """1/|c(1/2 + i tau)|^2.  At tau = 0 c has a pole and this raises."""
    return 1.0 / abs(c_function(SpectralParameter.on_critical_line(float(tau), n), formula)) ** 2


def plancherel_weights(tau, n: int, formula: str = HELGASON) -> np.ndarray:
    """Vectorized density for quadrature, using the limit value 0 at tau = 0."""
    tau = np.asarray(tau, dtype=float)
    out = np.zeros(tau.shape)
    for idx, t in np.ndenumerate(tau):
        if t != 0.0:
            out[idx] = plancherel_density(t, n, formula)
    return out


def asymptotic_exponent_fit(n: int, tau_grid, formula: str = PAPER) -> float:
    """Least-squares slope of log|c(1/2 + i tau)| against log tau."""
    tau = np.asarray(tau_grid, dtype=float)
    if tau.size < 8:
        raise DomainError("need at least 8 grid points", "len(tau_grid)>=8", size=int(tau.size))
    if np.any(tau <= 0) or tau.max() / tau.min() < 100.0:
        raise DomainError("grid must be positive and span two decades", "grid spans 2 decades")
    logc = np.log(np.abs(c_values(tau, n, formula)))
    slope, _ = np.polyfit(np.log(tau), logc, 1)
    return float(slope)
