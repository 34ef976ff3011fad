"""Real-analytic Eisenstein series for SL2(Z) acting on the upper half-plane.

    E(z, s) = sum over coprime (c, d) modulo sign of  y^s / |cz + d|^{2s}.

Two evaluators are provided.  The lattice sum is the reference for Re s > 1.
Everywhere else the Fourier expansion

    E = y^s + phi(s) y^{1-s}
        + (4 sqrt(y) / xi(2s)) sum_{k>=1} k^{s-1/2} sigma_{1-2s}(k) K_{s-1/2}(2 pi k y) cos(2 pi k x)

is used, with xi(s) = pi^{-s/2} Gamma(s/2) zeta(s) and phi(s) = xi(2s-1)/xi(2s).
The constant-term coefficient c_s of the general theory is phi(s) here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import mpmath
import numpy as np

from .errors import ConvergenceError, DomainError, PoleError
from .geometry import HyperbolicPoint

LATTICE = "lattice_sum"
FOURIER = "fourier_continuation"
POLE = 1.0
POLE_RADIUS = 1e-2
LATTICE_MARGIN = 0.05
GENERATORS = (((0, -1), (1, 0)), ((1, 1), (0, 1)))  # S, T
HYPERBOLIC = ((2, 1), (1, 1))

_DPS = 30


def _as_z(z) -> complex:
    if isinstance(z, HyperbolicPoint):
        z = z.z
    z = complex(z)
    if not z.imag > 0:
        raise DomainError(f"point {z} is not in the upper half-plane", "Im z>0", z=z)
    return z


def mobius(g, z: complex) -> complex:
    (a, b), (c, d) = g
    return (a * z + b) / (c * z + d)


def reduce_to_fundamental_domain(z: complex, max_steps: int = 1000) -> complex:
    """Move z into |x| <= 1/2, |z| >= 1 by translations and inversion."""
    for _ in range(max_steps):
        z = complex(z.real - math.floor(z.real + 0.5), z.imag)
        if abs(z) >= 1.0 - 1e-15:
            return z
        z = -1.0 / z
    raise ConvergenceError("fundamental-domain reduction did not terminate", float(max_steps))


def _check_pole(s: complex):
    if abs(s - POLE) < POLE_RADIUS:
        raise PoleError(f"s={s} lies within {POLE_RADIUS} of the pole at s=1", argument=s)


def completed_zeta(w) -> mpmath.mpc:
    """xi(w) = pi^{-w/2} Gamma(w/2) zeta(w); infinite at w = 0 and w = 1."""
    w = mpmath.mpmathify(w)
    if w == 0 or w == 1:
        return mpmath.inf
    g = w / 2
    if g.imag == 0 and g.real <= 0 and g.real == int(g.real):
        # trivial zeros of zeta cancel the Gamma poles
        return mpmath.pi ** (-w / 2) * mpmath.limit(lambda e: mpmath.gamma(g + e) * mpmath.zeta(w + 2 * e), 0)
    return mpmath.pi ** (-w / 2) * mpmath.gamma(g) * mpmath.zeta(w)


def scattering_coefficient(s: complex) -> complex:
    """phi(s) = xi(2s-1) / xi(2s), the coefficient of y^{1-s} in the constant term."""
    s = complex(s)
    _check_pole(s)
    if s == 0.5:
        return -1.0 + 0j
    with mpmath.workdps(_DPS):
        num = completed_zeta(2 * s - 1)
        den = completed_zeta(2 * s)
        if mpmath.isinf(den):
            return 0j
        if mpmath.isinf(num):
            raise PoleError(f"phi has a pole at s={s}", argument=s)
        return complex(num / den)


# ------------------------------------------------------------------ lattice

def _row_tail(X: float, b: float, s: complex) -> complex:
    """sum_{k>=0} ((X+k)^2 + b^2)^{-s} by Euler-Maclaurin, X >= 3b."""
    # integral from X to infinity via the binomial series in (b/X)^2
    total, coef, r2 = 0j, 1.0 + 0j, (b / X) ** 2
    for k in range(200):
        term = coef * r2 ** k / (2 * s + 2 * k - 1)
        total += term
        if abs(term) < 1e-18 * abs(total):
            break
        coef *= (-s - k) / (k + 1)
    integral = total * X ** (1 - 2 * s)
    g = X * X + b * b
    f0 = g ** (-s)
    f1 = -2 * s * X * g ** (-s - 1)
    f3 = 12 * s * (s + 1) * X * g ** (-s - 2) - 8 * s * (s + 1) * (s + 2) * X ** 3 * g ** (-s - 3)
    return integral + f0 / 2 - f1 / 12 + f3 / 720


def _row_sum(m: int, x: float, y: float, s: complex) -> complex:
    """sum_n ((n + m x)^2 + (m y)^2)^{-s}."""
    b = m * y
    A = max(3.0 * b, 30.0)
    mx = m * x
    n = np.arange(math.ceil(-A - mx), math.floor(A - mx) + 1)
    v = n + mx
    direct = np.sum((v * v + b * b) ** (-s))
    right = _row_tail(math.floor(A - mx) + 1 + mx, b, s)
    left = _row_tail(math.floor(A + mx) + 1 - mx, b, s)
    return complex(direct) + right + left


def _lattice_sum(s: complex, z: complex, trunc: int) -> complex:
    if not s.real > 1.0 + LATTICE_MARGIN:
        raise DomainError(f"lattice sum needs Re s > {1 + LATTICE_MARGIN}", "Re s>1+margin", s=s)
    x, y = z.real, z.imag
    with mpmath.workdps(_DPS):
        zeta2s = complex(mpmath.zeta(2 * s))
        rows_tail = complex(mpmath.sqrt(mpmath.pi) * mpmath.gamma(s - 0.5) / mpmath.gamma(s)
                            * mpmath.zeta(2 * s - 1, trunc + 1))
    acc = 0j
    for m in range(1, trunc + 1):
        acc += _row_sum(m, x, y, s)
    acc += rows_tail * y ** (1 - 2 * s)
    G = 2 * zeta2s * y ** s + 2 * y ** s * acc
    return G / (2 * zeta2s)


# ------------------------------------------------------------------ Fourier

@lru_cache(maxsize=256)
def _fourier_constants(s: complex):
    with mpmath.workdps(_DPS):
        xi2s = completed_zeta(2 * s)
        inv = mpmath.mpf(0) if mpmath.isinf(xi2s) else 1 / xi2s
    return scattering_coefficient(s), complex(inv)


def _sigma(k: int, w: complex) -> complex:
    return sum(complex(d) ** w for d in range(1, k + 1) if k % d == 0)


@lru_cache(maxsize=4096)
def _fourier_coefficients(s: complex, y: float, tol: float = 1e-16, max_terms: int = 400) -> np.ndarray:
    """4 sqrt(y)/xi(2s) * k^{s-1/2} sigma_{1-2s}(k) K_{s-1/2}(2 pi k y), k = 1, 2, ..."""
    phi, inv_xi = _fourier_constants(s)
    base = max(abs(y ** s), abs(phi * y ** (1 - s)), 1.0)
    nu = s - 0.5
    pref = 4 * math.sqrt(y) * inv_xi
    out = []
    with mpmath.workdps(20):
        for k in range(1, max_terms + 1):
            arg = 2 * math.pi * k * y
            a = pref * k ** nu * _sigma(k, 1 - 2 * s) * complex(mpmath.besselk(nu, arg))
            out.append(a)
            # past the turning point |Im nu| the Bessel factor decays like e^{-arg}
            if arg > abs(nu.imag) + 40 and abs(a) < tol * base:
                return np.array(out)
    raise ConvergenceError("Fourier series did not converge", float(abs(out[-1])))


def _fourier(s: complex, z: complex) -> complex:
    x, y = z.real, z.imag
    if s == 0.5:
        return 0j
    phi, inv_xi = _fourier_constants(s)
    total = y ** s + phi * y ** (1 - s)
    if inv_xi == 0:
        return total
    a = _fourier_coefficients(s, y)
    k = np.arange(1, a.size + 1)
    return complex(total + np.sum(a * np.cos(2 * math.pi * k * x)))


@dataclass(frozen=True)
class EisensteinSeries:
    s: complex
    method: str = "auto"
    trunc: int = 200
    reduce: Optional[bool] = None

    def __post_init__(self):
        object.__setattr__(self, "s", complex(self.s))
        _check_pole(self.s)
        m = self.method
        if m == "auto":
            m = LATTICE if self.s.real > 1.0 + LATTICE_MARGIN else FOURIER
        if m not in (LATTICE, FOURIER):
            raise DomainError(f"unknown method {self.method!r}", "method", method=self.method)
        if m == LATTICE and not self.s.real > 1.0 + LATTICE_MARGIN:
            raise DomainError(f"lattice sum needs Re s > {1 + LATTICE_MARGIN}", "Re s>1+margin", s=self.s)
        object.__setattr__(self, "method", m)
        if self.trunc < 1:
            raise DomainError("truncation must be positive", "trunc>=1", trunc=self.trunc)

    def __call__(self, z) -> complex:
        z = _as_z(z)
        reduce = self.reduce if self.reduce is not None else self.method == FOURIER
        if reduce:
            z = reduce_to_fundamental_domain(z)
        if self.method == LATTICE:
            return _lattice_sum(self.s, z, self.trunc)
        return _fourier(self.s, z)


def eisenstein_eval(s: complex, z, trunc: int = 200, method: str = "auto") -> complex:
    return EisensteinSeries(s, method, trunc)(z)


def hyperbolic_laplacian_fd(fn, z: complex, h: float = 1e-2) -> complex:
    """y^2 (f_xx + f_yy) with the fourth-order five-point stencil in each direction."""
    c = (-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12)
    offs = (-2, -1, 0, 1, 2)
    fxx = sum(ci * fn(z + k * h) for ci, k in zip(c, offs)) / (h * h)
    fyy = sum(ci * fn(z + 1j * k * h) for ci, k in zip(c, offs)) / (h * h)
    return z.imag ** 2 * (fxx + fyy)


def eigenvalue_residual(s: complex, z, h: float = 1e-2, method: str = "auto") -> float:
    """|Delta E - s(s-1) E| / max(|E|, 1) at z."""
    E = EisensteinSeries(s, method)
    z = _as_z(z)
    val = E(z)
    return abs(hyperbolic_laplacian_fd(E, z, h) - s * (s - 1) * val) / max(abs(val), 1.0)


# ------------------------------------------------------------ constant term

@dataclass
class ConstantTermData:
    s: complex
    leading: complex
    c_s: complex
    residual: float
    heights: list
    pair_estimates: list = field(default_factory=list)


def constant_term_at(s: complex, y: float, x_nodes: int = 32, method: str = "auto") -> complex:
    """int_0^1 E(x + iy, s) dx by the periodic trapezoid rule."""
    E = EisensteinSeries(s, method)
    xs = np.arange(x_nodes) / x_nodes
    return complex(np.mean([E(complex(x, y)) for x in xs]))


def _solve_pair(s, y1, a1, y2, a2):
    M = np.array([[y1 ** s, y1 ** (1 - s)], [y2 ** s, y2 ** (1 - s)]], dtype=complex)
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > 1e8:
        raise DomainError(f"constant-term fit ill-conditioned (cond={cond:.2e}); spread the heights",
                          "heights well separated", cond=float(cond))
    return np.linalg.solve(M, np.array([a1, a2], dtype=complex))


def constant_term(s: complex, y_samples: Sequence[float], x_nodes: int = 32, method: str = "auto",
                  t0: float = 1.0) -> ConstantTermData:
    """Fit int_0^1 E dx = A y^s + B y^{1-s}; A should be 1 and B is c_s.

    The first two heights determine (A, B); the others measure the residual.
    Disjoint consecutive pairs give independent estimates of c_s.
    """
    s = complex(s)
    _check_pole(s)
    ys = [float(y) for y in y_samples]
    if len(ys) < 2:
        raise DomainError("need at least two heights", "len(y_samples)>=2")
    if min(ys) < t0:
        raise DomainError(f"heights must be >= t0={t0}", "y>=t0", t0=t0)
    a = [constant_term_at(s, y, x_nodes, method) for y in ys]
    A, B = _solve_pair(s, ys[0], a[0], ys[1], a[1])
    resid = 0.0
    for y, ay in zip(ys[2:], a[2:]):
        resid = max(resid, abs(ay - (A * y ** s + B * y ** (1 - s))) / max(abs(ay), 1e-300))
    pairs = []
    for i in range(0, len(ys) - 1, 2):
        pairs.append(complex(_solve_pair(s, ys[i], a[i], ys[i + 1], a[i + 1])[1]))
    return ConstantTermData(s=s, leading=complex(A), c_s=complex(B), residual=resid, heights=ys,
                            pair_estimates=pairs)


DEFAULT_HEIGHTS = (1.0, 1.7, 2.4, 3.1)


def functional_equation_residual(s: complex, sample_points: Sequence, c_one_minus_s: Optional[complex] = None,
                                 heights: Sequence[float] = DEFAULT_HEIGHTS) -> float:
    """max |E(z, 1-s) - c_{1-s} E(z, s)| over the samples (relative to max(|E|, 1))."""
    s = complex(s)
    if c_one_minus_s is None:
        c_one_minus_s = constant_term(1 - s, heights).c_s
    E1, E0 = EisensteinSeries(1 - s), EisensteinSeries(s)
    worst = 0.0
    for z in sample_points:
        z = _as_z(z)
        a, b = E1(z), E0(z)
        worst = max(worst, abs(a - c_one_minus_s * b) / max(abs(a), 1.0))
    return worst


# ------------------------------------------------------------------ periods

@dataclass
class PeriodResult:
    s: complex
    value: complex
    error_estimate: float
    length: float
    nodes: int


def closed_geodesic(gamma=HYPERBOLIC):
    """(M, length): z(u) = M(i e^u) traces the axis of gamma, and gamma z(u) = z(u + length)."""
    (a, b), (c, d) = gamma
    tr = a + d
    if abs(tr) <= 2 or c == 0:
        raise DomainError("need a hyperbolic element with c != 0", "|trace|>2, c!=0")
    disc = math.sqrt(tr * tr - 4)
    w_plus = ((a - d) + disc) / (2 * c)
    w_minus = ((a - d) - disc) / (2 * c)
    # attracting fixed point at u -> +inf
    lam = (tr + disc) / 2
    attracting = w_plus if abs(c * w_plus + d) > 1 else w_minus
    repelling = w_minus if attracting == w_plus else w_plus
    M = ((attracting, repelling), (1.0, 1.0))
    if attracting - repelling < 0:
        M = ((-attracting, repelling), (-1.0, 1.0))
    return M, 2.0 * math.log(lam)


def period_over_H(s: complex, nodes: int = 48, gamma=HYPERBOLIC, conjugate_by=None,
                  method: str = "auto") -> PeriodResult:
    """Integral of E(., s) over one period of the closed geodesic of gamma (arc length).

    The integrand is periodic and analytic, so the trapezoid rule converges
    geometrically; the error estimate compares against the half-node rule.
    ``conjugate_by`` moves the cycle by an element of SL2(Z).
    """
    s = complex(s)
    E = EisensteinSeries(s, method)
    M, length = closed_geodesic(gamma)

    def point(u):
        z = mobius(M, 1j * math.exp(u))
        return mobius(conjugate_by, z) if conjugate_by is not None else z

    u = np.arange(nodes) * (length / nodes)
    vals = np.array([E(point(ui)) for ui in u])
    value = complex(length * vals.mean())
    coarse = complex(length * vals[::2].mean()) if nodes % 2 == 0 else value
    return PeriodResult(s=s, value=value, error_estimate=abs(value - coarse), length=length, nodes=nodes)
