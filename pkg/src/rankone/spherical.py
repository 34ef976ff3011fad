"""Zonal spherical functions on real hyperbolic n-space and the spherical transform.

psi_s is the K-average of phi_s = y^{(n-1)s}.  With theta the angle from the
upward vertical, the point at distance t has height 1/(cosh t - sinh t cos theta),
so

    psi_s(t) = c_n int_0^pi (cosh t - sinh t cos theta)^{-a} sin^{n-2} theta dtheta,

a = (n-1)s.  Substituting tan(theta/2) = e^xi turns this into an integral over
the whole line of

    cosh(t + xi)^{-a} cosh(xi)^{a-(n-1)},

which is analytic in the strip |Im xi| < pi/2 and decays like e^{-(n-1)|xi|}
outside [-t, 0].  The trapezoid rule therefore converges geometrically and
never sums terms much larger than the result.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.special import gammaln

from .errors import ConvergenceError, DomainError
from .harish_chandra import SpectralParameter, plancherel_weights

# Strip half-width used to pick the trapezoid step; singularities sit at pi/2.
_STRIP = 1.2
_TARGET_DIGITS = 38.0


def sphere_area(n: int) -> float:
    """Area of the unit sphere S^{n-1} in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / math.exp(gammaln(n / 2.0))


def radial_density(t, n: int):
    """Volume density J_n(t) = |S^{n-1}| sinh^{n-1} t of geodesic polar coordinates."""
    return sphere_area(n) * np.sinh(t) ** (n - 1)


def _angular_normalizer(n: int) -> float:
    # 1 / int_0^pi sin^{n-2}
    return math.exp(gammaln(n / 2.0) - gammaln((n - 1) / 2.0)) / math.sqrt(math.pi)


def _logcosh(x):
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - math.log(2.0)


def lambda_of_s(p: SpectralParameter) -> complex:
    """Eigenvalue of the radial Laplacian on psi_s: (n-1)^2 s(s-1)."""
    return (p.n - 1) ** 2 * p.s * (p.s - 1)


def _xi_grid(a: complex, n: int, t_max: float, step_scale: float = 1.0):
    h = 2.0 * math.pi * _STRIP / (_TARGET_DIGITS + 2.0 * abs(a.imag) * _STRIP) * step_scale
    tail = (_TARGET_DIGITS + 4.0) / (n - 1) + 2.0
    lo, hi = -t_max - tail, tail
    m = int(math.ceil((hi - lo) / h))
    # even count of intervals so the 2h sub-rule reuses nodes
    m += m % 2
    xi = np.linspace(lo, hi, m + 1)
    return xi, (hi - lo) / m


def _psi_kernel(a: complex, n: int, t: np.ndarray, derivatives: bool):
    xi, h = _xi_grid(a, n, float(t.max()) if t.size else 0.0)
    tt = t[:, None] + xi[None, :]
    log_int = -a * _logcosh(tt) + (a - (n - 1)) * _logcosh(xi)[None, :]
    integrand = np.exp(log_int)
    cn = _angular_normalizer(n)
    out = [cn * h * integrand.sum(axis=1)]
    coarse = cn * 2 * h * integrand[:, ::2].sum(axis=1)
    mass = cn * h * np.abs(integrand).sum(axis=1)
    if derivatives:
        th = np.tanh(tt)
        sech2 = 1.0 - th * th
        out.append(cn * h * (-a * th * integrand).sum(axis=1))
        out.append(cn * h * ((a * a * th * th - a * sech2) * integrand).sum(axis=1))
    return out, coarse, mass


def _check(value, coarse, mass, tol, t, a):
    # error(h) ~ error(2h)^2 / A with A ~ (absolute mass) * exp(2 |Im a| strip)
    scale = np.maximum(np.abs(value), 1e-300)
    diff = np.abs(value - coarse)
    growth = math.exp(min(2.0 * abs(a.imag) * _STRIP, 700.0))
    est = diff * diff / (np.maximum(mass, 1e-300) * growth)
    bad = (est > tol * np.maximum(scale, 1.0)) | (diff > mass * growth)
    if np.any(bad):
        i = int(np.argmax(est))
        raise ConvergenceError(f"psi quadrature did not converge at t={t[i]}", float(est[i]))


def psi(p: SpectralParameter, t, tol: float = 1e-10):
    """Zonal spherical function psi_s at radius t (scalar or array)."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr < 0):
        raise DomainError("radius must be nonnegative", "t>=0")
    a = (p.n - 1) * p.s
    out = np.ones(t_arr.shape, dtype=complex)
    pos = t_arr > 0
    if np.any(pos):
        (val,), coarse, mass = _psi_kernel(a, p.n, t_arr[pos], derivatives=False)
        _check(val, coarse, mass, tol, t_arr[pos], a)
        out[pos] = val
    return out if np.ndim(t) else complex(out[0])


def _psi_critical(tau: float, n: int, t: np.ndarray) -> np.ndarray:
    # real form of the kernel on Re s = 1/2: modulus times cos of the phase
    a = complex((n - 1) * 0.5, (n - 1) * tau)
    out = np.ones(t.shape)
    pos = t > 0
    if not np.any(pos):
        return out
    tp = t[pos]
    xi, h = _xi_grid(a, n, float(tp.max()))
    lc_xi = _logcosh(xi)
    lc_t = _logcosh(tp[:, None] + xi[None, :])
    integrand = np.exp(-0.5 * (n - 1) * (lc_t + lc_xi)) * np.cos((n - 1) * tau * (lc_xi - lc_t))
    cn = _angular_normalizer(n)
    val = cn * h * integrand.sum(axis=1)
    coarse = cn * 2 * h * integrand[:, ::2].sum(axis=1)
    mass = cn * h * np.abs(integrand).sum(axis=1)
    _check(val, coarse, mass, 1e-10, tp, a)
    out[pos] = val
    return out


def psi_derivatives(p: SpectralParameter, t):
    """(psi, d psi/dt, d^2 psi/dt^2) by differentiating under the integral."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr < 0):
        raise DomainError("radius must be nonnegative", "t>=0")
    a = (p.n - 1) * p.s
    (v, d1, d2), coarse, mass = _psi_kernel(a, p.n, t_arr, derivatives=True)
    _check(v, coarse, mass, 1e-10, t_arr, a)
    v = np.where(t_arr == 0, 1.0 + 0j, v)
    return v, d1, d2


@dataclass(frozen=True)
class ZonalSphericalFunction:
    p: SpectralParameter

    def __call__(self, t):
        return psi(self.p, t)

    @property
    def eigenvalue(self) -> complex:
        return lambda_of_s(self.p)

    def as_radial(self, t) -> "RadialFunction":
        t = np.asarray(t, dtype=float)
        return RadialFunction(t=t, values=psi(self.p, t), n=self.p.n,
                              rule=self, derivative_rule=lambda x: psi_derivatives(self.p, x)[1:])


@dataclass
class RadialFunction:
    """Samples of a function of geodesic distance, optionally with a closed-form rule.

    ``derivative_rule(t)`` returns (f', f'') when available.
    """

    t: np.ndarray
    values: np.ndarray
    n: int
    rule: Optional[Callable] = None
    derivative_rule: Optional[Callable] = None

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.values = np.asarray(self.values)
        if self.t.shape != self.values.shape:
            raise DomainError("t and values must have the same shape", "shape match")
        if np.any(self.t < 0) or np.any(np.diff(self.t) <= 0):
            raise DomainError("t must be nonnegative and strictly increasing", "t increasing")

    @classmethod
    def from_callable(cls, fn, n: int, t, derivative_rule=None) -> "RadialFunction":
        t = np.asarray(t, dtype=float)
        return cls(t=t, values=np.asarray(fn(t)), n=n, rule=fn, derivative_rule=derivative_rule)

    @property
    def t_max(self) -> float:
        return float(self.t[-1])

    def __call__(self, t):
        if self.rule is not None:
            return self.rule(np.asarray(t, dtype=float))
        return np.interp(t, self.t, self.values.real) + 1j * np.interp(t, self.t, self.values.imag)


def radial_laplacian(f: RadialFunction) -> RadialFunction:
    """f'' + (n-1) coth(t) f' on the sample grid of ``f``.

    Exact when ``f`` carries a derivative rule, otherwise second-order finite
    differences on the (possibly nonuniform) grid.  At t = 0 the even-extension
    limit n f''(0) is used.
    """
    t, n = f.t, f.n
    if t.size < 5:
        raise DomainError("need at least 5 samples", "len(samples)>=5", size=int(t.size))
    if f.derivative_rule is not None:
        d1, d2 = f.derivative_rule(t)
        d1, d2 = np.asarray(d1), np.asarray(d2)
    else:
        d1 = np.gradient(f.values, t, edge_order=2)
        d2 = np.gradient(d1, t, edge_order=2)
    out = np.empty(t.shape, dtype=np.result_type(d1, d2, float))
    pos = t > 0
    out[pos] = d2[pos] + (n - 1) * d1[pos] / np.tanh(t[pos])
    out[~pos] = n * d2[~pos]
    return RadialFunction(t=t, values=out, n=n)


@dataclass(frozen=True)
class QuadratureSpec:
    tau_max: float = 12.0
    nodes: int = 160
    scheme: str = "gauss_segments"
    radial_t_max: float = 8.0
    radial_nodes: int = 160
    segments: int = 8
    tol: float = 1e-8
    workers: int = 0

    def __post_init__(self):
        if not self.tau_max > 0:
            raise DomainError("tau_max must be positive", "tau_max>0")
        if self.nodes < 16:
            raise DomainError("need at least 16 spectral nodes", "nodes>=16")
        if self.scheme not in ("uniform_trapezoid", "gauss_segments"):
            raise DomainError(f"unknown scheme {self.scheme!r}", "scheme")

    def spectral_nodes(self):
        """Nodes and weights on [0, tau_max] for the critical line."""
        return _nodes(0.0, self.tau_max, self.nodes, self.scheme, self.segments)

    def radial_quadrature(self):
        return _nodes(0.0, self.radial_t_max, self.radial_nodes, "gauss_segments",
                      max(1, self.radial_nodes // 40))

    def refined(self, factor: float = 2.0) -> "QuadratureSpec":
        return replace(self, nodes=int(self.nodes * factor))


def _nodes(lo, hi, count, scheme, segments):
    if scheme == "uniform_trapezoid":
        x = np.linspace(lo, hi, count)
        w = np.full(count, (hi - lo) / (count - 1))
        w[0] *= 0.5
        w[-1] *= 0.5
        return x, w
    per = max(2, int(math.ceil(count / segments)))
    g, gw = np.polynomial.legendre.leggauss(per)
    edges = np.linspace(lo, hi, segments + 1)
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        xs.append(0.5 * (b - a) * g + 0.5 * (a + b))
        ws.append(0.5 * (b - a) * gw)
    return np.concatenate(xs), np.concatenate(ws)


# transform/inverse pairs on a shared grid reuse the same table
_TABLE_CACHE: dict = {}
_TABLE_CACHE_SIZE = 8


def psi_table(tau, t, n: int, workers: int = 0) -> np.ndarray:
    """psi_{1/2 + i tau_j}(t_k) as a (len(tau), len(t)) real array.

    On the critical line psi is real.  Rows are computed independently and
    stacked in order, so the result does not depend on the worker count.
    """
    tau = np.asarray(tau, dtype=float)
    t = np.asarray(t, dtype=float)
    key = (n, tau.tobytes(), t.tobytes())
    hit = _TABLE_CACHE.get(key)
    if hit is not None:
        return hit

    def row(tj):
        return _psi_critical(tj, n, t)

    workers = workers or int(os.environ.get("RANKONE_THREADS", "1"))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(row, tau))
    else:
        rows = [row(tj) for tj in tau]
    table = np.array(rows).reshape(tau.size, t.size)
    table.setflags(write=False)
    if len(_TABLE_CACHE) >= _TABLE_CACHE_SIZE:
        _TABLE_CACHE.pop(next(iter(_TABLE_CACHE)))
    _TABLE_CACHE[key] = table
    return table


def inversion_constant_closed_form(n: int) -> float:
    """(n-1) 2^{n-3} / (pi |S^{n-1}|)."""
    return (n - 1) * 2.0 ** (n - 3) / (math.pi * sphere_area(n))


# kappa_n in  f(t) = kappa_n int_R ftilde(1/2 + i tau) psi_{1/2+i tau}(t) / |c|^2 dtau.
# The values below were first obtained numerically by a round trip on exp(-t^2)
# (scripts/calibrate_inversion.py) and then recognised as the closed form above;
# they agree to 1e-14 (n=2), 1e-12 (n=3), 1e-11 (n=4), 1e-10 (n=5).
INVERSION_CONSTANTS = {n: inversion_constant_closed_form(n) for n in range(2, 11)}


def inversion_constant(n: int) -> float:
    if n < 2:
        raise DomainError(f"dimension n={n} must be >= 2", "n>=2", n=n)
    return INVERSION_CONSTANTS.get(n) or inversion_constant_closed_form(n)


def calibrate_inversion_constant(n: int, q: Optional[QuadratureSpec] = None) -> float:
    """kappa_n from a round trip of exp(-t^2) evaluated at t = 0."""
    q = q or QuadratureSpec(tau_max=30.0 / (n - 1) + 6.0, nodes=240, radial_nodes=240)
    f = RadialFunction.from_callable(lambda t: np.exp(-t * t), n, np.linspace(0, q.radial_t_max, 9))
    F = spherical_transform(f, q, kappa=1.0)
    tau, w = q.spectral_nodes()
    integral = 2.0 * np.sum(w * F.values * plancherel_weights(tau, n))
    return float(1.0 / integral.real)


@dataclass
class SphericalTransform:
    """ftilde on Re s = 1/2, stored at tau >= 0 (the transform is even in tau)."""

    tau: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    n: int
    q: QuadratureSpec
    kappa: float = field(default=float("nan"))

    def at(self, s: complex) -> complex:
        tau = abs(complex(s).imag)
        return complex(np.interp(tau, self.tau, self.values.real) + 1j * np.interp(tau, self.tau, self.values.imag))


def spherical_transform(f: RadialFunction, q: QuadratureSpec, kappa: Optional[float] = None) -> SphericalTransform:
    """ftilde(s) = int_0^inf f(t) psi_{1-s}(t) J_n(t) dt on the critical line."""
    n = f.n
    t, wt = q.radial_quadrature()
    fv = np.asarray(f(t), dtype=complex)
    tail = abs(complex(np.asarray(f(np.array([q.radial_t_max])))[0])) * radial_density(q.radial_t_max, n)
    scale = max(float(np.max(np.abs(fv) * radial_density(t, n))), 1e-300)
    if tail > q.tol * scale and tail > 1e-300:
        raise ConvergenceError(
            f"radial tail {tail:.3e} above tolerance; increase radial_t_max", float(tail),
            radial_t_max=q.radial_t_max)
    tau, w = q.spectral_nodes()
    # psi_{1-s} = psi_s and both are real on the critical line
    table = psi_table(tau, t, n, q.workers)
    values = table @ (fv * wt * radial_density(t, n))
    if kappa is None:
        kappa = inversion_constant(n)
    return SphericalTransform(tau=tau, weights=w, values=values, n=n, q=q, kappa=kappa)


def _line_tail_check(F: SphericalTransform, density):
    # the transform must be negligible at the truncation point
    tail_mass = abs(F.values[-1]) * density[-1] * F.q.tau_max
    total = max(float(np.sum(F.weights * np.abs(F.values) * density)), 1e-300)
    if tail_mass > F.q.tol * total and tail_mass > 1e-300:
        raise ConvergenceError(f"critical-line tail {tail_mass:.3e} above tolerance; increase tau_max",
                               float(tail_mass), tau_max=F.q.tau_max)


def inverse_transform(F: SphericalTransform, t, check_tail: bool = True) -> RadialFunction:
    """f(t) = kappa_n int_R ftilde(s) psi_s(t) / |c(s)|^2 dtau."""
    t = np.asarray(t, dtype=float)
    density = plancherel_weights(F.tau, F.n)
    if check_tail:
        _line_tail_check(F, density)
    table = psi_table(F.tau, t, F.n, F.q.workers)
    vals = 2.0 * F.kappa * ((F.weights * F.values * density) @ table)
    return RadialFunction(t=t, values=vals, n=F.n)


def l2_norm_squared(f: RadialFunction, q: QuadratureSpec) -> float:
    t, wt = q.radial_quadrature()
    fv = np.asarray(f(t))
    return float(np.sum(wt * np.abs(fv) ** 2 * radial_density(t, f.n)))


def plancherel_norm_squared(F: SphericalTransform, weight=None) -> float:
    """kappa_n int_R |ftilde|^2 / |c|^2 (times ``weight(tau)`` if given) dtau."""
    density = plancherel_weights(F.tau, F.n)
    integrand = np.abs(F.values) ** 2 * density
    if weight is not None:
        integrand = integrand * weight(F.tau)
    return float(2.0 * F.kappa * np.sum(F.weights * integrand))
