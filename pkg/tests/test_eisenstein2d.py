import math
import random

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from rankone.errors import DomainError, PoleError
from rankone.eisenstein2d import (FOURIER, GENERATORS, LATTICE, EisensteinSeries, constant_term,
                                  eigenvalue_residual, functional_equation_residual, mobius, period_over_H,
                                  reduce_to_fundamental_domain, scattering_coefficient)


def brute_force(s, z, M=150):
    """(1/2) sum over coprime (c, d) of y^s / |cz + d|^{2s}, directly."""
    c, d = np.meshgrid(np.arange(-M, M + 1), np.arange(-M, M + 1))
    c, d = c.ravel(), d.ravel()
    keep = np.gcd(c, d) == 1
    c, d = c[keep], d[keep]
    y = z.imag
    return 0.5 * np.sum(y ** s / np.abs(c * z + d) ** (2 * s))


def fourier_oracle(s, z, terms=30):
    s, x, y = mpmath.mpc(s), mpmath.mpf(z.real), mpmath.mpf(z.imag)
    xi = lambda w: mpmath.pi ** (-w / 2) * mpmath.gamma(w / 2) * mpmath.zeta(w)
    total = y ** s + xi(2 * s - 1) / xi(2 * s) * y ** (1 - s)
    for k in range(1, terms + 1):
        sig = sum(mpmath.mpf(d) ** (1 - 2 * s) for d in range(1, k + 1) if k % d == 0)
        total += (4 / xi(2 * s) * mpmath.sqrt(y) * mpmath.mpf(k) ** (s - 0.5) * sig
                  * mpmath.besselk(s - 0.5, 2 * mpmath.pi * k * y) * mpmath.cos(2 * mpmath.pi * k * x))
    return complex(total)


def test_lattice_vs_brute_force():
    z = complex(0.2, 1.1)
    assert abs(EisensteinSeries(3.0, LATTICE)(z) - brute_force(3.0, z)) < 1e-8


@pytest.mark.parametrize("s", [1.3, 2.0 + 1j, 1.6 - 4j])
@pytest.mark.parametrize("z", [complex(0.1, 0.9), complex(-0.4, 1.5), complex(0.3, 2.7)])
def test_lattice_vs_fourier(s, z):
    a = EisensteinSeries(s, LATTICE)(z)
    b = EisensteinSeries(s, FOURIER)(z)
    assert abs(a - b) < 1e-8 * max(1.0, abs(b))


@pytest.mark.parametrize("s,z", [(0.5 + 3j, complex(0.1, 1.2)), (0.3 + 1j, complex(-0.2, 1.0)),
                                 (2.5, complex(0.45, 0.95))])
def test_fourier_vs_mpmath_oracle(s, z):
    assert abs(EisensteinSeries(s, FOURIER)(z) - fourier_oracle(s, z)) < 1e-10 * max(1, abs(fourier_oracle(s, z)))


def test_scattering_coefficient():
    assert scattering_coefficient(0.5) == -1
    for s in (0.5 + 3j, 0.3 + 1j, 2.0):
        assert abs(scattering_coefficient(s) * scattering_coefficient(1 - s) - 1) < 1e-12
    # phi(s) = sqrt(pi) Gamma(s - 1/2) zeta(2s - 1) / (Gamma(s) zeta(2s))
    s = 1.7
    ref = math.sqrt(math.pi) * math.gamma(s - 0.5) * float(mpmath.zeta(2 * s - 1)) / (math.gamma(s) * float(mpmath.zeta(2 * s)))
    assert math.isclose(scattering_coefficient(s).real, ref, rel_tol=1e-13)


def test_value_at_half_vanishes():
    for z in (complex(0.1, 1.3), complex(-0.3, 0.9)):
        assert abs(EisensteinSeries(0.5)(z)) < 1e-12


@given(st.floats(-0.5, 0.5), st.floats(0.9, 3.0), st.integers(0, 1000))
def test_modular_invariance(x, y, seed):
    rng = random.Random(seed)
    z = complex(x, y)
    g = ((1, 0), (0, 1))
    for _ in range(4):
        h = GENERATORS[rng.randrange(2)]
        g = ((g[0][0] * h[0][0] + g[0][1] * h[1][0], g[0][0] * h[0][1] + g[0][1] * h[1][1]),
             (g[1][0] * h[0][0] + g[1][1] * h[1][0], g[1][0] * h[0][1] + g[1][1] * h[1][1]))
    w = mobius(g, z)
    E = EisensteinSeries(0.5 + 3j, FOURIER)
    assert abs(E(w) - E(z)) < 1e-9 * max(1.0, abs(E(z)))


def test_reduction():
    z = reduce_to_fundamental_domain(complex(3.7, 0.01))
    assert abs(z.real) <= 0.5 and abs(z) >= 1 - 1e-12


@pytest.mark.parametrize("s", [1.3, 0.5 + 3j, 0.8 + 2j])
def test_eigenfunction(s):
    assert eigenvalue_residual(s, complex(0.1, 1.3)) < 1e-5


def test_constant_term():
    for s in (1.3, 0.5 + 3j, 0.8 + 2j):
        ct = constant_term(s, [1.0, 1.7, 2.4, 3.1])
        assert abs(ct.leading - 1) < 1e-6
        assert abs(ct.c_s - scattering_coefficient(s)) < 1e-6
        assert ct.residual < 1e-6
        assert all(abs(p - ct.c_s) < 1e-6 for p in ct.pair_estimates)


def test_constant_term_errors():
    with pytest.raises(DomainError):
        constant_term(1.3, [1.0, 1.0 + 1e-12])
    with pytest.raises(DomainError):
        constant_term(1.3, [2.0])
    with pytest.raises(PoleError):
        constant_term(1.001, [1.0, 2.0])


def test_functional_equation():
    pts = [complex(0.1, 1.2), complex(-0.3, 0.95), complex(0.4, 2.0)]
    assert functional_equation_residual(0.5 + 3j, pts) < 1e-5
    assert functional_equation_residual(0.3 + 1j, pts, scattering_coefficient(0.7 - 1j)) < 1e-10


def test_pole_and_domain_errors():
    with pytest.raises(PoleError):
        EisensteinSeries(1.005)
    with pytest.raises(DomainError):
        EisensteinSeries(1.02, LATTICE)
    with pytest.raises(DomainError):
        EisensteinSeries(2.0)(complex(0.3, -1.0))
    with pytest.raises(DomainError):
        EisensteinSeries(2.0, "other")


def test_period_converges_and_is_conjugation_invariant():
    a = period_over_H(0.5 + 3j, nodes=48)
    b = period_over_H(0.5 + 3j, nodes=96)
    assert abs(a.value - b.value) < 1e-8 * max(1, abs(b.value))
    c = period_over_H(0.5 + 3j, nodes=96, conjugate_by=((1, 1), (0, 1)))
    assert abs(c.value - b.value) < 1e-8 * max(1, abs(b.value))
    assert math.isclose(b.length, 2 * math.log((3 + math.sqrt(5)) / 2))
