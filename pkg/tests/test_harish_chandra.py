import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import loggamma

from rankone.errors import DomainError, PoleError
from rankone.harish_chandra import (HELGASON, SpectralParameter, asymptotic_exponent_fit, c_function,
                                    plancherel_density)


def scipy_c(s, n):
    """Independent double-precision evaluation through scipy's complex loggamma."""
    h = (n - 1) / 2
    log = (loggamma((s - 0.5) * h) - loggamma((s + 0.5) * h)
           + loggamma(3 * (n - 1) / 4) - loggamma((n - 1) / 4))
    return complex(np.exp(log))


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


@pytest.mark.parametrize("n", [2, 3, 4, 7])
def test_c_at_one(n):
    assert close(c_function(SpectralParameter(1.0, n)), 1.0, 1e-14)


def test_n3_closed_form():
    assert close(c_function(SpectralParameter(1.5, 3)), 0.5, 1e-14)
    for tau in (0.3, 1.0, 17.0, 950.0):
        got = c_function(SpectralParameter.on_critical_line(tau, 3))
        assert close(got, 1 / (2j * tau), 1e-13)


@given(st.floats(0.55, 4.0), st.floats(-30, 30))
def test_n3_closed_form_everywhere(sr, si):
    s = complex(sr, si)
    assert close(c_function(SpectralParameter(s, 3)), 1 / (2 * s - 1), 1e-12)


@given(st.integers(2, 9), st.floats(0.6, 3.0), st.floats(-40, 40))
def test_matches_scipy(n, sr, si):
    s = complex(sr, si)
    assert close(c_function(SpectralParameter(s, n)), scipy_c(s, n), 1e-10)


@given(st.integers(2, 9), st.floats(0.05, 200))
def test_conjugate_symmetry_on_line(n, tau):
    a = c_function(SpectralParameter.on_critical_line(tau, n))
    b = c_function(SpectralParameter.on_critical_line(-tau, n))
    assert close(a, b.conjugate(), 1e-13)


@given(st.floats(0.05, 50), st.floats(0.55, 3.0))
def test_helgason_agrees_at_n3(tau, sr):
    for s in (complex(0.5, tau), complex(sr, tau)):
        p = SpectralParameter(s, 3)
        assert close(c_function(p, HELGASON), c_function(p), 1e-12)


def test_plancherel_density_n3():
    assert math.isclose(plancherel_density(1.0, 3), 4.0, rel_tol=1e-13)
    assert math.isclose(plancherel_density(0.5, 3), 1.0, rel_tol=1e-13)


def test_plancherel_density_n2_growth():
    # Stirling: 1/|c|^2 ~ (Gamma(1/4)/Gamma(3/4))^2 tau / 2 for n = 2
    kappa = (math.gamma(0.25) / math.gamma(0.75)) ** 2 / 2
    for t in (1e2, 1e3, 1e5):
        assert math.isclose(plancherel_density(t, 2) / t, kappa, rel_tol=1e-3 * 100 / t)


def test_pole_at_tau_zero():
    with pytest.raises(PoleError) as info:
        c_function(SpectralParameter(0.5, 2))
    assert "argument" in info.value.details
    with pytest.raises(PoleError):
        plancherel_density(0.0, 4)


def test_zero_of_c():
    # n = 2, s = -1/2: the denominator Gamma has a pole, the numerator does not
    assert c_function(SpectralParameter(-0.5, 2)) == 0


@pytest.mark.parametrize("n,expected,tol", [(2, -0.5, 1e-3), (3, -1.0, 1e-9), (5, -2.0, 1e-3)])
def test_asymptotic_exponent(n, expected, tol):
    grid = np.logspace(2, 4, 25)
    assert abs(asymptotic_exponent_fit(n, grid) - expected) < tol


def test_asymptotic_exponent_degenerate_grid():
    with pytest.raises(DomainError):
        asymptotic_exponent_fit(2, [100.0] * 3)
    with pytest.raises(DomainError):
        asymptotic_exponent_fit(2, np.linspace(100, 200, 20))


def test_parameter_validation():
    with pytest.raises(DomainError):
        SpectralParameter(0.5, 1)
    with pytest.raises(DomainError):
        SpectralParameter(complex(math.inf, 0), 2)
    assert SpectralParameter.on_critical_line(2.0).s == 0.5 + 2j
    assert cmath.isclose(SpectralParameter(3, 2).s, 3 + 0j)
