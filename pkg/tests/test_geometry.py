import math

import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from rankone.errors import DomainError
from rankone.geometry import (AD_DETERMINANT, PAPER, Growth, HyperbolicPoint, SiegelDomain, classify_growth,
                              modular_exponent, modular_function, siegel_measure_tail)


@pytest.mark.parametrize("convention", [AD_DETERMINANT, PAPER])
def test_modular_identity(convention):
    assert modular_function(1.0, 5, convention) == 1.0


def test_modular_values():
    assert modular_function(2.0, 3, AD_DETERMINANT) == 4.0
    assert modular_function(2.0, 3, PAPER) == 8.0
    assert modular_exponent(4, AD_DETERMINANT) == 3


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_modular_rejects_nonpositive(bad):
    with pytest.raises(DomainError):
        modular_function(bad, 2)


@given(st.floats(0.1, 10), st.floats(0.1, 10), st.integers(2, 7))
def test_modular_is_a_character(a, b, n):
    assert math.isclose(modular_function(a * b, n), modular_function(a, n) * modular_function(b, n), rel_tol=1e-12)


@pytest.mark.parametrize("sigma,expected", [
    (0.4, Growth.SQUARE_INTEGRABLE),
    (0.9, Growth.INTEGRABLE),
    (0.5, Growth.DIVERGENT_L2),
    (1.0, Growth.DIVERGENT_L1),
    (-3.0, Growth.SQUARE_INTEGRABLE),
])
def test_classify(sigma, expected):
    g = classify_growth(sigma)
    assert g.classification is expected


def test_classify_flags():
    g = classify_growth(0.9)
    assert g.is_integrable and not g.is_square_integrable


def test_siegel_closed_forms():
    assert math.isclose(siegel_measure_tail(SiegelDomain(1.0, 2), 0.0), 0.5)
    for n in (2, 3, 5):
        assert math.isclose(siegel_measure_tail(SiegelDomain(1.0, n), 1.0, math.e), 1.0)


@given(st.floats(-1.0, 0.95), st.floats(1.5, 50.0), st.integers(2, 5))
def test_siegel_matches_quadrature(sigma, cutoff, n):
    d = modular_exponent(n, PAPER)
    ref, _ = quad(lambda lam: lam ** (d * (sigma - 1) - 1), 1.0, cutoff)
    assert math.isclose(siegel_measure_tail(SiegelDomain(1.0, n), sigma, cutoff), ref, rel_tol=1e-9)


def test_siegel_diverges_monotonically():
    vals = [siegel_measure_tail(SiegelDomain(1.0, 2), 1.2, c) for c in (10, 100, 1e3, 1e4, 1e5)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert siegel_measure_tail(SiegelDomain(1.0, 2), 1.2) == math.inf


def test_siegel_convergence_matches_classification():
    for sigma in (0.2, 0.8, 1.0, 1.3):
        finite = math.isfinite(siegel_measure_tail(SiegelDomain(1.0, 3), sigma))
        assert finite == classify_growth(sigma).is_integrable


def test_siegel_cutoff_error():
    with pytest.raises(DomainError):
        siegel_measure_tail(SiegelDomain(2.0, 2), 0.3, 1.0)


def test_point_validation():
    with pytest.raises(DomainError):
        HyperbolicPoint.half_space(0.0, -1.0)
    with pytest.raises(DomainError):
        HyperbolicPoint.radial(-0.5)


@given(st.floats(-3, 3), st.floats(0.05, 20))
def test_radial_distance_from_i(x, y):
    t = HyperbolicPoint.half_space(x, y).to_radial().t
    # hyperbolic distance from i in the upper half plane
    ref = math.acosh(1 + (x * x + (y - 1) ** 2) / (2 * y))
    assert math.isclose(t, ref, rel_tol=1e-9, abs_tol=1e-12)
