import math

import mpmath
import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st
from scipy.integrate import solve_ivp

from rankone.errors import ConvergenceError, DomainError
from rankone.harish_chandra import SpectralParameter
from rankone.spherical import (QuadratureSpec, RadialFunction, ZonalSphericalFunction,
                               calibrate_inversion_constant, inverse_transform, inversion_constant,
                               l2_norm_squared, lambda_of_s, plancherel_norm_squared, psi, radial_laplacian,
                               spherical_transform)


def hyp_oracle(s, n, t):
    """psi_s(t) = 2F1(a/2, (n-1-a)/2; n/2; -sinh^2 t), a = (n-1)s."""
    a = (n - 1) * mpmath.mpc(s)
    return complex(mpmath.hyp2f1(a / 2, (n - 1 - a) / 2, mpmath.mpf(n) / 2, -mpmath.sinh(t) ** 2))


def ode_oracle(s, n, t_end):
    """Integrate f'' + (n-1) coth(t) f' = lambda f from a series start near 0."""
    lam = (n - 1) ** 2 * s * (s - 1)
    t0 = 1e-4
    y0 = [1 + lam * t0 ** 2 / (2 * n), lam * t0 / n]

    def rhs(t, y):
        return [y[1], lam * y[0] - (n - 1) / math.tanh(t) * y[1]]

    sol = solve_ivp(rhs, (t0, t_end), np.array(y0, dtype=complex), rtol=1e-12, atol=1e-14, method="DOP853")
    return complex(sol.y[0, -1])


@pytest.mark.parametrize("s", [0.5 + 2j, 0.3, 1.7 - 0.4j])
@pytest.mark.parametrize("n", [2, 3, 5])
def test_psi_at_origin(s, n):
    assert psi(SpectralParameter(s, n), 0.0) == 1


def test_psi_ode_oracle_n3():
    got = psi(SpectralParameter(0.5 + 1j, 3), 1.0)
    assert abs(got - ode_oracle(0.5 + 1j, 3, 1.0)) < 1e-8


def test_psi_closed_form_n3():
    # n = 3: psi_{1/2 + i tau}(t) = sin(2 tau t) / (2 tau sinh t)
    t = np.linspace(0.05, 6, 40)
    for tau in (0.3, 1.0, 4.0):
        ref = np.sin(2 * tau * t) / (2 * tau * np.sinh(t))
        got = psi(SpectralParameter.on_critical_line(tau, 3), t)
        assert np.max(np.abs(got - ref)) < 1e-10


@given(st.integers(2, 6), st.floats(0.5, 1.0), st.floats(-4, 4), st.floats(0.05, 2.5))
def test_psi_matches_hypergeometric(n, sr, si, t):
    s = complex(sr, si)
    ref = hyp_oracle(s, n, t)
    assert abs(psi(SpectralParameter(s, n), t) - ref) < 1e-8 * max(1.0, abs(ref))


@given(st.integers(2, 5), st.floats(-0.5, 1.5), st.floats(-5, 5), st.floats(0.0, 4.0))
def test_psi_symmetry(n, sr, si, t):
    s = complex(sr, si)
    a = psi(SpectralParameter(s, n), t)
    b = psi(SpectralParameter(1 - s, n), t)
    assert abs(a - b) < 1e-9 * max(1.0, abs(a))


def test_psi_rejects_negative_radius():
    with pytest.raises(DomainError):
        psi(SpectralParameter(0.5, 2), -1.0)


def test_lambda_of_s():
    for n in (2, 3, 6):
        assert lambda_of_s(SpectralParameter(0, n)) == 0
        assert lambda_of_s(SpectralParameter(1, n)) == 0
    for tau in (0.0, 0.7, 12.0):
        assert abs(lambda_of_s(SpectralParameter.on_critical_line(tau, 2)) + (0.25 + tau * tau)) < 1e-12


def test_laplacian_of_constant():
    f = RadialFunction.from_callable(lambda t: np.ones_like(t), 3, np.linspace(0, 5, 50))
    assert np.max(np.abs(radial_laplacian(f).values)) < 1e-10


def test_laplacian_of_cosh_symbolic():
    t = sp.Symbol("t", positive=True)
    expr = sp.cosh(t)
    lap = sp.simplify(sp.diff(expr, t, 2) + sp.coth(t) * sp.diff(expr, t))
    ref = sp.lambdify(t, lap, "numpy")
    grid = np.linspace(0.1, 4, 4001)
    f = RadialFunction.from_callable(np.cosh, 2, grid)
    got = radial_laplacian(f).values
    # one-sided stencils at the ends are only first order; compare the interior
    inner = slice(5, -5)
    assert np.max(np.abs(got - ref(grid))[inner] / ref(grid)[inner]) < 1e-5
    rule = RadialFunction.from_callable(np.cosh, 2, grid, derivative_rule=lambda x: (np.sinh(x), np.cosh(x)))
    assert np.max(np.abs(radial_laplacian(rule).values - ref(grid))) < 1e-10


def test_psi_is_eigenfunction():
    for n, s in ((2, 0.5 + 3j), (3, 0.5 + 1j), (4, 0.8 + 0.2j)):
        z = ZonalSphericalFunction(SpectralParameter(s, n))
        f = z.as_radial(np.linspace(0.1, 10, 200))
        res = radial_laplacian(f).values - z.eigenvalue * f.values
        assert np.max(np.abs(res)) < 1e-6


def test_laplacian_needs_five_samples():
    with pytest.raises(DomainError):
        radial_laplacian(RadialFunction(np.arange(4.0), np.ones(4), 2))


def gaussian(n):
    return RadialFunction.from_callable(lambda t: np.exp(-t * t), n, np.linspace(0, 8, 9))


QUAD = QuadratureSpec(tau_max=24, nodes=240, segments=12, radial_t_max=8, radial_nodes=320)


def test_transform_of_zero():
    f = RadialFunction.from_callable(np.zeros_like, 2, np.linspace(0, 8, 9))
    F = spherical_transform(f, QUAD)
    assert np.all(F.values == 0)


def test_transform_matches_direct_quadrature():
    # independent check at one spectral point with mpmath quadrature
    n, tau = 3, 1.3
    F = spherical_transform(gaussian(n), QUAD)
    i = int(np.argmin(np.abs(F.tau - tau)))
    tau = F.tau[i]
    ref = mpmath.quad(lambda t: mpmath.exp(-t * t) * mpmath.sin(2 * tau * t) / (2 * tau * mpmath.sinh(t))
                      * 4 * mpmath.pi * mpmath.sinh(t) ** 2, [0, 4, 10])
    assert abs(F.values[i] - complex(ref)) < 1e-10


@pytest.mark.parametrize("n", [2, 3])
def test_round_trip_and_plancherel(n):
    f = gaussian(n)
    F = spherical_transform(f, QUAD)
    t = np.linspace(0, 3, 13)
    back = inverse_transform(F, t)
    assert np.max(np.abs(back.values - np.exp(-t * t))) < 1e-8
    assert np.max(np.abs(back.values.imag)) < 1e-10
    a, b = l2_norm_squared(f, QUAD), plancherel_norm_squared(F)
    assert abs(a - b) < 1e-8 * a


@pytest.mark.parametrize("n", [2, 3, 4])
def test_inversion_constant_calibration(n):
    assert math.isclose(calibrate_inversion_constant(n), inversion_constant(n), rel_tol=1e-8)


def test_inversion_constant_n3():
    assert math.isclose(inversion_constant(3), 1 / (2 * math.pi ** 2), rel_tol=1e-14)


def test_single_node_is_scaled_psi():
    F = spherical_transform(gaussian(2), QUAD)
    k = 57
    F.values = np.zeros_like(F.values)
    F.values[k] = 1.0
    t = np.linspace(0, 4, 9)
    out = inverse_transform(F, t, check_tail=False).values
    ref = psi(SpectralParameter.on_critical_line(F.tau[k], 2), t)
    ratio = out / ref
    assert np.allclose(ratio, ratio[0], rtol=1e-9)


def test_radial_tail_error():
    f = RadialFunction.from_callable(np.ones_like, 2, np.linspace(0, 8, 9))
    with pytest.raises(ConvergenceError) as info:
        spherical_transform(f, QUAD)
    assert "radial_t_max" in str(info.value)


def test_spectral_tail_error():
    f = RadialFunction.from_callable(lambda t: np.exp(-t * t / 0.01), 2, np.linspace(0, 8, 9))
    F = spherical_transform(f, QuadratureSpec(tau_max=5, nodes=40))
    with pytest.raises(ConvergenceError):
        inverse_transform(F, [0.0, 1.0])


def test_quadrature_spec_validation():
    with pytest.raises(DomainError):
        QuadratureSpec(tau_max=0)
    with pytest.raises(DomainError):
        QuadratureSpec(nodes=4)
    with pytest.raises(DomainError):
        QuadratureSpec(scheme="simpson")
    assert QuadratureSpec().refined().nodes == 320
