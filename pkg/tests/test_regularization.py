import pytest
from hypothesis import assume, given, strategies as st

from rankone.eisenstein2d import scattering_coefficient
from rankone.errors import BoundaryError, DomainError, PoleError
from rankone.geometry import Growth
from rankone.regularization import (SLOTS, ExponentTerm, boundary_terms, product_constant_term, regularize,
                                    select_singular, unregularized, verify_l2_surrogate)


def cvals(a, b):
    return {"a": scattering_coefficient(a), "b": scattering_coefficient(b)}


def brute_selection(a, b):
    """Slots whose exponent has real part strictly above 1/2, by direct enumeration."""
    exps = {"1": a + b, "c_a": 1 - a + b, "c_b": a + 1 - b, "c_a*c_b": 2 - a - b}
    return {k for k, e in exps.items() if e.real > 0.5}


def test_four_terms():
    a, b = 0.3 + 1j, 1.4 - 2j
    terms = product_constant_term(a, b)
    assert [t.coeff_tag for t in terms] == list(SLOTS)
    assert [t.exponent for t in terms] == [a + b, 1 - a + b, a + 1 - b, 2 - a - b]


def test_equal_parameters():
    a = 0.7 + 0.1j
    exps = [t.exponent for t in product_constant_term(a, a)]
    assert exps == [2 * a, 1, 1, 2 - 2 * a]


def test_critical_line_all_real_part_one():
    terms = product_constant_term(0.5 + 2j, 0.5 - 7j)
    assert all(abs(t.exponent.real - 1) < 1e-15 for t in terms)
    assert len(select_singular(terms)) == 4


def test_selection_examples():
    sel = select_singular(product_constant_term(1.2, 0.5 + 3j))
    assert {t.coeff_tag for t in sel} == {"1", "c_b"}
    sel = select_singular(product_constant_term(0.2 + 1j, 0.2 - 3j))
    assert {t.coeff_tag for t in sel} == {"c_a", "c_b", "c_a*c_b"}


@given(st.floats(-1, 2), st.floats(-5, 5), st.floats(-1, 2), st.floats(-5, 5))
def test_selection_matches_brute_force(ar, ai, br, bi):
    a, b = complex(ar, ai), complex(br, bi)
    terms = product_constant_term(a, b)
    assume(not boundary_terms(terms))
    assert {t.coeff_tag for t in select_singular(terms)} == brute_selection(a, b)


@pytest.mark.parametrize("a,b,expected", [
    (1.2, 0.5 + 3j, 2),
    (0.5 + 2j, 0.5 + 5j, 4),
    (0.2 + 1j, 0.2 + 4j, 3),
])
def test_subtraction_counts(a, b, expected):
    expr = regularize(a, b, cvals(a, b))
    assert len(expr.subtractions) == expected
    assert expr.certificate.classification is Growth.SQUARE_INTEGRABLE
    assert all(t.exponent.real < 0.5 for t in expr.surviving)


def test_four_subtraction_coefficients():
    a, b = 0.5 + 2j, 0.5 + 5j
    c = cvals(a, b)
    expr = regularize(a, b, c)
    got = {s.coeff_tag: (s.coeff_value, s.parameter) for s in expr.subtractions}
    assert got == {"1": (1, a + b), "c_a": (c["a"], 1 - a + b), "c_b": (c["b"], a + 1 - b),
                   "c_a*c_b": (c["a"] * c["b"], 2 - a - b)}


def test_boundary_error():
    a, b = 0.25, 0.25 + 1j
    with pytest.raises(BoundaryError) as info:
        regularize(a, b, {"a": 1.0, "b": 1.0})
    assert info.value.details["exponents"]


def test_pole_error():
    a, b = 0.5 + 2j, 0.5 - 2j  # a + b = 1
    with pytest.raises(PoleError):
        regularize(a, b, cvals(a, b))


def test_missing_c_value():
    with pytest.raises(DomainError):
        regularize(1.2, 0.5 + 3j, {"a": 1.0})


def test_numeric_keys_accepted():
    a, b = 1.2, 0.5 + 3j
    expr = regularize(a, b, {a: scattering_coefficient(a), b: scattering_coefficient(b)})
    assert len(expr.subtractions) == 2


def test_unknown_tag():
    with pytest.raises(DomainError):
        ExponentTerm("c_z", 1.0)


def test_to_dict_shape():
    d = regularize(1.2, 0.5 + 3j, cvals(1.2, 0.5 + 3j)).to_dict()
    assert set(d) == {"a", "b", "subtractions", "surviving_exponents", "certificate"}
    assert d["certificate"]["classification"] == "square_integrable"


@pytest.mark.slow
def test_surrogate_regularized_vs_bare():
    a, b = 1.2, 0.5 + 3j
    c = cvals(a, b)
    good = verify_l2_surrogate(regularize(a, b, c))
    assert good.passed and good.sigma_hat < 0.5
    bare = verify_l2_surrogate(unregularized(a, b, c))
    assert not bare.passed
    assert abs(bare.sigma_hat - (a + b).real) < 0.1


@pytest.mark.slow
def test_surrogate_four_subtractions():
    a, b = 0.5 + 2j, 0.5 + 5j
    rep = verify_l2_surrogate(regularize(a, b, cvals(a, b)))
    assert rep.passed and not rep.inconclusive


def test_surrogate_too_few_heights():
    with pytest.raises(DomainError):
        verify_l2_surrogate(regularize(1.2, 0.5 + 3j, cvals(1.2, 0.5 + 3j)), heights=[1.0, 2.0])
