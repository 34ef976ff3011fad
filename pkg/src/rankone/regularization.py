"""Regularizing products of two Eisenstein series.

The constant term of E_a E_b is

    y^{a+b} + c_a y^{1-a+b} + c_b y^{a+1-b} + c_a c_b y^{2-a-b}

up to rapidly decaying terms.  A term y^e with Re e > 1/2 obstructs square
integrability; subtracting coeff * E_e removes it and leaves coeff * c_e y^{1-e},
whose exponent has real part below 1/2.  The symbolic layer below only moves
exponents and coefficient tags around; numerical c-values are injected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import BoundaryError, DomainError, PoleError
from .geometry import Growth, GrowthClass, classify_growth

THRESHOLD = 0.5
BOUNDARY_TOL = 1e-12
POLE_RADIUS = 1e-2

SLOTS = ("1", "c_a", "c_b", "c_a*c_b")


@dataclass(frozen=True)
class ExponentTerm:
    coeff_tag: str
    exponent: complex
    coeff_value: Optional[complex] = None

    def __post_init__(self):
        if self.coeff_tag not in SLOTS + ("-c_e",):
            raise DomainError(f"unknown coefficient tag {self.coeff_tag!r}", "coeff_tag")
        object.__setattr__(self, "exponent", complex(self.exponent))


def product_constant_term(a: complex, b: complex) -> list:
    a, b = complex(a), complex(b)
    exps = (a + b, 1 - a + b, a + 1 - b, 2 - a - b)
    return [ExponentTerm(tag, e) for tag, e in zip(SLOTS, exps)]


def _is_boundary(e: complex) -> bool:
    return abs(e.real - THRESHOLD) <= BOUNDARY_TOL


def select_singular(terms: Sequence[ExponentTerm]) -> list:
    """Terms with Re(exponent) > 1/2; boundary terms are excluded (see ``boundary_terms``)."""
    return [t for t in terms if t.exponent.real > THRESHOLD and not _is_boundary(t.exponent)]


def boundary_terms(terms: Sequence[ExponentTerm]) -> list:
    return [t for t in terms if _is_boundary(t.exponent)]


@dataclass(frozen=True)
class Subtraction:
    coeff_tag: str
    coeff_value: complex
    parameter: complex


@dataclass
class RegularizedExpression:
    a: complex
    b: complex
    c_a: complex
    c_b: complex
    subtractions: list
    surviving: list = field(default_factory=list)
    certificate: Optional[GrowthClass] = None

    def to_dict(self) -> dict:
        def cx(z):
            z = complex(z)
            return {"re": z.real, "im": z.imag}
        return {
            "a": cx(self.a),
            "b": cx(self.b),
            "subtractions": [{"coeff_tag": s.coeff_tag, "coeff_value": cx(s.coeff_value),
                              "parameter": cx(s.parameter)} for s in self.subtractions],
            "surviving_exponents": [cx(t.exponent) for t in self.surviving],
            "certificate": {"sigma": self.certificate.sigma,
                            "classification": self.certificate.classification.value},
        }


def _coefficient(tag: str, c_a: complex, c_b: complex) -> complex:
    return {"1": 1.0 + 0j, "c_a": c_a, "c_b": c_b, "c_a*c_b": c_a * c_b}[tag]


def _lookup(c_values: Mapping, key: complex, name: str) -> complex:
    for k, v in c_values.items():
        if k == name or (not isinstance(k, str) and complex(k) == key):
            return complex(v)
    raise DomainError(f"c-value for {name}={key} not supplied", f"c_values contains {name}", parameter=key)


def _certify(a, b, c_a, c_b, subtractions) -> RegularizedExpression:
    chosen = {s.coeff_tag for s in subtractions}
    surviving = [ExponentTerm(t.coeff_tag, t.exponent, _coefficient(t.coeff_tag, c_a, c_b))
                 for t in product_constant_term(a, b) if t.coeff_tag not in chosen]
    surviving += [ExponentTerm("-c_e", 1 - s.parameter) for s in subtractions]
    sigma = max(t.exponent.real for t in surviving)
    return RegularizedExpression(a=a, b=b, c_a=c_a, c_b=c_b, subtractions=list(subtractions),
                                 surviving=surviving, certificate=classify_growth(sigma))


def regularize(a: complex, b: complex, c_values: Mapping) -> RegularizedExpression:
    """F = E_a E_b - sum over singular slots of coeff * E_e, with a growth certificate.

    ``c_values`` maps a and b (or the strings "a", "b") to c_a and c_b.
    """
    a, b = complex(a), complex(b)
    c_a = _lookup(c_values, a, "a")
    c_b = _lookup(c_values, b, "b")
    terms = product_constant_term(a, b)
    edge = boundary_terms(terms)
    if edge:
        raise BoundaryError("exponent with real part exactly 1/2; no subtraction rule applies",
                            exponents=[t.exponent for t in edge])
    subtractions = []
    for t in select_singular(terms):
        if abs(t.exponent - 1.0) < POLE_RADIUS:
            raise PoleError(f"singular exponent {t.exponent} hits the Eisenstein pole at 1", argument=t.exponent)
        subtractions.append(Subtraction(t.coeff_tag, _coefficient(t.coeff_tag, c_a, c_b), t.exponent))
    expr = _certify(a, b, c_a, c_b, subtractions)
    if expr.certificate.classification is not Growth.SQUARE_INTEGRABLE:
        raise DomainError("surviving exponent not below 1/2", "surviving Re<1/2",
                          sigma=expr.certificate.sigma)
    return expr


def unregularized(a: complex, b: complex, c_values: Mapping) -> RegularizedExpression:
    """The bare product E_a E_b, wrapped so it can be fed to ``verify_l2_surrogate``."""
    a, b = complex(a), complex(b)
    return _certify(a, b, _lookup(c_values, a, "a"), _lookup(c_values, b, "b"), [])


# ------------------------------------------------------------ numerical check

@dataclass
class L2SurrogateReport:
    sigma_hat: float
    classification: str
    passed: bool
    inconclusive: bool
    heights: list
    constant_terms: list
    expected_sigma: float


DEFAULT_SURROGATE_HEIGHTS = tuple(np.geomspace(1.0, 1e6, 61))


def verify_l2_surrogate(expr: RegularizedExpression, heights: Optional[Sequence[float]] = None,
                        x_nodes: int = 32, blocks: int = 6) -> L2SurrogateReport:
    """Fit the growth exponent of the constant term of the realized F.

    At each height the x-average of E_a E_b - sum coeff E_e is computed from
    pointwise values.  Complex exponents make |constant term| oscillate in
    log y, so the slope is taken through the per-block maxima of log|CT|.
    """
    from .eisenstein2d import FOURIER, EisensteinSeries

    ys = np.asarray(heights if heights is not None else DEFAULT_SURROGATE_HEIGHTS, dtype=float)
    if ys.size < 2 * blocks or np.any(ys <= 0):
        raise DomainError(f"need at least {2 * blocks} positive heights", "len(heights)>=2*blocks")
    Ea = EisensteinSeries(expr.a, FOURIER)
    Eb = EisensteinSeries(expr.b, FOURIER)
    subs = [(s.coeff_value, EisensteinSeries(s.parameter, FOURIER)) for s in expr.subtractions]
    xs = np.arange(x_nodes) / x_nodes
    ct = []
    for y in ys:
        vals = []
        for x in xs:
            z = complex(x, y)
            v = Ea(z) * Eb(z) - sum(c * E(z) for c, E in subs)
            vals.append(v)
        ct.append(complex(np.mean(vals)))
    mags = np.abs(np.array(ct))
    expected = expr.certificate.sigma
    logy = np.log(ys)
    finite = np.isfinite(mags)
    if not finite.all():
        return L2SurrogateReport(math.nan, "inconclusive", False, True, ys.tolist(), ct, expected)
    edges = np.linspace(logy[0], logy[-1], blocks + 1)
    px, py = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = (logy >= lo) & (logy <= hi) & (mags > 0)
        if sel.any():
            i = np.argmax(np.where(sel, mags, -np.inf))
            px.append(logy[i])
            py.append(math.log(mags[i]))
    if len(px) < 3:
        return L2SurrogateReport(math.nan, "inconclusive", False, True, ys.tolist(), ct, expected)
    sigma_hat = float(np.polyfit(px, py, 1)[0])
    g = classify_growth(sigma_hat)
    return L2SurrogateReport(sigma_hat=sigma_hat, classification=g.classification.value,
                             passed=g.classification is Growth.SQUARE_INTEGRABLE, inconclusive=False,
                             heights=ys.tolist(), constant_terms=ct, expected_sigma=expected)
