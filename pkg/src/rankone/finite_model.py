"""Finite Gelfand-pair style models in which every spectral identity is a finite sum.

A model consists of a permutation group G with subgroups K, H, an optional
"lattice" Gamma and an optional parabolic-like P (with Theta = H n P).
Automorphic functions are functions on G that are left Gamma-invariant and
right K-invariant, with inner product

    <f1, f2> = (1/|Gamma|) sum_{x in G} f1(x) conj f2(x).

Omega is right convolution by a real, inversion-symmetric element of the group
algebra that is invariant under conjugation by K.  Periods over H are
(f)_H = (1/|Gamma n H|) sum_{h in H} f(h).

In exact mode every value is a ``Fraction`` (numpy object arrays) and all
identities are checked with ``==``; in float mode values are complex128 and
checks are relative.
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import sympy as sp

from .cplx import parse_complex, parse_exact
from .errors import ModelError

FLOAT_TOL = 1e-10
MODEL_DIR = Path(__file__).parent / "models"


# ------------------------------------------------------------------- groups

@dataclass(frozen=True)
class PermutationGroup:
    elements: tuple
    mul: np.ndarray
    inv: np.ndarray
    identity: int

    @property
    def order(self) -> int:
        return len(self.elements)

    @classmethod
    def generate(cls, generators: Sequence[Sequence[int]]) -> "PermutationGroup":
        gens = [tuple(int(v) for v in g) for g in generators]
        if not gens:
            raise ModelError("at least one generator is required")
        degree = len(gens[0])
        for g in gens:
            if len(g) != degree or sorted(g) != list(range(degree)):
                raise ModelError(f"{list(g)} is not a permutation of 0..{degree - 1}")
        ident = tuple(range(degree))
        seen = {ident: 0}
        order = [ident]
        queue = deque([ident])
        while queue:
            x = queue.popleft()
            for g in gens:
                y = tuple(x[g[i]] for i in range(degree))
                if y not in seen:
                    seen[y] = len(order)
                    order.append(y)
                    queue.append(y)
        n = len(order)
        if n > 10_000:
            raise ModelError(f"group of order {n} exceeds the supported size 10^4")
        mul = np.empty((n, n), dtype=np.int64)
        inv = np.empty(n, dtype=np.int64)
        for i, a in enumerate(order):
            for j, b in enumerate(order):
                # (a b)(k) = a(b(k))
                mul[i, j] = seen[tuple(a[b[k]] for k in range(degree))]
            ainv = [0] * degree
            for k, v in enumerate(a):
                ainv[v] = k
            inv[i] = seen[tuple(ainv)]
        return cls(elements=tuple(order), mul=mul, inv=inv, identity=0)

    def index_of(self, perm) -> int:
        try:
            return self.elements.index(tuple(int(v) for v in perm))
        except ValueError:
            raise ModelError(f"{list(perm)} is not an element of the group") from None

    def closure(self, idx: Sequence[int]) -> tuple:
        members = {self.identity}
        frontier = [self.identity]
        gens = list(idx)
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = int(self.mul[x, g])
                    if y not in members:
                        members.add(y)
                        nxt.append(y)
            frontier = nxt
        return tuple(sorted(members))

    def subgroup(self, spec) -> tuple:
        """A subgroup from {"generators": [...]} or {"elements": [...]} (closure is verified)."""
        if spec is None:
            return (self.identity,)
        if isinstance(spec, dict) and "elements" in spec:
            elems = tuple(sorted({self.index_of(p) for p in spec["elements"]}))
            es = set(elems)
            if self.identity not in es or any(int(self.mul[a, b]) not in es for a in elems for b in elems):
                raise ModelError("listed elements do not form a subgroup")
            return elems
        gens = spec["generators"] if isinstance(spec, dict) else spec
        return self.closure([self.index_of(p) for p in gens])


# ------------------------------------------------------------ linear algebra

def _zeros(n: int, exact: bool) -> np.ndarray:
    return np.array([Fraction(0)] * n, dtype=object) if exact else np.zeros(n, dtype=complex)


def _is_zero(v: np.ndarray, exact: bool, scale: float = 1.0) -> bool:
    if exact:
        return all(x == 0 for x in v)
    return float(np.max(np.abs(v))) <= 1e-9 * max(scale, 1.0)


def _to_fraction(x) -> Fraction:
    # nsimplify is unsafe here: it can rewrite a plain rational as a product of radicals
    x = sp.sympify(x)
    if isinstance(x, sp.Expr) and not isinstance(x, sp.Rational):
        x = sp.simplify(x)
    if not isinstance(x, sp.Rational):
        raise ModelError(f"value {x} is not rational; exact mode unavailable")
    return Fraction(int(x.p), int(x.q))


def _gram_schmidt(vectors, ip, exact: bool):
    out = []
    for v in vectors:
        w = v.copy()
        for u in out:
            w = w - u * (ip(w, u) / ip(u, u))
        scale = max((float(abs(complex(x))) for x in v), default=1.0) if not exact else 1.0
        if _is_zero(w, exact, scale):
            continue
        if not exact:
            w = w / math.sqrt(abs(ip(w, w)))
        out.append(w)
    return out


def _eigen(matrix, weights, exact: bool):
    """Orthogonal eigenbasis of a matrix self-adjoint for <c, d> = sum weights_i c_i conj d_i.

    Returns [(eigenvalue, [coefficient vectors])].
    """
    m = len(weights)

    def ip(c, d):
        return np.sum(np.array(weights, dtype=object if exact else float) * c * np.conj(d))

    if exact:
        M = sp.Matrix(m, m, lambda i, j: sp.Rational(matrix[i][j].numerator, matrix[i][j].denominator))
        out = []
        for val, _, vecs in sorted(M.eigenvects(), key=lambda e: float(sp.re(e[0]))):
            if not val.is_rational:
                raise ModelError(f"eigenvalue {val} is not rational; exact mode unavailable")
            cvecs = [np.array([_to_fraction(x) for x in v], dtype=object) for v in vecs]
            out.append((_to_fraction(val), _gram_schmidt(cvecs, ip, True)))
        return out
    w = np.asarray(weights, dtype=float)
    A = np.asarray(matrix, dtype=complex)
    d = np.sqrt(w)
    S = (d[:, None] * A) / d[None, :]
    if np.max(np.abs(S - S.conj().T)) > 1e-9 * max(1.0, float(np.max(np.abs(S)))):
        raise ModelError("operator is not self-adjoint on this space")
    vals, vecs = np.linalg.eigh(0.5 * (S + S.conj().T))
    groups = []
    for k in range(m):
        c = vecs[:, k] / d
        if groups and abs(vals[k] - groups[-1][0]) < 1e-9 * max(1.0, abs(vals[k])):
            groups[-1][1].append(c)
        else:
            groups.append((float(vals[k]), [c]))
    return groups


# -------------------------------------------------------------------- model

@dataclass(frozen=True)
class Eigenvector:
    value: object
    vector: np.ndarray
    norm2: object


@dataclass(frozen=True)
class FiniteModel:
    name: str
    group: PermutationGroup
    K: tuple
    H: tuple
    Gamma: tuple
    P: Optional[tuple]
    Theta: Optional[tuple]
    operator: dict
    exact: bool
    double_cosets: tuple
    spectrum: tuple
    characters: tuple = ()
    gelfand_pair: bool = False
    h_operator: dict = field(default_factory=dict)

    # -- basic operations ------------------------------------------------

    def zeros(self) -> np.ndarray:
        return _zeros(self.group.order, self.exact)

    def scalar(self, x):
        return parse_exact(x) if self.exact else complex(x)

    def inner(self, f1, f2):
        return np.sum(f1 * np.conj(f2)) / self._n(len(self.Gamma))

    def _n(self, k: int):
        return Fraction(k) if self.exact else float(k)

    def apply_omega(self, f: np.ndarray) -> np.ndarray:
        out = self.zeros()
        for y, w in self.operator.items():
            out = out + w * f[self.group.mul[:, y]]
        return out

    def period(self, f: np.ndarray):
        """(f)_H = (1/|Gamma n H|) sum_{h in H} f(h)."""
        return sum((f[h] for h in self.H), self._n(0) if self.exact else 0j) / self._n(self.gamma_h_order)

    @property
    def gamma_h_order(self) -> int:
        return len(set(self.Gamma) & set(self.H))

    def is_automorphic(self, f: np.ndarray) -> bool:
        mul = self.group.mul
        for g in self.Gamma:
            if not _equal(f[mul[g, :]], f, self.exact):
                return False
        for k in self.K:
            if not _equal(f[mul[:, k]], f, self.exact):
                return False
        return True

    def indicator(self, cells: Sequence[int]) -> np.ndarray:
        f = self.zeros()
        one = Fraction(1) if self.exact else 1.0
        for x in cells:
            f[x] = one
        return f

    def delta(self) -> np.ndarray:
        """delta(x) = #{(gamma, k): gamma x = k} / |K|; <f, delta> = f(1)."""
        mul = self.group.mul
        Kset = set(self.K)
        f = self.zeros()
        for x in range(self.group.order):
            c = sum(1 for g in self.Gamma if int(mul[g, x]) in Kset)
            f[x] = self._n(c) / self._n(len(self.K))
        return f

    def delta_local(self) -> np.ndarray:
        """#{h: x in hK} / |K|, the H-period delta before summing over Gamma."""
        mul = self.group.mul
        f = self.zeros()
        for h in self.H:
            for k in self.K:
                f[int(mul[h, k])] += self._n(1) / self._n(len(self.K))
        return f

    def delta_H(self) -> np.ndarray:
        """<f, delta_H> = (f)_H for automorphic f."""
        return self.gamma_average(self.delta_local())

    def gamma_average(self, u: np.ndarray) -> np.ndarray:
        """x -> (1/|Gamma n H|) sum_{gamma in Gamma} u(gamma x)."""
        out = self.zeros()
        for g in self.Gamma:
            out = out + u[self.group.mul[g, :]]
        return out / self._n(self.gamma_h_order)

    def random_automorphic(self, rng, low: int = -5, high: int = 5) -> np.ndarray:
        f = self.zeros()
        for cell in self.double_cosets:
            if self.exact:
                v = Fraction(int(rng.integers(low, high + 1)), int(rng.integers(1, 4)))
            else:
                v = complex(rng.normal(), rng.normal())
            for x in cell:
                f[x] = v
        return f

    def spectral_coefficients(self, f: np.ndarray) -> list:
        return [self.inner(f, phi.vector) for phi in self.spectrum]

    def to_summary(self) -> dict:
        return {"name": self.name, "order": self.group.order, "K": len(self.K), "H": len(self.H),
                "Gamma": len(self.Gamma), "P": len(self.P) if self.P else None,
                "Theta": len(self.Theta) if self.Theta else None, "exact": self.exact,
                "dimension": len(self.spectrum), "gelfand_pair": self.gelfand_pair,
                "eigenvalues": [str(e.value) if self.exact else float(np.real(e.value)) for e in self.spectrum]}


def _equal(a, b, exact: bool, tol: float = FLOAT_TOL) -> bool:
    if exact:
        return all(x == y for x, y in zip(a, b))
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    scale = max(float(np.max(np.abs(a), initial=0.0)), float(np.max(np.abs(b), initial=0.0)), 1e-300)
    return float(np.max(np.abs(a - b), initial=0.0)) <= tol * scale


def _deviation(a, b, floor: float = 0.0) -> float:
    """Relative gap; ``floor`` is the size of the summands, so exact zeros compare sensibly."""
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    b = np.atleast_1d(np.asarray(b, dtype=complex))
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))), floor, 1e-300)
    return float(np.max(np.abs(a - b))) / scale


def _double_cosets(group: PermutationGroup, left: Sequence[int], right: Sequence[int]) -> tuple:
    mul = group.mul
    seen = set()
    cells = []
    for x in range(group.order):
        if x in seen:
            continue
        cell = sorted({int(mul[mul[a, x], b]) for a in left for b in right})
        seen.update(cell)
        cells.append(tuple(cell))
    return tuple(cells)


def _operator_matrix(model_like, cells, weights_fn, exact):
    """Matrix of right convolution on the span of cell indicators, plus the Gram weights."""
    group, operator = model_like
    where = {}
    for i, cell in enumerate(cells):
        for x in cell:
            where[x] = i
    m = len(cells)
    zero = Fraction(0) if exact else 0.0
    A = [[zero] * m for _ in range(m)]
    for i, cell in enumerate(cells):
        r = cell[0]
        for y, w in operator.items():
            j = where[int(group.mul[r, y])]
            A[i][j] += w
    return A, [weights_fn(cell) for cell in cells]


def _cells_to_function(cells, coeffs, n, exact):
    f = _zeros(n, exact)
    for cell, c in zip(cells, coeffs):
        for x in cell:
            f[x] = c
    return f


def _hecke_commutative(group: PermutationGroup, K: Sequence[int]) -> bool:
    """Commutativity of the K-bi-invariant convolution algebra, by direct multiplication."""
    cells = _double_cosets(group, K, K)
    n = group.order
    vecs = []
    for cell in cells:
        v = np.zeros(n)
        v[list(cell)] = 1.0
        vecs.append(v)

    def conv(a, b):
        out = np.zeros(n)
        for x in np.nonzero(a)[0]:
            out[group.mul[x, :]] += a[x] * b
        return out

    for i in range(len(vecs)):
        for j in range(i + 1, len(vecs)):
            if not np.array_equal(conv(vecs[i], vecs[j]), conv(vecs[j], vecs[i])):
                return False
    return True


def _character_table(group: PermutationGroup, P: tuple, gens: Sequence[int], values, exact: bool) -> dict:
    table = {group.identity: Fraction(1) if exact else 1.0 + 0j}
    frontier = [group.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for g, v in zip(gens, values):
                y = int(group.mul[x, g])
                val = table[x] * v
                if y in table:
                    if (exact and table[y] != val) or (not exact and abs(table[y] - val) > 1e-12):
                        raise ModelError("character values are not a homomorphism on P")
                else:
                    table[y] = val
                    nxt.append(y)
        frontier = nxt
    if set(table) != set(P):
        raise ModelError("character generators do not generate P")
    return table


def build_model(spec: dict) -> FiniteModel:
    """Construct and validate a model from its JSON description."""
    exact = bool(spec.get("exact", False))
    conv = parse_exact if exact else parse_complex
    group = PermutationGroup.generate(spec["generators"])
    K = group.subgroup(spec["K"])
    H = group.subgroup(spec["H"])
    Gamma = group.subgroup(spec.get("Gamma"))
    P = group.subgroup(spec["P"]) if spec.get("P") else None
    Theta = tuple(sorted(set(H) & set(P))) if P else None
    operator = {}
    for term in spec["operator"]:
        y = group.index_of(term["element"])
        operator[y] = operator.get(y, Fraction(0) if exact else 0.0) + conv(term.get("weight", 1))
    for y, w in operator.items():
        wi = operator.get(int(group.inv[y]))
        if wi is None or (wi != w if exact else abs(complex(wi) - complex(w).conjugate()) > 1e-12):
            raise ModelError("operator is not symmetric under inversion")
        for k in K:
            c = int(group.mul[group.mul[k, y], group.inv[k]])
            if c not in operator or (operator[c] != w if exact else abs(complex(operator[c]) - complex(w)) > 1e-12):
                raise ModelError("operator is not invariant under conjugation by K (not K-bi-invariant)")
    cells = _double_cosets(group, Gamma, K)
    nG = len(Gamma)
    A, weights = _operator_matrix((group, operator), cells,
                                  lambda c: Fraction(len(c), nG) if exact else len(c) / nG, exact)
    spectrum = []
    for val, vecs in _eigen(A, weights, exact):
        for c in vecs:
            f = _cells_to_function(cells, c, group.order, exact)
            norm2 = sum(f[x] * np.conj(f[x]) for x in range(group.order)) / (Fraction(nG) if exact else nG)
            spectrum.append(Eigenvector(val, f, norm2 if exact else float(np.real(norm2))))
    h_operator = {}
    h_gens = spec["H"]["generators"] if isinstance(spec["H"], dict) and "generators" in spec["H"] else None
    if h_gens:
        for p in h_gens:
            for y in (group.index_of(p), int(group.inv[group.index_of(p)])):
                h_operator[y] = h_operator.get(y, Fraction(0) if exact else 0.0) + (1 if exact else 1.0)
    chars = []
    if P and spec.get("characters"):
        pgens = [group.index_of(p) for p in (spec["P"]["generators"] if isinstance(spec["P"], dict) else spec["P"])]
        for ch in spec["characters"]:
            chars.append(_character_table(group, P, pgens, [conv(v) for v in ch], exact))
    return FiniteModel(name=spec.get("name", "model"), group=group, K=K, H=H, Gamma=Gamma, P=P, Theta=Theta,
                       operator=operator, exact=exact, double_cosets=cells, spectrum=tuple(spectrum),
                       characters=tuple(chars), gelfand_pair=_hecke_commutative(group, K),
                       h_operator=h_operator)


def load_model(path, exact: Optional[bool] = None) -> FiniteModel:
    """Read a model file; bare names fall back to the bundled models.  ``exact`` overrides the file."""
    p = Path(path)
    if not p.exists() and (MODEL_DIR / p.name).exists():
        p = MODEL_DIR / p.name
    if not p.exists():
        raise ModelError(f"model file {str(path)!r} not found", path=str(path))
    with open(p) as fh:
        spec = json.load(fh)
    if exact is not None:
        spec["exact"] = exact
    return build_model(spec)


def bundled_models() -> list:
    return sorted(MODEL_DIR.glob("*.json"))


# ---------------------------------------------------------- Poincare series

@dataclass
class PoincareData:
    N: int
    lam: complex
    u: np.ndarray
    Pe: np.ndarray
    u_identity: np.ndarray
    checks: dict

    def P(self, x):
        return (x - self.lam) ** self.N


def _solve(model: FiniteModel, cells, rhs_cells, N, lam):
    exact = model.exact
    weights_fn = (lambda c: Fraction(len(c))) if exact else (lambda c: float(len(c)))
    A, _ = _operator_matrix((model.group, model.operator), cells, weights_fn, exact)
    m = len(cells)
    if exact:
        M = sp.Matrix(m, m, lambda i, j: sp.Rational(A[i][j].numerator, A[i][j].denominator))
        L = sp.Rational(lam.numerator, lam.denominator)
        PM = (M - L * sp.eye(m)) ** N
        if PM.det() == 0:
            bad = [str(v) for v in M.eigenvals() if v == L]
            raise ModelError("P(Omega) is singular", offending_eigenvalues=bad)
        b = sp.Matrix([sp.Rational(x.numerator, x.denominator) for x in rhs_cells])
        sol = PM.LUsolve(b)
        return [_to_fraction(x) for x in sol]
    M = np.array(A, dtype=complex)
    PM = np.linalg.matrix_power(M - lam * np.eye(m), N)
    vals = np.linalg.eigvals(M)
    bad = [complex(v) for v in vals if abs(v - lam) < 1e-12 * max(1.0, abs(lam))]
    if bad:
        raise ModelError("P(Omega) is singular", offending_eigenvalues=bad)
    return list(np.linalg.solve(PM, np.array(rhs_cells, dtype=complex)))


def poincare_series(model: FiniteModel, N: int, lam) -> PoincareData:
    """Pe = (1/|Gamma n H|) sum_gamma u(gamma x) where P(Omega) u = delta_local, P = (x - lam)^N.

    Also solves P(Omega) x = delta_H on automorphic functions directly and
    compares, and checks both spectral forms.
    """
    if N < 1:
        raise ModelError("N must be >= 1")
    lam = model.scalar(lam)
    bad = [str(e.value) for e in model.spectrum if (e.value - lam) == 0 or
           (not model.exact and abs(e.value - lam) < 1e-12 * max(1.0, abs(lam)))]
    if bad:
        raise ModelError("P(lambda_Phi) vanishes", offending_eigenvalues=bad)
    g = model.group
    n = g.order
    hk = _double_cosets(g, model.H, model.K)
    dl = model.delta_local()
    u = _cells_to_function(hk, _solve(model, hk, [dl[c[0]] for c in hk], N, lam), n, model.exact)
    Pe = model.gamma_average(u)
    dH = model.delta_H()
    cells = model.double_cosets
    x = _cells_to_function(cells, _solve(model, cells, [dH[c[0]] for c in cells], N, lam), n, model.exact)
    d = model.delta()
    u_id = _cells_to_function(cells, _solve(model, cells, [d[c[0]] for c in cells], N, lam), n, model.exact)

    def P(v):
        return (v - lam) ** N

    spec_Pe = model.zeros()
    spec_id = model.zeros()
    for phi in model.spectrum:
        spec_Pe = spec_Pe + phi.vector * (np.conj(model.period(phi.vector)) / (P(phi.value) * phi.norm2))
        spec_id = spec_id + phi.vector * (np.conj(phi.vector[g.identity]) / (P(phi.value) * phi.norm2))
    applied = Pe
    for _ in range(N):
        applied = model.apply_omega(applied) - lam * applied
    checks = {
        "P(Omega)Pe == delta_H": _equal(applied, dH, model.exact),
        "solve == Pe": _equal(x, Pe, model.exact),
        "spectral form == Pe": _equal(spec_Pe, Pe, model.exact),
        "identity spectral form == P(Omega)^-1 delta": _equal(spec_id, u_id, model.exact),
        "Pe right K-invariant": all(_equal(Pe[g.mul[:, k]], Pe, model.exact) for k in model.K),
        "Pe finite": bool(np.all(np.isfinite(np.asarray(Pe, dtype=complex)))),
    }
    return PoincareData(N=N, lam=lam, u=u, Pe=Pe, u_identity=u_id, checks=checks)


# ------------------------------------------------------ periods, expansions

@dataclass
class PeriodCheck:
    period: object
    bracket: object
    predicted: object
    holds: bool


def period_extraction(model: FiniteModel, pd: PoincareData, f: np.ndarray) -> PeriodCheck:
    """<f, Pe> against (f)_H / conj P(lambda_f) for an eigenvector f."""
    Of = model.apply_omega(f)
    mags = [abs(complex(v)) for v in f]
    if max(mags) == 0:
        return PeriodCheck(model.period(f), model.inner(f, pd.Pe), model.period(f), True)
    i = int(np.argmax(mags))
    lam_f = Of[i] / f[i]
    if model.exact:
        is_eig = _equal(Of, lam_f * f, True)
    else:
        op_norm = sum(abs(complex(w)) for w in model.operator.values())
        is_eig = float(np.max(np.abs(Of - lam_f * f))) <= FLOAT_TOL * max(mags) * max(1.0, op_norm)
    if not is_eig:
        raise ModelError("f is not an eigenvector of Omega")
    Pl = pd.P(lam_f)
    if Pl == 0:
        raise ModelError("lambda_f equals the shift", lam=str(lam_f))
    per = model.period(f)
    predicted = per / np.conj(Pl)
    bracket = model.inner(f, pd.Pe)
    floor = float(np.sum(np.abs(np.asarray(f, dtype=complex) * np.asarray(pd.Pe, dtype=complex))))
    holds = (bracket == predicted) if model.exact else _deviation(bracket, predicted, floor) < FLOAT_TOL
    return PeriodCheck(per, bracket, predicted, bool(holds))


def direct_bracket(model: FiniteModel, pd: PoincareData, f, fp):
    return model.inner(f * fp, pd.Pe)


def spectral_expansion(model: FiniteModel, pd: PoincareData, f, fp):
    """sum_Phi <f f', Phi> (Phi)_H / (conj P(lambda_Phi) ||Phi||^2)."""
    ff = f * fp
    total = Fraction(0) if model.exact else 0j
    for phi in model.spectrum:
        total += model.inner(ff, phi.vector) * model.period(phi.vector) / (np.conj(pd.P(phi.value)) * phi.norm2)
    return total


@dataclass(frozen=True)
class HBasisElement:
    vector: np.ndarray       # values on model.H, in that order
    norm2: object            # (F, F)_H
    theta_invariant: Optional[bool]


def h_basis(model: FiniteModel) -> list:
    """Orthogonal eigenbasis of the H-operator on functions on (Gamma n H)\\H.

    When Gamma n H is trivial and Theta is configured, the basis is split into
    left-Theta-invariant vectors and vectors whose Theta-average vanishes.
    """
    exact = model.exact
    g = model.group
    H = list(model.H)
    pos = {h: i for i, h in enumerate(H)}
    GH = sorted(set(model.Gamma) & set(model.H))
    cells = _double_cosets(g, GH, [g.identity])
    cells = [tuple(pos[x] for x in c) for c in cells if c[0] in pos]
    op = model.h_operator or {g.identity: Fraction(1) if exact else 1.0}
    where = {}
    for i, c in enumerate(cells):
        for x in c:
            where[x] = i
    m = len(cells)
    zero = Fraction(0) if exact else 0.0
    A = [[zero] * m for _ in range(m)]
    for i, c in enumerate(cells):
        r = H[c[0]]
        for y, w in op.items():
            A[i][where[pos[int(g.mul[r, y])]]] += w
    nGH = len(GH)
    weights = [Fraction(len(c), nGH) if exact else len(c) / nGH for c in cells]

    def to_h(coeffs):
        v = _zeros(len(H), exact)
        for c, val in zip(cells, coeffs):
            for x in c:
                v[x] = val
        return v

    def ip(a, b):
        return np.sum(a * np.conj(b)) / (Fraction(nGH) if exact else nGH)

    split = model.Theta is not None and nGH == 1
    out = []
    for _, vecs in _eigen(A, weights, exact):
        space = [to_h(c) for c in vecs]
        if split:
            avg = [_theta_average(model, v, pos) for v in space]
            rest = [v - a for v, a in zip(space, avg)]
            for group_vecs, flag in ((avg, True), (rest, False)):
                for v in _gram_schmidt(group_vecs, ip, exact):
                    out.append(HBasisElement(v, ip(v, v) if exact else float(np.real(ip(v, v))), flag))
        else:
            for v in space:
                out.append(HBasisElement(v, ip(v, v) if exact else float(np.real(ip(v, v))), None))
    return out


def _theta_average(model: FiniteModel, v: np.ndarray, pos: dict) -> np.ndarray:
    """F_Theta(h) = (1/|Theta|) sum_theta F(theta h)."""
    g = model.group
    out = _zeros(len(v), model.exact)
    for h, i in pos.items():
        acc = Fraction(0) if model.exact else 0j
        for t in model.Theta:
            acc += v[pos[int(g.mul[t, h])]]
        out[i] = acc / (Fraction(len(model.Theta)) if model.exact else len(model.Theta))
    return out


def _h_pairing(model: FiniteModel, phi_on_H: np.ndarray, F: np.ndarray):
    """(phi, F)_H = (1/|Gamma n H|) sum_h phi(h) conj F(h)."""
    n = model.gamma_h_order
    return np.sum(phi_on_H * np.conj(F)) / (Fraction(n) if model.exact else n)


def _is_left_H_invariant(model: FiniteModel, u: np.ndarray) -> bool:
    return all(_equal(u[model.group.mul[h, :]], u, model.exact) for h in model.H)


def moment_expansion(model: FiniteModel, pd: PoincareData, f, fp, u: Optional[np.ndarray] = None,
                     basis: Optional[list] = None):
    """(1/|H|) sum_g conj u(g) sum_F (g.f, F)_H (g.f', conj F)_H / (F, F)_H."""
    u = pd.u if u is None else u
    if not _is_left_H_invariant(model, u):
        raise ModelError("u must be left H-invariant")
    basis = h_basis(model) if basis is None else basis
    g = model.group
    H = np.array(model.H)
    total = Fraction(0) if model.exact else 0j
    for x in range(g.order):
        if (u[x] == 0) if model.exact else abs(u[x]) == 0:
            continue
        cols = g.mul[H, x]
        fx, fpx = f[cols], fp[cols]
        inner = Fraction(0) if model.exact else 0j
        for F in basis:
            inner += _h_pairing(model, fx, F.vector) * _h_pairing(model, fpx, np.conj(F.vector)) / F.norm2
        total += np.conj(u[x]) * inner
    return total / (Fraction(len(model.H)) if model.exact else len(model.H))


@dataclass
class ExpansionReport:
    direct: object
    spectral: object
    moment: object
    exact: bool
    deviation: float

    @property
    def passed(self) -> bool:
        if self.exact:
            return self.direct == self.spectral == self.moment
        return self.deviation < FLOAT_TOL


def verify_two_expansions(model: FiniteModel, pd: PoincareData, f, fp, basis=None) -> ExpansionReport:
    d = direct_bracket(model, pd, f, fp)
    s = spectral_expansion(model, pd, f, fp)
    m = moment_expansion(model, pd, f, fp, basis=basis)
    floor = float(np.sum(np.abs(np.asarray(f * fp, dtype=complex) * np.asarray(pd.Pe, dtype=complex))))
    dev = max(_deviation(d, s, floor), _deviation(d, m, floor), _deviation(s, m, floor))
    return ExpansionReport(d, s, m, model.exact, dev)


# ------------------------------------------------------------------ weights

def _is_one(v) -> bool:
    return v == 1 if isinstance(v, Fraction) else abs(complex(v) - 1) < 1e-12


def eisenstein_vector(model: FiniteModel, character: int = 0) -> np.ndarray:
    """Finite analogue of E_chi: (1/|Gamma n P|) sum_gamma phi(gamma g), phi(p k) = chi(p)."""
    if model.P is None:
        raise ModelError("model has no parabolic-like subgroup P")
    if not model.characters:
        raise ModelError("model defines no characters of P")
    chi = model.characters[character]
    g = model.group
    exact = model.exact
    for t in set(model.P) & set(model.K):
        if not _is_one(chi[t]):
            raise ModelError("character must be trivial on P n K")
    for t in model.Theta:
        if not _is_one(chi[t]):
            raise ModelError("character must be trivial on Theta")
    phi = [None] * g.order
    for p in model.P:
        for k in model.K:
            phi[int(g.mul[p, k])] = chi[p]
    if any(v is None for v in phi):
        raise ModelError("G is not P K; induced vector undefined")
    phi = np.array(phi, dtype=object if exact else complex)
    GP = set(model.Gamma) & set(model.P)
    for t in GP:
        if not _is_one(chi[t]):
            raise ModelError("character must be trivial on Gamma n P")
    out = _zeros(g.order, exact)
    for gam in model.Gamma:
        out = out + phi[g.mul[gam, :]]
    return out / (Fraction(len(GP)) if exact else len(GP))


@dataclass
class WeightResult:
    X: np.ndarray
    weights: list
    theta_form: list
    total: object


def weight_kernel(model: FiniteModel, f, fp, u: np.ndarray, basis: Optional[list] = None) -> WeightResult:
    """X(h, h') = sum_p f(hp) f'(h'p) conj u(p) and weight_F = sum conj F(h) F(h') X / (|Theta| (F, F)_H).

    ``theta_form`` recomputes each weight from Theta-averaged F, which only
    agrees when X is left Theta-invariant (Eisenstein-like f, f').
    """
    if model.P is None:
        raise ModelError("weight_kernel needs a parabolic-like subgroup P")
    if len(model.Gamma) != 1:
        raise ModelError("weight_kernel is implemented for trivial Gamma")
    g = model.group
    if len(model.H) * len(model.P) != g.order * len(model.Theta):
        raise ModelError("G is not H P")
    basis = h_basis(model) if basis is None else basis
    exact = model.exact
    H, P = list(model.H), list(model.P)
    nh = len(H)
    X = np.empty((nh, nh), dtype=object if exact else complex)
    for i, h in enumerate(H):
        for j, hp in enumerate(H):
            acc = Fraction(0) if exact else 0j
            for p in P:
                acc += f[int(g.mul[h, p])] * fp[int(g.mul[hp, p])] * np.conj(u[p])
            X[i, j] = acc
    pos = {h: i for i, h in enumerate(H)}
    nt = Fraction(len(model.Theta)) if exact else len(model.Theta)
    weights, theta_form = [], []
    for F in basis:
        v = F.vector
        w = np.conj(v) @ X @ v / (nt * F.norm2)
        weights.append(w)
        Ft = _theta_average(model, v, pos)
        # summing over all of H counts each Theta-coset pair |Theta|^2 times
        theta_form.append((np.conj(Ft) @ X @ Ft) / (nt * F.norm2))
    total = sum(weights, Fraction(0) if exact else 0j)
    return WeightResult(X=X, weights=weights, theta_form=theta_form, total=total)


# ------------------------------------------------------------ Sobolev suite

@dataclass
class SobolevSuiteReport:
    delta_expansion: bool
    parseval: bool
    duality: bool
    duality_pairs: int
    resolvent: list
    resolvent_ok: bool
    counting: list
    counting_monotone: bool
    norms: dict

    @property
    def passed(self) -> bool:
        return (self.delta_expansion and self.parseval and self.duality and self.resolvent_ok
                and self.counting_monotone)


def sobolev_norm_squared(model: FiniteModel, f, ell: float) -> float:
    """sum_Phi |<f, Phi>|^2 / ||Phi||^2 (1 + |lambda_Phi|)^ell."""
    tot = 0.0
    for phi in model.spectrum:
        c = model.inner(f, phi.vector)
        tot += float(abs(complex(c)) ** 2 / float(phi.norm2)) * (1.0 + abs(complex(phi.value))) ** ell
    return tot


def automorphic_sobolev_suite(model: FiniteModel, seed: int = 0, pairs: int = 50, ell: float = 1.5) -> SobolevSuiteReport:
    rng = np.random.default_rng(seed)
    exact = model.exact
    g = model.group
    d = model.delta()
    recon = model.zeros()
    for phi in model.spectrum:
        recon = recon + phi.vector * (np.conj(phi.vector[g.identity]) / phi.norm2)
    delta_ok = _equal(recon, d, exact)

    parseval_ok = True
    for _ in range(5):
        f = model.random_automorphic(rng)
        lhs = sum((c * np.conj(c) / phi.norm2 for c, phi in zip(model.spectral_coefficients(f), model.spectrum)),
                  Fraction(0) if exact else 0j)
        rhs = model.inner(f, f)
        parseval_ok &= (lhs == rhs) if exact else _deviation(lhs, rhs) < FLOAT_TOL

    dual_ok = True
    for _ in range(pairs):
        f = model.random_automorphic(rng)
        phi = model.random_automorphic(rng)
        lhs = abs(complex(model.inner(f, phi)))
        rhs = math.sqrt(sobolev_norm_squared(model, f, -ell) * sobolev_norm_squared(model, phi, ell))
        dual_ok &= lhs <= rhs * (1 + 1e-12)

    # resolvent on automorphic functions: ||(Omega - lam)^{-1}|| = 1 / dist
    vals = np.array([complex(e.value).real for e in model.spectrum])
    cells = model.double_cosets
    A, weights = _operator_matrix((g, model.operator), cells, lambda c: float(len(c)), False)
    w = np.sqrt(np.array(weights, dtype=float))
    S = (w[:, None] * np.array(A, dtype=complex)) / w[None, :]
    S = 0.5 * (S + S.conj().T)
    top = float(vals.max())
    resolvent = []
    ok = True
    for r in (1.0, 1e-1, 1e-2, 1e-3):
        lam = top + r
        norm = float(np.linalg.norm(np.linalg.inv(S - lam * np.eye(len(S))), 2))
        resolvent.append({"distance": r, "norm": norm, "norm_times_distance": norm * r})
        ok &= abs(norm * r - 1.0) < 1e-8
    counting = []
    for T in np.linspace(0.0, math.sqrt(float(np.max(np.abs(vals)))) + 1.0, 12):
        s = sum(float(abs(complex(phi.vector[g.identity])) ** 2 / float(phi.norm2))
                for phi in model.spectrum if abs(complex(phi.value)) < T * T)
        counting.append({"T": float(T), "N": s})
    mono = all(a["N"] <= b["N"] + 1e-15 for a, b in zip(counting, counting[1:]))
    f = model.random_automorphic(rng)
    norms = {str(l): math.sqrt(sobolev_norm_squared(model, f, l)) for l in (-2.0, -1.0, 0.0, 1.0, 2.0)}
    return SobolevSuiteReport(delta_ok, bool(parseval_ok), bool(dual_ok), pairs, resolvent, bool(ok), counting,
                              mono, norms)


# ---------------------------------------------------------------- full run

def run_suite(model: FiniteModel, N: int = 2, lam=None, seed: int = 0, pairs: int = 20) -> dict:
    """Every finite-model check, collected into a JSON-ready report."""
    rng = np.random.default_rng(seed)
    vals = [complex(e.value).real for e in model.spectrum]
    if lam is None:
        lam = Fraction(int(math.floor(min(vals))) - 1) if model.exact else min(vals) - 1.0
    pd = poincare_series(model, N, lam)
    basis = h_basis(model)
    two = []
    for _ in range(pairs):
        two.append(verify_two_expansions(model, pd, model.random_automorphic(rng), model.random_automorphic(rng),
                                         basis=basis))
    eig_pairs = []
    for _ in range(pairs):
        i, j = rng.integers(0, len(model.spectrum), size=2)
        eig_pairs.append(verify_two_expansions(model, pd, model.spectrum[i].vector, model.spectrum[j].vector,
                                               basis=basis))
    periods = [period_extraction(model, pd, phi.vector) for phi in model.spectrum]
    sob = automorphic_sobolev_suite(model, seed=seed)
    report = {
        "model": model.to_summary(),
        "N": N,
        "lambda": str(lam) if model.exact else complex(lam).real,
        "poincare": pd.checks,
        "two_expansions": {"pairs": len(two), "passed": all(r.passed for r in two),
                           "max_deviation": max(r.deviation for r in two)},
        "eigenvector_pairs": {"pairs": len(eig_pairs), "passed": all(r.passed for r in eig_pairs),
                              "max_deviation": max(r.deviation for r in eig_pairs)},
        "period_identity": all(p.holds for p in periods),
        "sobolev": {"delta_expansion": sob.delta_expansion, "parseval": sob.parseval, "duality": sob.duality,
                    "resolvent": sob.resolvent, "resolvent_ok": sob.resolvent_ok,
                    "counting_monotone": sob.counting_monotone},
    }
    if model.P is not None and len(model.Gamma) == 1 and model.characters:
        wres = []
        for ci in range(len(model.characters)):
            for cj in range(len(model.characters)):
                f, fp = eisenstein_vector(model, ci), eisenstein_vector(model, cj)
                wr = weight_kernel(model, f, fp, pd.u, basis)
                mom = moment_expansion(model, pd, f, fp, basis=basis)
                floor = float(sum(abs(complex(w)) for w in wr.weights))
                dev = _deviation(wr.total, mom, floor)
                ok = (wr.total == mom) if model.exact else dev < FLOAT_TOL
                zero_ok = all((w == 0) if model.exact else abs(w) < FLOAT_TOL * max(floor, 1e-300)
                              for w, F in zip(wr.weights, basis) if F.theta_invariant is False)
                theta_ok = all((a == b) if model.exact else _deviation(a, b, floor) < FLOAT_TOL
                               for a, b in zip(wr.weights, wr.theta_form))
                wres.append({"characters": [ci, cj], "reassembly": bool(ok), "deviation": dev,
                             "theta_null_weights_vanish": bool(zero_ok), "theta_form_agrees": bool(theta_ok)})
        report["weights"] = wres
    checks = [all(pd.checks.values()), report["two_expansions"]["passed"], report["eigenvector_pairs"]["passed"],
              report["period_identity"], sob.passed]
    if "weights" in report:
        checks += [w["reassembly"] and w["theta_null_weights_vanish"] and w["theta_form_agrees"]
                   for w in report["weights"]]
    report["passed"] = bool(all(checks))
    return report
