"""Fusion ring of the atypical block and of typical modules.

Atypical classes live in the quotient ring Q[X, Y, Z, W] / (2T_{p+}(X/2) - Z - W,
2T_{p-}(Y/2) - Z - W, ZW - 1) through the dictionary
[I(r,s;n)] <-> U_{r-1}(X/2) U_{s-1}(Y/2) Z^n. The three generators have
pairwise coprime leading monomials under lex order, so they already form a
Groebner basis and remainders are normal forms.
"""
import dataclasses
import functools
import logging
from collections import defaultdict
from fractions import Fraction
from typing import Dict, Iterable, List, Literal, Optional, Sequence, Tuple

import mpmath
import numpy as np
from sympy.polys.domains import QQ
from sympy.polys.orderings import lex
from sympy.polys.rings import ring

from singlet.domain import interfaces, labels, model, modular, qdim, value

logger = logging.getLogger(__name__)

VERLINDE_TOL = 1e-9
WEIGHT_DIGITS = 12

Monomial = Tuple[int, int, int]
LaurentNF = Dict[Monomial, int]


# ---- Related errors ----
class DictionaryValidationError(RuntimeError):
    pass


class VerlindeIntegralityError(value.NumericalError):
    pass


class TypicalInRingError(ValueError):
    pass


# ---- Chebyshev polynomials ----
def chebyshev(kind: Literal["first", "second"], n: int, x):
    """T_n or U_n at x; x may be a scalar or any ring element."""
    zero = x * 0
    if kind == "second":
        if n == -1:
            return zero
        if n == -2:
            return zero - 1
        if n < -2:
            return -chebyshev("second", -n - 2, x)
        previous, current = zero, zero + 1
        for _ in range(n):
            previous, current = current, 2 * x * current - previous
        return current
    if kind == "first":
        n = abs(n)
        previous, current = x, zero + 1
        for _ in range(n):
            previous, current = current, 2 * x * current - previous
        return current
    raise ValueError(f"Chebyshev kind must be 'first' or 'second', but was given: {kind!r}")


# ---- Elements ----
@dataclasses.dataclass(frozen=True)
class TypicalWeight:
    """lambda = base + kappa * shift; base is a rounded float tag, shift is exact."""

    base: complex = 0j
    shift: Fraction = Fraction(0)

    @classmethod
    def of(cls, weight) -> "TypicalWeight":
        weight = complex(weight)
        return cls(base=complex(round(weight.real, WEIGHT_DIGITS), round(weight.imag, WEIGHT_DIGITS)))

    def moved(self, units: Fraction) -> "TypicalWeight":
        return TypicalWeight(self.base, self.shift + units)

    def __add__(self, other: "TypicalWeight") -> "TypicalWeight":
        total = self.base + other.base
        return TypicalWeight(
            complex(round(total.real, WEIGHT_DIGITS), round(total.imag, WEIGHT_DIGITS)),
            self.shift + other.shift,
        )

    def value(self, params: value.ModelParams) -> mpmath.mpc:
        return mpmath.mpc(self.base) + params.kappa * mpmath.mpf(self.shift.numerator) / self.shift.denominator


@dataclasses.dataclass()
class FusionElement:
    atypical_part: Dict[Tuple[int, int, int], int] = dataclasses.field(default_factory=dict)
    typical_part: Dict[TypicalWeight, int] = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        self.atypical_part = {k: c for k, c in self.atypical_part.items() if c}
        self.typical_part = {k: c for k, c in self.typical_part.items() if c}

    @classmethod
    def atypical(cls, r: int, s: int, n: int, coefficient: int = 1) -> "FusionElement":
        return cls(atypical_part={(r, s, n): coefficient})

    @classmethod
    def typical(cls, weight, coefficient: int = 1) -> "FusionElement":
        key = weight if isinstance(weight, TypicalWeight) else TypicalWeight.of(weight)
        return cls(typical_part={key: coefficient})

    @classmethod
    def from_label(cls, label: interfaces.ModuleLabel) -> "FusionElement":
        if isinstance(label, labels.Typical):
            return cls.typical(label.weight)
        if isinstance(label, labels.AtypicalI):
            return cls.atypical(label.r, label.s, label.n)
        raise labels.InvalidModuleLabel(f"{label.kind()} classes are not generators of the fusion ring")

    @staticmethod
    def _merge(left: dict, right: dict, sign: int) -> dict:
        merged = defaultdict(int, left)
        for key, coefficient in right.items():
            merged[key] += sign * coefficient
        return dict(merged)

    def __add__(self, other: "FusionElement") -> "FusionElement":
        return FusionElement(
            self._merge(self.atypical_part, other.atypical_part, 1),
            self._merge(self.typical_part, other.typical_part, 1),
        )

    def __sub__(self, other: "FusionElement") -> "FusionElement":
        return FusionElement(
            self._merge(self.atypical_part, other.atypical_part, -1),
            self._merge(self.typical_part, other.typical_part, -1),
        )

    def __mul__(self, factor: int) -> "FusionElement":
        if not isinstance(factor, int):
            return NotImplemented
        return FusionElement(
            {k: factor * c for k, c in self.atypical_part.items()},
            {k: factor * c for k, c in self.typical_part.items()},
        )

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.atypical_part and not self.typical_part

    def terms(self) -> List[Tuple[interfaces.ModuleLabel, int]]:
        atypicals = [(labels.AtypicalI(*key), c) for key, c in sorted(self.atypical_part.items())]
        return atypicals + [(key, c) for key, c in self.typical_part.items()]


# ---- Laurent normal form ----
@functools.lru_cache(maxsize=32)
def _quotient_ring(p_plus: int, p_minus: int):
    R, X, Y, Z, W = ring("X,Y,Z,W", QQ, lex)
    half = QQ(1, 2)
    basis = [
        2 * chebyshev("first", p_plus, X * half) - Z - W,
        2 * chebyshev("first", p_minus, Y * half) - Z - W,
        Z * W - 1,
    ]
    logger.debug("Groebner basis for (%d, %d): %s", p_plus, p_minus, basis)
    return R, (X, Y, Z, W), basis


def _dictionary_poly(params: value.ModelParams, r: int, s: int, n: int):
    R, (X, Y, Z, W), _ = _quotient_ring(params.p_plus, params.p_minus)
    half = QQ(1, 2)
    z_power = Z**n if n >= 0 else W ** (-n)
    return chebyshev("second", r - 1, X * half) * chebyshev("second", s - 1, Y * half) * z_power


def _normal_form(params: value.ModelParams, poly) -> LaurentNF:
    R, _, basis = _quotient_ring(params.p_plus, params.p_minus)
    reduced = poly.rem(basis)
    out: LaurentNF = {}
    for (a, b, z, w), coefficient in reduced.terms():
        number = R.domain.to_sympy(coefficient)
        if not number.is_integer:
            raise DictionaryValidationError(f"Non-integral normal-form coefficient {number}")
        key = (a, b, z - w)
        out[key] = out.get(key, 0) + int(number)
    return {k: c for k, c in out.items() if c}


def _element_poly(params: value.ModelParams, elem: FusionElement):
    if elem.typical_part:
        raise TypicalInRingError("Typical classes are not part of the atypical-block ring")
    R, _, _ = _quotient_ring(params.p_plus, params.p_minus)
    total = R.zero
    for (r, s, n), coefficient in elem.atypical_part.items():
        labels.AtypicalI(r, s, n).validate(params)
        total += coefficient * _dictionary_poly(params, r, s, n)
    return total


def to_laurent(params: value.ModelParams, elem: FusionElement) -> LaurentNF:
    return _normal_form(params, _element_poly(params, elem))


def from_laurent(params: value.ModelParams, nf: LaurentNF) -> FusionElement:
    """Inverse dictionary: peel off U-products from the top total degree down."""
    remaining = dict(nf)
    result: Dict[Tuple[int, int, int], int] = defaultdict(int)
    while remaining:
        a, b, n = max(remaining, key=lambda key: (key[0] + key[1], key))
        coefficient = remaining[(a, b, n)]
        if a >= params.p_plus or b >= params.p_minus:
            raise DictionaryValidationError(f"Monomial {(a, b, n)} lies outside the normal-form window")
        result[(a + 1, b + 1, n)] += coefficient
        for key, c in _normal_form(params, _dictionary_poly(params, a + 1, b + 1, n)).items():
            remaining[key] = remaining.get(key, 0) - coefficient * c
            if not remaining[key]:
                del remaining[key]
    return FusionElement(atypical_part=dict(result))


# ---- Generator relations ----
def generator_relations(
    params: value.ModelParams, n_range: Iterable[int]
) -> List[Tuple[str, FusionElement, FusionElement, FusionElement]]:
    p_plus, p_minus = params.p_plus, params.p_minus
    atom = FusionElement.atypical
    relations = []
    for n in n_range:
        for r in range(1, p_plus + 1):
            for s in range(1, p_minus + 1):
                target = atom(r, s, n)
                for m in (-1, 1):
                    relations.append((f"I(1,1;{m}) x I({r},{s};{n})", atom(1, 1, m), target, atom(r, s, n + m)))
                if p_plus >= 2:
                    if r == 1:
                        expected = atom(2, s, n)
                    elif r < p_plus:
                        expected = atom(r - 1, s, n) + atom(r + 1, s, n)
                    else:
                        expected = atom(1, s, n - 1) + 2 * atom(p_plus - 1, s, n) + atom(1, s, n + 1)
                    relations.append((f"I(2,1;0) x I({r},{s};{n})", atom(2, 1, 0), target, expected))
                if s == 1:
                    expected = atom(r, 2, n)
                elif s < p_minus:
                    expected = atom(r, s - 1, n) + atom(r, s + 1, n)
                else:
                    expected = atom(r, 1, n - 1) + 2 * atom(r, p_minus - 1, n) + atom(r, 1, n + 1)
                relations.append((f"I(1,2;0) x I({r},{s};{n})", atom(1, 2, 0), target, expected))
    return relations


def validate_dictionary(params: value.ModelParams, n_range: Sequence[int] = tuple(range(-2, 3))) -> int:
    """Check every generator product in the quotient ring; returns the number checked."""
    failures = []
    relations = generator_relations(params, n_range)
    for name, left, right, expected in relations:
        product = _normal_form(params, _element_poly(params, left) * _element_poly(params, right))
        if product != to_laurent(params, expected):
            failures.append(name)
    if failures:
        raise DictionaryValidationError(
            f"Dictionary fails {len(failures)} generator relations for "
            f"({params.p_plus}, {params.p_minus}), first: {failures[0]}"
        )
    logger.debug("Dictionary validated on %d relations", len(relations))
    return len(relations)


@functools.lru_cache(maxsize=32)
def _ensure_validated(params: value.ModelParams) -> None:
    validate_dictionary(params)


# ---- Products ----
def _typical_times_typical(params, left: TypicalWeight, right: TypicalWeight) -> Dict[TypicalWeight, int]:
    out: Dict[TypicalWeight, int] = defaultdict(int)
    total = left + right
    for j_plus in range(params.p_plus):
        for j_minus in range(params.p_minus):
            out[total.moved(Fraction(j_plus * params.p_minus - j_minus * params.p_plus))] += 1
    return out


def _atypical_times_typical(params, key: Tuple[int, int, int], weight: TypicalWeight) -> Dict[TypicalWeight, int]:
    r, s, n = key
    out: Dict[TypicalWeight, int] = defaultdict(int)
    for j_plus in range(r):
        for j_minus in range(s):
            out[weight.moved(model.fock_lattice_units(params, r - 2 * j_plus, s - 2 * j_minus, n))] += 1
    return out


def fuse(params: value.ModelParams, a: FusionElement, b: FusionElement) -> FusionElement:
    for key in list(a.atypical_part) + list(b.atypical_part):
        labels.AtypicalI(*key).validate(params)
    typical: Dict[TypicalWeight, int] = defaultdict(int)
    for left, c_left in a.typical_part.items():
        for right, c_right in b.typical_part.items():
            for weight, mult in _typical_times_typical(params, left, right).items():
                typical[weight] += c_left * c_right * mult
    for atypicals, typicals in ((a.atypical_part, b.typical_part), (b.atypical_part, a.typical_part)):
        for key, c_key in atypicals.items():
            for weight, c_weight in typicals.items():
                for moved, mult in _atypical_times_typical(params, key, weight).items():
                    typical[moved] += c_key * c_weight * mult
    product = FusionElement(typical_part=dict(typical))
    if a.atypical_part and b.atypical_part:
        _ensure_validated(params)
        left = _element_poly(params, FusionElement(atypical_part=a.atypical_part))
        right = _element_poly(params, FusionElement(atypical_part=b.atypical_part))
        product = product + from_laurent(params, _normal_form(params, left * right))
    return product


# ---- Verlinde formula ----
def verlinde_coeffs(S: np.ndarray, vacuum: int = 0) -> np.ndarray:
    S = np.asarray(S, dtype=complex)
    inverse = np.linalg.inv(S)
    raw = np.einsum("il,jl,lk->ijk", S, S, inverse / S[vacuum][:, None])
    rounded = np.rint(raw.real)
    deviation = float(np.max(np.abs(raw - rounded))) if raw.size else 0.0
    if deviation > VERLINDE_TOL:
        raise VerlindeIntegralityError(
            f"Verlinde coefficients deviate from integers by {deviation:.3e} > {VERLINDE_TOL:.0e}"
        )
    return rounded.astype(int)


def su2_fusion_rules(k: int) -> np.ndarray:
    size = k + 1
    rules = np.zeros((size, size, size), dtype=int)
    for i in range(size):
        for j in range(size):
            for target in range(size):
                if abs(i - j) <= target <= min(i + j, 2 * k - i - j) and (i + j + target) % 2 == 0:
                    rules[i, j, target] = 1
    return rules


# ---- Quantum dimensions of elements ----
def qdim_of_element(params: value.ModelParams, elem: FusionElement, eps) -> mpmath.mpc:
    total = mpmath.mpc(0)
    for key, coefficient in elem.atypical_part.items():
        total += coefficient * qdim.qdim_closed(params, labels.AtypicalI(*key), eps)
    for weight, coefficient in elem.typical_part.items():
        total += coefficient * qdim.qdim_closed(params, labels.Typical(weight.value(params)), eps)
    return total


def qdim_hom_check(
    params: value.ModelParams, eps, a: FusionElement, b: FusionElement
) -> value.ResidualReport:
    lhs = qdim_of_element(params, fuse(params, a, b), eps)
    rhs = qdim_of_element(params, a, eps) * qdim_of_element(params, b, eps)
    return value.ResidualReport.build(lhs, rhs)


# ---- Strip images ----
@dataclasses.dataclass()
class ImageRingReport:
    strip_m: int
    target: str
    basis: List[Tuple[int, int, int]]
    qdims: List[complex]
    max_deviation: float
    kernel_classes: List[str]

    def matches(self, tol: float = VERLINDE_TOL) -> bool:
        return self.max_deviation < tol


def _strip_eps(params: value.ModelParams, m: int) -> mpmath.mpc:
    return mpmath.mpc(-2, (m + mpmath.mpf(1) / 4) / params.alpha)


def _image_target(params: value.ModelParams, m: int):
    """Target S-matrix, vacuum index, basis classes and a name for strip m."""
    index = qdim.discrete_index(params, _strip_eps(params, m))
    p_plus, p_minus = params.p_plus, params.p_minus
    if index % p_plus == 0:
        basis = [(1, b, 0) for b in range(1, p_minus)]
        return modular.smatrix_wzw(p_minus - 2), 0, basis, f"SU(2) level {p_minus - 2}"
    if index % p_minus == 0:
        basis = [(a, 1, 0) for a in range(1, p_plus)]
        return modular.smatrix_wzw(p_plus - 2), 0, basis, f"SU(2) level {p_plus - 2}"
    table = model.kac_table(params)
    vacuum = table.index(model.minimal_model_vacuum(params))
    basis = [(kac.r, kac.s, 0) for kac in table]
    return modular.smatrix_virasoro(params), vacuum, basis, f"minimal model ({p_plus}, {p_minus})"


def _kernel_candidates(params: value.ModelParams) -> List[Tuple[str, Optional[FusionElement], interfaces.ModuleLabel]]:
    p_plus, p_minus = params.p_plus, params.p_minus
    candidates = [("F(0)", None, labels.Typical(0))]
    for r in range(1, p_plus):
        for s in range(1, p_minus + 1):
            candidates.append((f"I+({r},{s};0)", None, labels.AtypicalIPlus(r, s, 0)))
    for r in range(1, p_plus + 1):
        for s in range(1, p_minus):
            candidates.append((f"I-({r},{s};0)", None, labels.AtypicalIMinus(r, s, 0)))
    for r in range(1, p_plus):
        for s in range(1, p_minus):
            diff = FusionElement.atypical(r, s, 0) - FusionElement.atypical(p_plus - r, p_minus - s, 0)
            if not diff.is_zero():
                candidates.append((f"I({r},{s};0) - I({p_plus - r},{p_minus - s};0)", diff, None))
    return candidates


def image_ring_check(params: value.ModelParams, strip_m: int) -> ImageRingReport:
    """Compare strip-m quantum dimensions of atypical classes with the target Verlinde ring."""
    eps = _strip_eps(params, strip_m)
    S, vacuum, basis, target = _image_target(params, strip_m)
    coefficients = verlinde_coeffs(S, vacuum)
    elements = [FusionElement.atypical(*key) for key in basis]
    dims = [qdim_of_element(params, elem, eps) for elem in elements]
    deviation = 0.0
    for i, left in enumerate(elements):
        for j, right in enumerate(elements):
            product = qdim_of_element(params, fuse(params, left, right), eps)
            expected = sum(int(coefficients[i, j, k]) * dims[k] for k in range(len(basis)))
            deviation = max(deviation, float(abs(product - expected)), float(abs(dims[i] * dims[j] - expected)))
    kernel = []
    for name, elem, label in _kernel_candidates(params):
        size = qdim_of_element(params, elem, eps) if elem is not None else qdim.qdim_closed(params, label, eps)
        if abs(size) < VERLINDE_TOL:
            kernel.append(name)
    logger.debug("Strip %d image against %s: deviation %.2e", strip_m, target, deviation)
    return ImageRingReport(
        strip_m=strip_m,
        target=target,
        basis=basis,
        qdims=[complex(d) for d in dims],
        max_deviation=deviation,
        kernel_classes=kernel,
    )


def image_rank(params: value.ModelParams) -> int:
    """Rank of the n = 0 classes' quantum dimensions over the strips m outside qZ."""
    a = params.lattice_rank
    r_range = [1] if params.is_one_p_family else range(1, params.p_plus)
    interior = [(r, s) for r in r_range for s in range(1, params.p_minus)]
    rows = []
    for m in range(2 * a):
        if m % a == 0:
            continue
        eps = _strip_eps(params, m)
        rows.append([float(qdim.qdim_closed(params, labels.AtypicalI(r, s, 0), eps).real) for r, s in interior])
    return int(np.linalg.matrix_rank(np.array(rows), tol=1e-9))
