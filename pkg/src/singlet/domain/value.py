import dataclasses
import math
from fractions import Fraction
from typing import ClassVar, Optional, Sequence, Union

import mpmath

Number = Union[int, float, complex, mpmath.mpf, mpmath.mpc]


# ---- Related errors ----
class InvalidModelParams(ValueError):
    pass


class InvalidKacLabel(ValueError):
    pass


class InvalidEvalContext(ValueError):
    pass


class InvalidThetaIndex(ValueError):
    pass


class InvalidLowerHalfPoint(ValueError):
    pass


class NumericalError(RuntimeError):
    pass


class SeriesNonConvergenceError(NumericalError):
    def __init__(self, what: str, terms: int, tail: float):
        super().__init__(
            f"{what} did not converge within {terms} terms (last tail bound {tail:.3e})"
        )
        self.terms = terms
        self.tail = tail


class QuadratureError(NumericalError):
    def __init__(self, what: str, achieved: float, requested: float):
        super().__init__(
            f"{what}: quadrature error estimate {achieved:.3e} exceeds {requested:.3e}"
        )
        self.achieved = achieved
        self.requested = requested


# ---- Value objects ----
@dataclasses.dataclass(init=False, unsafe_hash=True)
class ModelParams:
    MIN_P: ClassVar[int] = 1
    p_plus: int
    p_minus: int

    def __init__(self, p_plus: int, p_minus: int):
        if not isinstance(p_plus, int) or not isinstance(p_minus, int):
            raise InvalidModelParams(
                f"p_plus and p_minus must be integers, but was given: ({p_plus!r}, {p_minus!r})"
            )
        if p_plus < self.MIN_P or p_minus < self.MIN_P:
            raise InvalidModelParams(
                f"p_plus and p_minus must be positive, but was given: ({p_plus}, {p_minus})"
            )
        if p_plus == p_minus or math.gcd(p_plus, p_minus) != 1:
            raise InvalidModelParams(
                f"p_plus and p_minus must be distinct and coprime, but was given: ({p_plus}, {p_minus})"
            )
        if p_minus == 1:
            raise InvalidModelParams(
                f"The one-parameter family is written (1, p), but was given: ({p_plus}, {p_minus})"
            )
        self.p_plus: int = p_plus
        self.p_minus: int = p_minus

    @classmethod
    def build(cls, p_plus: int, p_minus: int) -> "ModelParams":
        return cls(p_plus, p_minus)

    @classmethod
    def one_p(cls, p: int) -> "ModelParams":
        return cls(1, p)

    @property
    def is_one_p_family(self) -> bool:
        return self.p_plus == 1

    @property
    def lattice_rank(self) -> int:
        return self.p_plus * self.p_minus

    @property
    def alpha_plus(self) -> mpmath.mpf:
        return mpmath.sqrt(mpmath.mpf(2 * self.p_minus) / self.p_plus)

    @property
    def alpha_minus(self) -> mpmath.mpf:
        return -mpmath.sqrt(mpmath.mpf(2 * self.p_plus) / self.p_minus)

    @property
    def alpha_zero(self) -> mpmath.mpf:
        return self.alpha_plus + self.alpha_minus

    @property
    def alpha(self) -> mpmath.mpf:
        return mpmath.sqrt(2 * self.lattice_rank)

    @property
    def kappa(self) -> mpmath.mpf:
        # alpha_plus = p_minus * kappa, alpha_minus = -p_plus * kappa
        return mpmath.sqrt(mpmath.mpf(2) / self.lattice_rank)

    @property
    def central_charge(self) -> Fraction:
        return 1 - Fraction(6 * (self.p_plus - self.p_minus) ** 2, self.lattice_rank)


@dataclasses.dataclass(init=False, unsafe_hash=True)
class KacLabel:
    r: int
    s: int

    def __init__(self, r: int, s: int):
        self.r: int = r
        self.s: int = s

    def validate(self, params: ModelParams) -> None:
        if not (1 <= self.r < params.p_plus and 1 <= self.s < params.p_minus):
            raise InvalidKacLabel(
                f"Kac label ({self.r}, {self.s}) is outside 1 <= r < {params.p_plus}, "
                f"1 <= s < {params.p_minus}"
            )
        if self.s * params.p_plus <= self.r * params.p_minus:
            raise InvalidKacLabel(
                f"Kac label ({self.r}, {self.s}) violates s*p_plus > r*p_minus for "
                f"({params.p_plus}, {params.p_minus})"
            )

    @classmethod
    def build(cls, params: ModelParams, r: int, s: int) -> "KacLabel":
        label = cls(r, s)
        label.validate(params)
        return label


@dataclasses.dataclass(init=False)
class EvalContext:
    DEFAULT_TAIL_TOL: ClassVar[float] = 1e-14
    DEFAULT_MAX_TERMS: ClassVar[int] = 10**6
    DEFAULT_QUAD_TOL: ClassVar[float] = 1e-10
    DEFAULT_PRECISION: ClassVar[int] = 30
    MIN_PRECISION: ClassVar[int] = 15
    tau: mpmath.mpc
    eps: mpmath.mpc
    series_tail_tol: float
    max_terms: int
    quad_abs_tol: float
    quad_cutoff: Optional[float]
    precision_digits: int

    def __init__(
        self,
        tau: Number = 1j,
        eps: Number = 0,
        series_tail_tol: float = DEFAULT_TAIL_TOL,
        max_terms: int = DEFAULT_MAX_TERMS,
        quad_abs_tol: float = DEFAULT_QUAD_TOL,
        quad_cutoff: Optional[float] = None,
        precision_digits: int = DEFAULT_PRECISION,
    ):
        if precision_digits < self.MIN_PRECISION:
            raise InvalidEvalContext(
                f"precision_digits must be at least {EvalContext.MIN_PRECISION}, "
                f"but was given: {precision_digits}"
            )
        with mpmath.workdps(precision_digits):
            tau = mpmath.mpc(tau)
            eps = mpmath.mpc(eps)
        if tau.imag <= 0:
            raise InvalidEvalContext(f"tau must lie in the upper half-plane, but was given: {tau}")
        if not series_tail_tol > 0:
            raise InvalidEvalContext(
                f"series_tail_tol must be positive, but was given: {series_tail_tol}"
            )
        if not quad_abs_tol > 0:
            raise InvalidEvalContext(f"quad_abs_tol must be positive, but was given: {quad_abs_tol}")
        if max_terms < 1:
            raise InvalidEvalContext(f"max_terms must be positive, but was given: {max_terms}")
        if quad_cutoff is not None and not quad_cutoff > 0:
            raise InvalidEvalContext(f"quad_cutoff must be positive, but was given: {quad_cutoff}")
        self.tau: mpmath.mpc = tau
        self.eps: mpmath.mpc = eps
        self.series_tail_tol: float = float(series_tail_tol)
        self.max_terms: int = int(max_terms)
        self.quad_abs_tol: float = float(quad_abs_tol)
        self.quad_cutoff: Optional[float] = quad_cutoff
        self.precision_digits: int = int(precision_digits)

    @property
    def q(self) -> mpmath.mpc:
        with self.precision():
            return mpmath.expjpi(2 * self.tau)

    def precision(self):
        return mpmath.workdps(self.precision_digits)

    def with_tau(self, tau: Number) -> "EvalContext":
        return dataclasses.replace(self, tau=tau)

    def with_eps(self, eps: Number) -> "EvalContext":
        return dataclasses.replace(self, eps=eps)

    def widened(self, extra_digits: int) -> "EvalContext":
        """Raise the working precision; the series tolerance is absolute and stays put."""
        if extra_digits <= 0:
            return self
        return dataclasses.replace(self, precision_digits=self.precision_digits + extra_digits)


@dataclasses.dataclass(init=False, unsafe_hash=True)
class ThetaIndex:
    MIN_A: ClassVar[int] = 1
    a: int
    b: int

    def __init__(self, a: int, b: int):
        if a < self.MIN_A:
            raise InvalidThetaIndex(f"Theta index a must be at least 1, but was given: {a}")
        self.a: int = a
        self.b: int = b

    @property
    def offset(self) -> Fraction:
        return Fraction(self.b, 2 * self.a)


@dataclasses.dataclass(init=False)
class LowerHalfPoint:
    w: mpmath.mpc

    def __init__(self, w: Number):
        w = mpmath.mpc(w)
        if not w.imag < 0:
            raise InvalidLowerHalfPoint(f"w must lie in the lower half-plane, but was given: {w}")
        self.w: mpmath.mpc = w

    @classmethod
    def build(cls, w: Number) -> "LowerHalfPoint":
        return cls(w)

    def inverted(self) -> "LowerHalfPoint":
        return LowerHalfPoint(-1 / self.w)


@dataclasses.dataclass()
class SeriesValue:
    value: mpmath.mpc
    terms_used: int
    tail_bound: float


@dataclasses.dataclass()
class ResidualReport:
    lhs: Union[mpmath.mpc, Sequence[mpmath.mpc]]
    rhs: Union[mpmath.mpc, Sequence[mpmath.mpc]]
    abs_residual: float
    rel_residual: float
    settings: Optional[EvalContext] = None

    TINY: ClassVar[float] = 1e-300

    @classmethod
    def build(cls, lhs, rhs, settings: Optional[EvalContext] = None) -> "ResidualReport":
        """Compare scalars, or vectors in the max-norm."""
        if isinstance(lhs, (list, tuple)):
            lhs, rhs = list(lhs), list(rhs)
            abs_residual = max((abs(x - y) for x, y in zip(lhs, rhs)), default=0)
            scale = max([abs(x) for x in lhs] + [abs(y) for y in rhs] + [cls.TINY])
        else:
            abs_residual = abs(lhs - rhs)
            scale = max(abs(lhs), abs(rhs), cls.TINY)
        return cls(
            lhs=lhs,
            rhs=rhs,
            abs_residual=float(abs_residual),
            rel_residual=float(abs_residual / scale),
            settings=settings,
        )

    def within(self, tol: float, relative: bool = True) -> bool:
        return (self.rel_residual if relative else self.abs_residual) < tol
