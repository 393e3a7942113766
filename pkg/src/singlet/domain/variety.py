"""Fusion varieties: the (1,p) plane curve and the (p+,p-) space curve.

Both are cut out by 2 z T_p(x/2) - z^2 - 1 = 0 (one equation per Chebyshev
relation) and are rationally parametrised by t, which the regulator
uniformises as t = exp(-2 pi eps / alpha).
"""
import dataclasses
import functools
from typing import List, Tuple

import mpmath
import sympy

from singlet.domain import fusion, labels, qdim, value

RESIDUAL_TOL = 1e-10

_x, _y, _z = sympy.symbols("x y z")


# ---- Related errors ----
class InvalidCurvePoint(ValueError):
    pass


class DiscreteRegimeError(ValueError):
    pass


# ---- Defining equations ----
def _relation(p: int, variable) -> sympy.Expr:
    return sympy.expand(2 * _z * fusion.chebyshev("first", p, variable / 2) - _z**2 - 1)


@functools.lru_cache(maxsize=32)
def _equations(params: value.ModelParams) -> Tuple[Tuple[sympy.Expr, ...], Tuple[sympy.Symbol, ...]]:
    if params.is_one_p_family:
        return (_relation(params.p_minus, _x),), (_x, _z)
    return (_relation(params.p_plus, _x), _relation(params.p_minus, _y)), (_x, _y, _z)


def curve_eval(params: value.ModelParams, point) -> List[mpmath.mpc]:
    """Residuals of the defining equations at `point` ((x, z) or (x, y, z))."""
    equations, variables = _equations(params)
    if len(point) != len(variables):
        raise InvalidCurvePoint(f"Expected {len(variables)} coordinates, but was given: {point}")
    if point[-1] == 0:
        raise InvalidCurvePoint("The z coordinate must be non-zero")
    functions = [sympy.lambdify(variables, equation, modules="mpmath") for equation in equations]
    return [mpmath.mpc(f(*point)) for f in functions]


# ---- Singular points ----
@dataclasses.dataclass()
class SingularPoint:
    exact: Tuple[sympy.Expr, ...]
    values: Tuple[complex, ...]


def _candidates(params: value.ModelParams):
    def coordinate(k: int, p: int):
        return 2 * sympy.cos(k * sympy.pi / p)

    if params.is_one_p_family:
        p = params.p_minus
        for k in range(1, p):
            for z_value in (1, -1):
                yield coordinate(k, p), sympy.Integer(z_value)
        return
    for j in range(1, params.p_plus):
        for k in range(1, params.p_minus):
            for z_value in (1, -1):
                yield coordinate(j, params.p_plus), coordinate(k, params.p_minus), sympy.Integer(z_value)


def singular_points(params: value.ModelParams) -> List[SingularPoint]:
    """Candidates on the curve where every partial derivative vanishes."""
    equations, variables = _equations(params)
    residuals = [sympy.lambdify(variables, eq, modules="mpmath") for eq in equations]
    gradients = [
        sympy.lambdify(variables, sympy.diff(eq, v), modules="mpmath") for eq in equations for v in variables
    ]
    points = []
    for candidate in _candidates(params):
        numeric = [mpmath.mpf(str(sympy.N(c, 30))) for c in candidate]
        if max(abs(f(*numeric)) for f in residuals) >= RESIDUAL_TOL:
            continue
        if mpmath.sqrt(sum(abs(g(*numeric)) ** 2 for g in gradients)) >= RESIDUAL_TOL:
            continue
        points.append(SingularPoint(exact=tuple(candidate), values=tuple(complex(c) for c in numeric)))
    return points


def hessian_determinants(params: value.ModelParams) -> List[mpmath.mpf]:
    """Hessian determinant of the (1,p) curve at each of its singular points."""
    if not params.is_one_p_family:
        raise value.InvalidModelParams("Hessian determinants are defined for the (1,p) plane curve only")
    (equation,), variables = _equations(params)
    determinant = sympy.lambdify(variables, sympy.hessian(equation, variables).det(), modules="mpmath")
    return [determinant(*point.values) for point in singular_points(params)]


# ---- Parametrisation ----
def parametrize(params: value.ModelParams, t) -> Tuple[mpmath.mpc, ...]:
    t = mpmath.mpc(t)
    if t == 0:
        raise InvalidCurvePoint("The parameter t must be non-zero")
    if params.is_one_p_family:
        return t + 1 / t, t ** (-params.p_minus)
    return (
        t**params.p_minus + t ** (-params.p_minus),
        t**params.p_plus + t ** (-params.p_plus),
        t ** (-params.lattice_rank),
    )


def uniformiser(params: value.ModelParams, eps) -> mpmath.mpc:
    return mpmath.exp(-2 * mpmath.pi * mpmath.mpc(eps) / params.alpha)


def uniformisation_check(params: value.ModelParams, eps) -> value.ResidualReport:
    """Curve point at t(eps) against the continuous quantum dimensions of the generators."""
    current = qdim.regime(params, eps)
    if not isinstance(current, qdim.Continuous):
        raise DiscreteRegimeError(f"eps = {eps} is not in the continuous regime ({current.name()})")
    point = list(parametrize(params, uniformiser(params, eps)))
    generators = [labels.AtypicalI(1, 2, 0), labels.AtypicalI(1, 1, 1)]
    if not params.is_one_p_family:
        generators.insert(0, labels.AtypicalI(2, 1, 0))
    dims = [qdim.qdim_closed(params, label, eps) for label in generators]
    return value.ResidualReport.build(point, dims)
