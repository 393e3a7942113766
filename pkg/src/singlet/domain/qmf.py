"""Quantum modular forms built from false theta functions.

Upper half-plane: F_{j,p}, a false theta function, and the vector of
eta * ch L(r,s). Lower half-plane: their non-holomorphic Eichler integrals,
taken along vertical rays. The cocycles compare the two sides under
w -> -1/w; the integral from 0 to i of the period function is mapped to
[1, inf) by u = i/s and the modular transformation of the integrand.
"""
import dataclasses
import logging
from typing import Callable, Dict, List, Optional, Sequence

import mpmath
import numpy as np

from singlet.domain import characters, labels, model, modular, qdim, series, value

logger = logging.getLogger(__name__)

DEFAULT_DELTAS = (0.1, 0.05, 0.025)

VectorForm = Callable[[mpmath.mpc], List[mpmath.mpc]]


# ---- Upper half-plane ----
def _context(tau, ctx: Optional[value.EvalContext]) -> value.EvalContext:
    return (ctx or value.EvalContext()).with_tau(tau)


def false_theta_F(j: int, p: int, tau, ctx: Optional[value.EvalContext] = None) -> mpmath.mpc:
    """Sum over n of sgn(n) q^{p (n + j/2p)^2}, with sgn(0) = 1."""
    at_tau = _context(tau, ctx)
    upper = series.partial_theta(value.ThetaIndex(p, j), 0, 0, at_tau).value
    lower = series.partial_theta(value.ThetaIndex(p, 2 * p - j), 0, 0, at_tau).value
    with at_tau.precision():
        return upper - lower


def weight32_f(j: int, p: int, z, ctx: Optional[value.EvalContext] = None) -> mpmath.mpc:
    return series.theta_deriv(value.ThetaIndex(p, j), _context(z, ctx)).value


def s_matrix(p: int) -> mpmath.matrix:
    """[S(p)]_{c,j} = sqrt(2/p) sin(pi c j / p) for c, j = 1..p-1."""
    size = p - 1
    out = mpmath.matrix(size, size)
    for c in range(size):
        for j in range(size):
            out[c, j] = mpmath.sqrt(mpmath.mpf(2) / p) * mpmath.sinpi(mpmath.mpf((c + 1) * (j + 1)) / p)
    return out


def weight32_f_transform_residual(j: int, p: int, tau, ctx: Optional[value.EvalContext] = None) -> value.ResidualReport:
    """f_j(-1/tau) against (-i tau)^{3/2} sum_c S(p)_{j,c} f_c(tau)."""
    tau = mpmath.mpc(tau)
    lhs = weight32_f(j, p, -1 / tau, ctx)
    S = s_matrix(p)
    rhs = mpmath.power(-1j * tau, 1.5) * mpmath.fsum(
        S[j - 1, c - 1] * weight32_f(c, p, tau, ctx) for c in range(1, p)
    )
    return value.ResidualReport.build(lhs, rhs, ctx)


def _half_integral_forms(p: int, ctx: Optional[value.EvalContext]) -> VectorForm:
    return lambda z: [weight32_f(j, p, z, ctx) for j in range(1, p)]


def _minimal_forms(params: value.ModelParams, ctx: Optional[value.EvalContext]) -> VectorForm:
    """eta * ch L(r,s) over the Kac table."""
    a = params.lattice_rank

    def forms(z):
        at_z = _context(z, ctx)
        out = []
        for kac in model.kac_table(params):
            big_r, big_s = kac.r * params.p_minus, kac.s * params.p_plus
            first = series.theta(value.ThetaIndex(a, big_r - big_s), 0, at_z).value
            second = series.theta(value.ThetaIndex(a, big_r + big_s), 0, at_z).value
            out.append(first - second)
        return out

    return forms


# ---- Quadrature along vertical rays ----
def _cached(forms: VectorForm) -> VectorForm:
    cache: Dict[mpmath.mpc, List[mpmath.mpc]] = {}

    def lookup(z):
        key = mpmath.mpc(z)
        if key not in cache:
            cache[key] = forms(key)
        return cache[key]

    return lookup


def _ray_integral(what: str, integrand, nodes: Sequence, ctx: value.EvalContext) -> mpmath.mpc:
    result, error = mpmath.quad(integrand, list(nodes), error=True)
    requested = ctx.quad_abs_tol * max(1, abs(result))
    logger.debug("%s: quadrature error %.2e over %d panels", what, float(error), len(nodes) - 1)
    if error > requested:
        raise value.QuadratureError(what, float(error), requested)
    return result


def _ray_nodes(start) -> List:
    nodes = [mpmath.mpf(0)]
    step = mpmath.mpf(start)
    while step < 1:
        nodes.append(step)
        step *= 2
    return nodes + [mpmath.mpf(1), mpmath.inf]


def _eichler(what: str, forms: VectorForm, size: int, exponent, w: value.LowerHalfPoint, ctx) -> List[mpmath.mpc]:
    """sqrt(2i) times the integral of f(z) (z - w)^exponent from conj(w) up to i infinity."""
    with ctx.precision():
        w_value = w.w
        depth = abs(w_value.imag)
        lookup = _cached(forms)
        nodes = _ray_nodes(depth / 2)
        prefactor = mpmath.sqrt(2j)
        out = []
        for index in range(size):

            def integrand(t, index=index):
                z = mpmath.conj(w_value) + 1j * t
                return lookup(z)[index] * mpmath.power(1j * (2 * depth + t), exponent) * 1j

            out.append(prefactor * _ray_integral(f"{what}[{index}]", integrand, nodes, ctx))
        return out


def _period(what: str, forms: VectorForm, S: mpmath.matrix, exponent, weight, w: value.LowerHalfPoint, ctx) -> List[mpmath.mpc]:
    """g(w) = -sqrt(2i) times the integral of f(u) (u - w)^exponent from 0 to i infinity."""
    with ctx.precision():
        w_value = w.w
        size = S.rows
        lookup = _cached(forms)

        def transformed(s):
            values = lookup(1j * s)
            return [mpmath.fsum(S[row, col] * values[col] for col in range(size)) for row in range(size)]

        images = _cached(transformed)
        out = []
        for index in range(size):

            def integrand(s, index=index):
                upper = lookup(1j * s)[index] * mpmath.power(1j * s - w_value, exponent) * 1j
                lower = (
                    1j
                    * mpmath.power(s, weight - 2)
                    * mpmath.power(1j / s - w_value, exponent)
                    * images(s)[index]
                )
                return upper + lower

            out.append(-mpmath.sqrt(2j) * _ray_integral(f"{what}[{index}]", integrand, [1, 2, 4, mpmath.inf], ctx))
        return out


def _matvec(S: mpmath.matrix, vector: Sequence[mpmath.mpc]) -> List[mpmath.mpc]:
    return [mpmath.fsum(S[row, col] * vector[col] for col in range(len(vector))) for row in range(S.rows)]


# ---- Weight 1/2 side ----
def eichler_half(j: int, p: int, w: value.LowerHalfPoint, ctx: Optional[value.EvalContext] = None) -> mpmath.mpc:
    """F*_{j,p}(w) for a single component."""
    ctx = ctx or value.EvalContext()

    def forms(z):
        return [weight32_f(j, p, z, ctx)]

    return _eichler(f"F*[{j},{p}]", forms, 1, mpmath.mpf(-1) / 2, w, ctx)[0]


def cocycle_check_halfint(p: int, w: value.LowerHalfPoint, ctx: Optional[value.EvalContext] = None) -> value.ResidualReport:
    """sqrt(1/(wi)) F*(-1/w) + S F*(w) against -S g(w)."""
    ctx = ctx or value.EvalContext()
    forms = _half_integral_forms(p, ctx)
    S = s_matrix(p)
    exponent = mpmath.mpf(-1) / 2
    at_w = _eichler("F*", forms, p - 1, exponent, w, ctx)
    at_inverse = _eichler("F*", forms, p - 1, exponent, w.inverted(), ctx)
    period = _period("g", forms, S, exponent, mpmath.mpf(3) / 2, w, ctx)
    with ctx.precision():
        factor = mpmath.sqrt(1 / (w.w * 1j))
        lhs = [factor * x + y for x, y in zip(at_inverse, _matvec(S, at_w))]
        rhs = [-x for x in _matvec(S, period)]
    return value.ResidualReport.build(lhs, rhs, ctx)


# ---- Weight 3/2 side ----
def eichler_weight32(params: value.ModelParams, w: value.LowerHalfPoint, ctx: Optional[value.EvalContext] = None) -> List[mpmath.mpc]:
    """G*(w): Eichler integrals of eta * ch L(r,s) over the Kac table."""
    ctx = ctx or value.EvalContext()
    size = len(model.kac_table(params))
    return _eichler("G*", _minimal_forms(params, ctx), size, mpmath.mpf(-3) / 2, w, ctx)


def _minimal_s_matrix(params: value.ModelParams) -> mpmath.matrix:
    table = model.kac_table(params)
    out = mpmath.matrix(len(table), len(table))
    for i, left in enumerate(table):
        for j, right in enumerate(table):
            out[i, j] = modular.smatrix_entry(params, left.r, left.s, right.r, right.s)
    return out


def cocycle_check_weight32(
    params: value.ModelParams, w: value.LowerHalfPoint, ctx: Optional[value.EvalContext] = None
) -> value.ResidualReport:
    """(1/(wi))^{3/2} G*(-1/w) + SM G*(w) against -SM g(w)."""
    ctx = ctx or value.EvalContext()
    forms = _minimal_forms(params, ctx)
    SM = _minimal_s_matrix(params)
    exponent = mpmath.mpf(-3) / 2
    at_w = eichler_weight32(params, w, ctx)
    at_inverse = eichler_weight32(params, w.inverted(), ctx)
    period = _period("g", forms, SM, exponent, mpmath.mpf(1) / 2, w, ctx)
    with ctx.precision():
        factor = mpmath.power(1 / (w.w * 1j), mpmath.mpf(3) / 2)
        lhs = [factor * x + y for x, y in zip(at_inverse, _matvec(SM, at_w))]
        rhs = [-x for x in _matvec(SM, period)]
    return value.ResidualReport.build(lhs, rhs, ctx)


# ---- Quotient basis ----
def _require_kac(params: value.ModelParams, r: int, s: int) -> None:
    value.KacLabel(r, s).validate(params)


def chi_tilde(params: value.ModelParams, r: int, s: int, tau, ctx: Optional[value.EvalContext] = None) -> mpmath.mpc:
    """eta * ch I(r,s;0) minus its weight-1/2 partial theta part."""
    _require_kac(params, r, s)
    at_tau = _context(tau, ctx).with_eps(0)
    a = params.lattice_rank
    big_r, big_s = r * params.p_minus, s * params.p_plus
    character = characters.char_atypical(params, labels.AtypicalI(r, s, 0), at_tau)
    eta_value = series.eta(at_tau).value
    plus = series.partial_theta(value.ThetaIndex(a, 2 * a + big_s + big_r), 0, 0, at_tau).value
    minus = series.partial_theta(value.ThetaIndex(a, 2 * a - big_s + big_r), 0, 0, at_tau).value
    with at_tau.precision():
        return eta_value * character - (plus - minus)


def chi_tilde_series(params: value.ModelParams, r: int, s: int, tau, ctx: Optional[value.EvalContext] = None) -> mpmath.mpc:
    """The same function summed term by term over k >= 0."""
    _require_kac(params, r, s)
    at_tau = _context(tau, ctx)
    a = params.lattice_rank
    big_r, big_s = r * params.p_minus, s * params.p_plus
    b1, b2 = 2 * a - big_s - big_r, 2 * a + big_s + big_r
    b3, b4 = 2 * a - big_s + big_r, 2 * a + big_s - big_r
    with at_tau.precision():
        tau = at_tau.tau

        def power(k: int, b: int):
            j = k + mpmath.mpf(b) / (2 * a)
            return mpmath.expjpi(2 * a * tau * j * j)

        total = mpmath.mpc(0)
        k = 0
        while True:
            term = (k + 1) * (power(k, b1) - power(k, b4)) + k * (power(k, b2) - power(k, b3))
            total += term
            bound = (k + 2) * abs(power(k + 1, min(b1, b2, b3, b4)))
            if bound < at_tau.series_tail_tol * max(1, abs(total)):
                return total
            if k >= at_tau.max_terms:
                raise value.SeriesNonConvergenceError("chi tilde", at_tau.max_terms, float(bound))
            k += 1


def chi_tilde_rank(params: value.ModelParams, taus: Sequence, ctx: Optional[value.EvalContext] = None) -> int:
    """Number of linearly independent chi tilde functions, sampled at `taus`."""
    rows = [
        [complex(chi_tilde(params, kac.r, kac.s, tau, ctx)) for tau in taus]
        for kac in model.kac_table(params)
    ]
    return int(np.linalg.matrix_rank(np.array(rows), tol=1e-9))


# ---- Radial limits ----
@dataclasses.dataclass()
class RadialReport:
    upper: mpmath.mpc
    lower: mpmath.mpc
    upper_error: float
    lower_error: float

    def agrees(self, tol: float = 1e-2) -> bool:
        return abs(self.upper - self.lower) < tol


def radial_limit_check(
    j: int,
    p: int,
    x,
    delta_schedule: Sequence[float] = DEFAULT_DELTAS,
    ctx: Optional[value.EvalContext] = None,
) -> RadialReport:
    """F(x + i delta) against -i sqrt(p) F*(x - i delta), both extrapolated to delta = 0."""
    ctx = ctx or value.EvalContext()
    with ctx.precision():
        x = mpmath.mpf(x.numerator) / x.denominator if hasattr(x, "denominator") else mpmath.mpf(x)
        upper_samples, lower_samples = [], []
        for delta in delta_schedule:
            upper_samples.append((delta, false_theta_F(j, p, mpmath.mpc(x, delta), ctx)))
            star = eichler_half(j, p, value.LowerHalfPoint(mpmath.mpc(x, -delta)), ctx)
            lower_samples.append((delta, -1j * mpmath.sqrt(p) * star))
        upper, upper_error = qdim.extrapolate_to_zero(upper_samples)
        lower, lower_error = qdim.extrapolate_to_zero(lower_samples)
    return RadialReport(upper=upper, lower=lower, upper_error=upper_error, lower_error=lower_error)
