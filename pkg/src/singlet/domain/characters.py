import dataclasses
import functools
from collections import defaultdict
from fractions import Fraction
from typing import Callable, Dict, List

import mpmath
from sympy.functions.combinatorial.numbers import partition

from singlet.domain import interfaces, labels, model, series, value


# ---- Building blocks ----
def _regulated(function):
    """Run at the precision that absorbs cancellation between partial thetas, round at the end."""

    @functools.wraps(function)
    def wrapper(*args):
        *head, ctx = args
        result = function(*head, ctx.widened(series.regulator_digits(ctx.eps, ctx)))
        with ctx.precision():
            return +result

    return wrapper


def _eta(ctx: value.EvalContext) -> mpmath.mpc:
    return series.eta(ctx).value


def _false(params, b: int, c: int, ctx: value.EvalContext, deriv: bool = False) -> mpmath.mpc:
    return series.mixed_false_theta(params, b, c, ctx.eps, ctx, deriv=deriv).value


def _virasoro_theta(params: value.ModelParams, r: int, s: int, ctx: value.EvalContext) -> mpmath.mpc:
    """ch L(r,s) for any 1 <= r < p_plus, 1 <= s < p_minus."""
    a = params.lattice_rank
    big_r, big_s = r * params.p_minus, s * params.p_plus
    first = series.theta(value.ThetaIndex(a, big_r - big_s), 0, ctx).value
    second = series.theta(value.ThetaIndex(a, big_r + big_s), 0, ctx).value
    with ctx.precision():
        return (first - second) / _eta(ctx)


def _sum_until_small(
    what: str, term: Callable[[int], mpmath.mpc], ctx: value.EvalContext, min_k: int = 0
) -> mpmath.mpc:
    total = mpmath.mpc(0)
    previous = None
    k = 0
    while True:
        current = term(k)
        total += current
        size = abs(current)
        if (
            k >= min_k
            and previous is not None
            and size <= previous
            and size < ctx.series_tail_tol * max(1, abs(total))
        ):
            return total
        if k >= ctx.max_terms:
            raise value.SeriesNonConvergenceError(what, ctx.max_terms, float(size))
        previous = size
        k += 1


def _plus_virasoro(params, r: int, s: int, n: int, ctx) -> mpmath.mpc:
    if s == params.p_minus or n < 1:
        return mpmath.mpc(0)
    if n % 2 == 0:
        return _virasoro_theta(params, r, s, ctx)
    return -_virasoro_theta(params, r, params.p_minus - s, ctx)


def _minus_virasoro(params, r: int, s: int, n: int, ctx) -> mpmath.mpc:
    if r == params.p_plus or n < 0:
        return mpmath.mpc(0)
    if n % 2 == 1:
        return _virasoro_theta(params, r, params.p_minus - s, ctx)
    return -_virasoro_theta(params, r, s, ctx)


def _full_virasoro(params, r: int, s: int, n: int, ctx) -> mpmath.mpc:
    if n < 1:
        return mpmath.mpc(0)
    if n % 2 == 0:
        return n * _virasoro_theta(params, r, s, ctx)
    return -n * _virasoro_theta(params, r, params.p_minus - s, ctx)


# ---- Characters ----
def char_typical(params: value.ModelParams, weight, ctx: value.EvalContext) -> mpmath.mpc:
    with ctx.precision():
        shifted = mpmath.mpc(weight) - params.alpha_zero / 2
        return (
            mpmath.exp(2 * mpmath.pi * ctx.eps * shifted)
            * mpmath.expjpi(ctx.tau * shifted**2)
            / _eta(ctx)
        )


def fock_character(params: value.ModelParams, r: int, s: int, n: int, ctx) -> mpmath.mpc:
    with ctx.precision():
        weight = model.fock_weight(params, r, s, n)
    return char_typical(params, weight, ctx)


def char_virasoro(params: value.ModelParams, kac: value.KacLabel, ctx) -> mpmath.mpc:
    kac.validate(params)
    return _virasoro_theta(params, kac.r, kac.s, ctx)


def _char_plus(params, r: int, s: int, n: int, ctx) -> mpmath.mpc:
    a = params.lattice_rank
    false_part = _false(params, (2 - n) * a - s * params.p_plus, r * params.p_minus, ctx)
    with ctx.precision():
        return _plus_virasoro(params, r, s, n, ctx) + false_part


def _char_minus(params, r: int, s: int, n: int, ctx) -> mpmath.mpc:
    a = params.lattice_rank
    false_part = _false(params, -n * a + r * params.p_minus, s * params.p_plus, ctx)
    with ctx.precision():
        return _minus_virasoro(params, r, s, n, ctx) + false_part


def _char_interior(params, r: int, s: int, n: int, ctx) -> mpmath.mpc:
    a = params.lattice_rank
    big_r, big_s = r * params.p_minus, s * params.p_plus
    base = (2 - n) * a
    with ctx.precision():
        total = _full_virasoro(params, r, s, n, ctx)
        for nu in (1, -1):
            by_s = (base - nu * big_s, nu * big_r)
            by_r = (base - nu * big_r, nu * big_s)
            derivs = _false(params, *by_s, ctx, deriv=True) + _false(params, *by_r, ctx, deriv=True)
            weighted = (n + mpmath.mpf(2 * nu * s) / params.p_minus) * _false(params, *by_s, ctx) + (
                n + mpmath.mpf(2 * nu * r) / params.p_plus
            ) * _false(params, *by_r, ctx)
            total += derivs / 2 + weighted / 4
        return total


@_regulated
def char_atypical(params: value.ModelParams, label: interfaces.ModuleLabel, ctx) -> mpmath.mpc:
    label.validate(params)
    if isinstance(label, labels.AtypicalIPlus):
        return _char_plus(params, label.r, label.s, label.n, ctx)
    if isinstance(label, labels.AtypicalIMinus):
        return _char_minus(params, label.r, label.s, label.n, ctx)
    if not isinstance(label, labels.AtypicalI):
        raise labels.InvalidModuleLabel(f"{label.kind()} is not an atypical I label")
    r, s, n = label.r, label.s, label.n
    if r == params.p_plus and s == params.p_minus:
        return fock_character(params, r, s, n, ctx)
    if r == params.p_plus:
        return _char_minus(params, r, s, n, ctx)
    if s == params.p_minus:
        return _char_plus(params, r, s, n, ctx)
    return _char_interior(params, r, s, n, ctx)


@_regulated
def char_kernel(params: value.ModelParams, r: int, s: int, ctx) -> mpmath.mpc:
    labels.Kernel(r, s).validate(params)
    virasoro_part = _virasoro_theta(params, r, s, ctx)
    atypical_part = _char_interior(params, r, s, 0, ctx)
    with ctx.precision():
        return virasoro_part + atypical_part


def char_singlet_1p(p: int, r: int, s: int, ctx) -> mpmath.mpc:
    params = value.ModelParams.one_p(p)
    return char_atypical(params, labels.singlet_1p(r, s), ctx)


def character(params: value.ModelParams, label: interfaces.ModuleLabel, ctx) -> mpmath.mpc:
    if isinstance(label, labels.Typical):
        return char_typical(params, label.weight, ctx)
    if isinstance(label, labels.Virasoro):
        return char_virasoro(params, label.kac, ctx)
    if isinstance(label, labels.Kernel):
        return char_kernel(params, label.r, label.s, ctx)
    return char_atypical(params, label, ctx)


def character_series(
    params: value.ModelParams,
    label: interfaces.ModuleLabel,
    ctx: value.EvalContext,
    evaluate: Callable[..., mpmath.mpc] = character,
) -> value.SeriesValue:
    """A character form with the terms and tail bounds of the lattice sums behind it.

    tail_bound is absolute: the lattice-sum tails over |eta|, plus the
    truncation of the eta product relative to the value.
    """
    with series.tally() as sums:
        result = evaluate(params, label, ctx)
    eta_value = series.eta(ctx)
    with ctx.precision():
        tails = sum((s.tail_bound for s in sums), 0.0)
        return value.SeriesValue(
            value=result,
            terms_used=sum(s.terms_used for s in sums) + eta_value.terms_used,
            tail_bound=float(tails / abs(eta_value.value) + abs(result) * eta_value.tail_bound),
        )


# ---- Resolutions ----
def _require_interior(params, r: int, s: int) -> None:
    if not (1 <= r < params.p_plus and 1 <= s < params.p_minus):
        raise labels.InvalidModuleLabel(
            f"({r},{s}) must satisfy 1 <= r < {params.p_plus} and 1 <= s < {params.p_minus}"
        )


@_regulated
def char_plus_resolution(params, r: int, s: int, n: int, ctx) -> mpmath.mpc:
    """I+(r,s;n) as its Virasoro part plus the alternating Fock sum."""
    labels.AtypicalIPlus(r, s, n).validate(params)
    p_plus = params.p_plus

    def term(k: int) -> mpmath.mpc:
        return fock_character(params, p_plus - r, s, n - 2 * k - 1, ctx) - fock_character(
            params, r, s, n - 2 * k - 2, ctx
        )

    with ctx.precision():
        return _plus_virasoro(params, r, s, n, ctx) + _sum_until_small("I+ resolution", term, ctx)


@_regulated
def char_minus_resolution(params, r: int, s: int, n: int, ctx) -> mpmath.mpc:
    labels.AtypicalIMinus(r, s, n).validate(params)
    p_minus = params.p_minus

    def term(k: int) -> mpmath.mpc:
        return fock_character(params, r, s, n - 2 * k, ctx) - fock_character(
            params, r, p_minus - s, n - 2 * k - 1, ctx
        )

    with ctx.precision():
        return _minus_virasoro(params, r, s, n, ctx) + _sum_until_small("I- resolution", term, ctx)


@_regulated
def char_from_plus(params, r: int, s: int, n: int, ctx) -> mpmath.mpc:
    """I(r,s;n) through the I+ resolution."""
    _require_interior(params, r, s)
    p_minus = params.p_minus

    def term(k: int) -> mpmath.mpc:
        return _char_plus(params, r, s, n - 2 * k, ctx) - _char_plus(
            params, r, p_minus - s, n - 2 * k - 1, ctx
        )

    with ctx.precision():
        return _sum_until_small("I via I+", term, ctx, min_k=max(0, n))


@_regulated
def char_from_minus(params, r: int, s: int, n: int, ctx) -> mpmath.mpc:
    """I(r,s;n) through the I- co-resolution."""
    _require_interior(params, r, s)
    p_plus = params.p_plus

    def term(k: int) -> mpmath.mpc:
        return _char_minus(params, p_plus - r, s, n - 2 * k - 1, ctx) - _char_minus(
            params, r, s, n - 2 * k - 2, ctx
        )

    with ctx.precision():
        return _sum_until_small("I via I-", term, ctx, min_k=max(0, n))


@_regulated
def char_fock_resolution(params, r: int, s: int, n: int, ctx) -> mpmath.mpc:
    _require_interior(params, r, s)
    p_plus, p_minus = params.p_plus, params.p_minus

    def term(k: int) -> mpmath.mpc:
        return (k + 1) * (
            fock_character(params, p_plus - r, s, n - 2 * k - 1, ctx)
            + fock_character(params, r, p_minus - s, n - 2 * k - 3, ctx)
            - fock_character(params, r, s, n - 2 * k - 2, ctx)
            - fock_character(params, p_plus - r, p_minus - s, n - 2 * k - 2, ctx)
        )

    with ctx.precision():
        return _full_virasoro(params, r, s, n, ctx) + _sum_until_small("I Fock sum", term, ctx)


# ---- Exact q-expansions ----
@dataclasses.dataclass()
class QExpansion:
    leading_exponent: Fraction
    coefficients: List[int]


def _lattice_index(params, r: int, s: int, n: int) -> int:
    return n * params.lattice_rank - r * params.p_minus + s * params.p_plus


def _virasoro_terms(params, r: int, s: int, coefficient: int, reach: int, out: Dict[int, int]) -> None:
    for k in range(-reach, reach + 1):
        out[_lattice_index(params, r, s, 2 * k)] += coefficient
        out[_lattice_index(params, params.p_plus - r, s, 2 * k + 1)] -= coefficient


def _fock_terms(params, label: interfaces.ModuleLabel, reach: int) -> Dict[int, int]:
    p_plus, p_minus = params.p_plus, params.p_minus
    out: Dict[int, int] = defaultdict(int)
    if isinstance(label, labels.Virasoro):
        _virasoro_terms(params, label.kac.r, label.kac.s, 1, reach, out)
        return out
    if isinstance(label, labels.Kernel):
        _virasoro_terms(params, label.r, label.s, 1, reach, out)
        label = labels.AtypicalI(label.r, label.s, 0)
    if isinstance(label, labels.AtypicalI):
        r, s, n = label.r, label.s, label.n
        if r == p_plus and s == p_minus:
            out[_lattice_index(params, r, s, n)] += 1
            return out
        if r == p_plus:
            label = labels.AtypicalIMinus(r, s, n)
        elif s == p_minus:
            label = labels.AtypicalIPlus(r, s, n)
        else:
            if n >= 1:
                if n % 2 == 0:
                    _virasoro_terms(params, r, s, n, reach, out)
                else:
                    _virasoro_terms(params, r, p_minus - s, -n, reach, out)
            for k in range(reach):
                out[_lattice_index(params, p_plus - r, s, n - 2 * k - 1)] += k + 1
                out[_lattice_index(params, r, p_minus - s, n - 2 * k - 3)] += k + 1
                out[_lattice_index(params, r, s, n - 2 * k - 2)] -= k + 1
                out[_lattice_index(params, p_plus - r, p_minus - s, n - 2 * k - 2)] -= k + 1
            return out
    if isinstance(label, labels.AtypicalIPlus):
        r, s, n = label.r, label.s, label.n
        if s != p_minus and n >= 1:
            if n % 2 == 0:
                _virasoro_terms(params, r, s, 1, reach, out)
            else:
                _virasoro_terms(params, r, p_minus - s, -1, reach, out)
        for k in range(reach):
            out[_lattice_index(params, p_plus - r, s, n - 2 * k - 1)] += 1
            out[_lattice_index(params, r, s, n - 2 * k - 2)] -= 1
        return out
    if isinstance(label, labels.AtypicalIMinus):
        r, s, n = label.r, label.s, label.n
        if r != p_plus and n >= 0:
            if n % 2 == 1:
                _virasoro_terms(params, r, p_minus - s, 1, reach, out)
            else:
                _virasoro_terms(params, r, s, -1, reach, out)
        for k in range(reach):
            out[_lattice_index(params, r, s, n - 2 * k)] += 1
            out[_lattice_index(params, r, p_minus - s, n - 2 * k - 1)] -= 1
        return out
    raise labels.InvalidModuleLabel(f"No exact q-expansion for {label.kind()} labels")


def q_expansion(params: value.ModelParams, label: interfaces.ModuleLabel, order: int) -> QExpansion:
    """Graded dimensions of the unregularised character up to `order` steps past the lowest weight."""
    label.validate(params)
    a = params.lattice_rank
    powers: Dict[Fraction, int] = defaultdict(int)
    for index, coefficient in _fock_terms(params, label, order + 3).items():
        if coefficient:
            powers[Fraction(index * index, 4 * a)] += coefficient
    powers = {exponent: c for exponent, c in powers.items() if c}
    lowest = min(powers)
    theta_part = [0] * (order + 1)
    for exponent, coefficient in powers.items():
        gap = exponent - lowest
        if gap.denominator != 1:
            raise ValueError(f"Exponents {lowest} and {exponent} do not differ by an integer")
        if gap <= order:
            theta_part[int(gap)] += coefficient
    coefficients = [
        sum(theta_part[i] * int(partition(m - i)) for i in range(m + 1)) for m in range(order + 1)
    ]
    shift = next((i for i, c in enumerate(coefficients) if c), 0)
    return QExpansion(
        leading_exponent=lowest - Fraction(1, 24) + shift, coefficients=coefficients[shift:]
    )
