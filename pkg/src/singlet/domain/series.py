"""Truncated theta-type series: eta, theta, partial theta and mixed false theta.

Every lattice sum here has terms j^w exp(2 pi i (a tau j^2 + v j)) over
j = k + b/2a, with |term| a Gaussian in j. Summation starts at the vertex of
that Gaussian and walks outwards, so each direction is monotone and the tail
is bounded by a geometric series. The walk stops once that bound falls below
the absolute series tolerance. Sums keep the working precision they were
computed at, so differences of large sums cancel exactly.
"""
import contextlib
import contextvars
import functools
import logging
import math
from typing import Iterator, List, Optional, Tuple

import mpmath

from singlet.domain import value

logger = logging.getLogger(__name__)

GUARD_DIGITS = 5
ETA_INVERSION_BELOW = 0.5

_tally: "contextvars.ContextVar[Optional[List[value.SeriesValue]]]" = contextvars.ContextVar(
    "series_tally", default=None
)


# ---- Related errors ----
class InvalidFalseThetaIndex(ValueError):
    pass


# ---- Tally ----
@contextlib.contextmanager
def tally() -> Iterator[List[value.SeriesValue]]:
    """Collect every lattice sum evaluated inside the block."""
    token = _tally.set([])
    try:
        yield _tally.get()
    finally:
        _tally.reset(token)


def _record(result: value.SeriesValue) -> value.SeriesValue:
    seen = _tally.get()
    if seen is not None:
        seen.append(result)
    return result


def regulator_digits(eps, ctx: value.EvalContext) -> int:
    """Digits lost when partial thetas at regulator eps cancel.

    For Re(eps) < 0 the partial thetas peak at exp(pi Re(eps)^2 / Im(tau)),
    while their differences stay of order one.
    """
    with ctx.precision():
        real_part = min(mpmath.mpc(eps).real, 0)
        peak = mpmath.pi * real_part**2 / (mpmath.mpc(ctx.tau).imag * mpmath.ln(10))
    if peak == 0:
        return 0
    return int(math.ceil(float(peak))) + GUARD_DIGITS


# ---- Lattice sums ----
def _log_magnitude(a: int, y, imag_v, j):
    return -2 * mpmath.pi * (a * y * j * j + imag_v * j)


def _peak_digits(a: int, y, imag_v, start_offset: Optional[mpmath.mpf]) -> int:
    vertex = -imag_v / (2 * a * y)
    if start_offset is not None and vertex < start_offset:
        vertex = start_offset
    peak = _log_magnitude(a, y, imag_v, vertex) / mpmath.ln(10)
    return max(0, int(math.ceil(float(peak))))


def _walk(what, a, offset, tau, v, weight, k0, step, stop_at, ctx, budget) -> Tuple:
    y = tau.imag
    imag_v = v.imag
    total = mpmath.mpc(0)
    terms = 0
    tail = mpmath.mpf(0)
    k = k0
    while stop_at is None or (k - stop_at) * step <= 0:
        j = k + offset
        term = mpmath.expjpi(2 * (a * tau * j * j + v * j))
        if weight:
            term *= j**weight
        total += term
        terms += 1
        j_next = j + step
        if stop_at is not None and (k + step - stop_at) * step > 0:
            tail = mpmath.mpf(0)
            break
        log_next = _log_magnitude(a, y, imag_v, j_next)
        rho = mpmath.exp(_log_magnitude(a, y, imag_v, j_next + step) - log_next)
        if weight:
            rho *= ((2 + abs(j_next)) / (1 + abs(j_next))) ** weight
        if rho < 1:
            tail = mpmath.exp(log_next) * (1 + abs(j_next)) ** weight / (1 - rho)
            if tail < ctx.series_tail_tol / 2:
                break
        if terms >= budget:
            raise value.SeriesNonConvergenceError(what, ctx.max_terms, float(tail))
        k += step
    return total, terms, tail


def lattice_sum(
    what: str,
    a: int,
    b: int,
    tau,
    v,
    weight: int,
    ctx: value.EvalContext,
    start: Optional[int] = None,
) -> value.SeriesValue:
    """Sum j^weight exp(2 pi i (a tau j^2 + v j)) over j = k + b/2a, k >= start (or all k).

    tail_bound is absolute and below ctx.series_tail_tol on success.
    """
    with ctx.precision():
        tau = mpmath.mpc(tau)
        v = mpmath.mpc(v)
        offset = mpmath.mpf(b) / (2 * a)
        start_offset = None if start is None else start + offset
        extra = _peak_digits(a, tau.imag, v.imag, start_offset)
    if extra:
        extra += GUARD_DIGITS
        logger.debug("%s: raising working precision by %d digits", what, extra)
    with mpmath.workdps(ctx.precision_digits + extra):
        tau = mpmath.mpc(tau)
        v = mpmath.mpc(v)
        offset = mpmath.mpf(b) / (2 * a)
        vertex_k = -v.imag / (2 * a * tau.imag) - offset
        k0 = int(mpmath.ceil(vertex_k))
        if start is not None:
            k0 = max(k0, start)
        forward, n_forward, tail_forward = _walk(
            what, a, offset, tau, v, weight, k0, 1, None, ctx, ctx.max_terms
        )
        backward, n_backward, tail_backward = mpmath.mpc(0), 0, mpmath.mpf(0)
        if start is None or k0 - 1 >= start:
            backward, n_backward, tail_backward = _walk(
                what, a, offset, tau, v, weight, k0 - 1, -1, start, ctx, ctx.max_terms - n_forward
            )
        total = forward + backward
        tail = tail_forward + tail_backward
    logger.debug("%s: %d terms, tail %.2e", what, n_forward + n_backward, float(tail))
    return _record(
        value.SeriesValue(value=total, terms_used=n_forward + n_backward, tail_bound=float(tail))
    )


# ---- Eta ----
@functools.lru_cache(maxsize=512)
def _eta_product(tau, digits: int, tol: float, max_terms: int) -> value.SeriesValue:
    with mpmath.workdps(digits):
        q = mpmath.expjpi(2 * tau)
        product = mpmath.mpc(1)
        q_power = mpmath.mpc(1)
        n = 0
        while True:
            n += 1
            q_power *= q
            product *= 1 - q_power
            if abs(q_power * q) < tol:
                break
            if n >= max_terms:
                raise value.SeriesNonConvergenceError("eta", max_terms, float(abs(q_power)))
        result = mpmath.expjpi(tau / 12) * product
        return value.SeriesValue(value=result, terms_used=n, tail_bound=float(abs(q_power * q)))


def eta(ctx: value.EvalContext) -> value.SeriesValue:
    """Dedekind eta; close to the real axis it goes through eta(-1/tau) = sqrt(-i tau) eta(tau)."""
    tau = ctx.tau
    if tau.imag < ETA_INVERSION_BELOW and abs(tau) < 1:
        with ctx.precision():
            inverted = _eta_product(-1 / tau, ctx.precision_digits, ctx.series_tail_tol, ctx.max_terms)
            return value.SeriesValue(
                value=inverted.value / mpmath.sqrt(-1j * tau),
                terms_used=inverted.terms_used,
                tail_bound=inverted.tail_bound,
            )
    return _eta_product(tau, ctx.precision_digits, ctx.series_tail_tol, ctx.max_terms)


# ---- Theta functions ----
def theta(idx: value.ThetaIndex, u, ctx: value.EvalContext) -> value.SeriesValue:
    return lattice_sum(f"theta[{idx.a},{idx.b}]", idx.a, idx.b, ctx.tau, u, 0, ctx)


def theta_deriv(idx: value.ThetaIndex, ctx: value.EvalContext, u=0) -> value.SeriesValue:
    """z d/dz of theta at elliptic argument u."""
    return lattice_sum(f"theta'[{idx.a},{idx.b}]", idx.a, idx.b, ctx.tau, u, 1, ctx)


def partial_theta(idx: value.ThetaIndex, u, eps, ctx: value.EvalContext) -> value.SeriesValue:
    with ctx.precision():
        v = mpmath.mpc(u) - 1j * mpmath.mpc(eps)
    return lattice_sum(f"P[{idx.a},{idx.b}]", idx.a, idx.b, ctx.tau, v, 0, ctx, start=0)


def partial_theta_deriv(
    idx: value.ThetaIndex, eps, ctx: value.EvalContext, u=0
) -> value.SeriesValue:
    with ctx.precision():
        v = mpmath.mpc(u) - 1j * mpmath.mpc(eps)
    return lattice_sum(f"P'[{idx.a},{idx.b}]", idx.a, idx.b, ctx.tau, v, 1, ctx, start=0)


# ---- Mixed false theta ----
def mixed_false_theta(
    params: value.ModelParams, b: int, c: int, eps, ctx: value.EvalContext, deriv: bool = False
) -> value.SeriesValue:
    """F_{b,c} at regulator eps; deriv=True gives -(1/(2 pi alpha)) dF/deps."""
    if c == 0:
        raise InvalidFalseThetaIndex("Mixed false theta functions need c != 0")
    a = params.lattice_rank
    with ctx.precision():
        shift = -params.alpha * mpmath.mpc(eps)
    partial = partial_theta_deriv if deriv else _partial_at_zero
    upper = partial(value.ThetaIndex(a, b - c), shift, ctx)
    lower = partial(value.ThetaIndex(a, b + c), shift, ctx)
    eta_value = eta(ctx)
    with ctx.precision():
        return value.SeriesValue(
            value=(upper.value - lower.value) / eta_value.value,
            terms_used=upper.terms_used + lower.terms_used + eta_value.terms_used,
            tail_bound=float((upper.tail_bound + lower.tail_bound) / abs(eta_value.value)),
        )


def _partial_at_zero(idx: value.ThetaIndex, eps, ctx: value.EvalContext) -> value.SeriesValue:
    return partial_theta(idx, 0, eps, ctx)
