"""S-kernels, correction terms and numerical checks of S-transformations.

Every continuous part is a line integral over real x of
kernel(x) * ch F^eps_{x + alpha_0/2}(tau). The kernel poles sit at
x = k/alpha + Im(eps) - i Re(eps), so they stay off the contour as long as
Re(eps) != 0.
"""
import logging
from typing import Callable, List, Tuple

import mpmath
import numpy as np
from scipy import integrate

from singlet.domain import characters, interfaces, labels, model, series, value

logger = logging.getLogger(__name__)


# ---- Related errors ----
class ImaginaryRegulatorError(ValueError):
    pass


def _require_real_part(eps) -> None:
    if mpmath.mpc(eps).real == 0:
        raise ImaginaryRegulatorError(
            f"The regulator must not be purely imaginary, but was given: {eps}"
        )


# ---- Kernels ----
def s_kernel_typical(weight, x, eps) -> mpmath.mpc:
    """Kernel of ch F^eps_lambda; `weight` is lambda - alpha_0/2."""
    weight, x, eps = mpmath.mpc(weight), mpmath.mpc(x), mpmath.mpc(eps)
    return mpmath.exp(2 * mpmath.pi * eps * (weight - x)) * mpmath.expjpi(-2 * weight * x)


def s_kernel_false(params: value.ModelParams, b: int, c: int, x, eps) -> mpmath.mpc:
    _require_real_part(eps)
    alpha = params.alpha
    w = mpmath.mpc(x) + 1j * mpmath.mpc(eps)
    return (
        mpmath.exp(-2 * mpmath.pi * eps * x)
        * mpmath.expjpi(2 * (b - params.lattice_rank) * w / alpha)
        * mpmath.sinpi(2 * c * w / alpha)
        / mpmath.sinpi(alpha * w)
    )


def s_kernel_atypical(params: value.ModelParams, r: int, s: int, n: int, x, eps) -> mpmath.mpc:
    _require_real_part(eps)
    alpha = params.alpha
    w = mpmath.mpc(x) + 1j * mpmath.mpc(eps)
    return (
        mpmath.exp(-2 * mpmath.pi * eps * x)
        * mpmath.expjpi(-n * alpha * w)
        * mpmath.sinpi(2 * r * params.p_minus * w / alpha)
        * mpmath.sinpi(2 * s * params.p_plus * w / alpha)
        / mpmath.sinpi(alpha * w) ** 2
    )


# ---- Correction terms ----
def _shifted_thetas(params: value.ModelParams, ctx: value.EvalContext, deriv: bool = False):
    """q^{-eps^2/2} theta_{a,m}(i alpha eps tau) / eta, or its eps-derivative, for m = 0..2a-1."""
    a = params.lattice_rank
    with ctx.precision():
        alpha = params.alpha
        u = 1j * alpha * ctx.eps * ctx.tau
        damping = mpmath.expjpi(-ctx.tau * ctx.eps**2)
    eta_value = series.eta(ctx).value
    out = []
    for m in range(2 * a):
        idx = value.ThetaIndex(a, m)
        plain = series.theta(idx, u, ctx).value
        with ctx.precision():
            if not deriv:
                out.append(damping * plain / eta_value)
                continue
            weighted = series.theta_deriv(idx, ctx, u=u).value
            two_pi_i = 2j * mpmath.pi
            out.append(
                damping
                * (-two_pi_i * ctx.tau * ctx.eps * plain + two_pi_i * 1j * alpha * ctx.tau * weighted)
                / eta_value
            )
    return out


def _x_from_thetas(params, b: int, c: int, thetas) -> mpmath.mpc:
    a = params.lattice_rank
    total = mpmath.mpc(0)
    for m, theta_m in enumerate(thetas):
        total += mpmath.expjpi(-mpmath.mpf(b * m) / a) * mpmath.sinpi(mpmath.mpf(c * m) / a) * theta_m
    return 2j / params.alpha * total


def correction_X(params: value.ModelParams, b: int, c: int, ctx: value.EvalContext) -> mpmath.mpc:
    thetas = _shifted_thetas(params, ctx)
    with ctx.precision():
        return _x_from_thetas(params, b, c, thetas)


def correction_X_deriv(params: value.ModelParams, b: int, c: int, ctx: value.EvalContext) -> mpmath.mpc:
    """d/deps of correction_X."""
    thetas = _shifted_thetas(params, ctx, deriv=True)
    with ctx.precision():
        return _x_from_thetas(params, b, c, thetas)


def _false_pairs(params, r: int, s: int, n: int) -> List[Tuple[Tuple[int, int], Tuple[int, int], mpmath.mpf, mpmath.mpf]]:
    a = params.lattice_rank
    big_r, big_s = r * params.p_minus, s * params.p_plus
    base = (2 - n) * a
    return [
        (
            (base - nu * big_s, nu * big_r),
            (base - nu * big_r, nu * big_s),
            n + mpmath.mpf(2 * nu * s) / params.p_minus,
            n + mpmath.mpf(2 * nu * r) / params.p_plus,
        )
        for nu in (1, -1)
    ]


def correction_Y(params: value.ModelParams, r: int, s: int, n: int, ctx: value.EvalContext) -> mpmath.mpc:
    """Correction term of I(r,s;n), assembled from the X terms of its false theta parts."""
    plain = _shifted_thetas(params, ctx)
    derived = _shifted_thetas(params, ctx, deriv=True)
    with ctx.precision():
        to_prime = -1 / (2 * mpmath.pi * params.alpha)
        total = mpmath.mpc(0)
        for by_s, by_r, weight_s, weight_r in _false_pairs(params, r, s, n):
            primes = _x_from_thetas(params, *by_s, derived) + _x_from_thetas(params, *by_r, derived)
            total += to_prime * primes / 2
            total += (
                weight_s * _x_from_thetas(params, *by_s, plain)
                + weight_r * _x_from_thetas(params, *by_r, plain)
            ) / 4
        return total


def _kac_sign(params, n: int, r2: int, s2: int) -> int:
    return -1 if (n * (params.p_plus * s2 + params.p_minus * r2)) % 2 else 1


def correction_Y_limit(params: value.ModelParams, r: int, s: int, n: int, ctx: value.EvalContext) -> mpmath.mpc:
    """The eps -> 0 value of correction_Y, written through minimal-model characters."""
    total = mpmath.mpc(0)
    for kac in model.kac_table(params):
        chi = characters.char_virasoro(params, kac, ctx)
        with ctx.precision():
            total += _kac_sign(params, n, kac.r, kac.s) * smatrix_entry(params, r, s, kac.r, kac.s) * chi
    return -n * total


# ---- Finite S-matrices ----
def smatrix_entry(params: value.ModelParams, r: int, s: int, r2: int, s2: int) -> mpmath.mpf:
    """S^Vir for any labels, including those outside the Kac table."""
    p_plus, p_minus = params.p_plus, params.p_minus
    sign = -1 if ((r + s) * (r2 + s2)) % 2 else 1
    return (
        sign
        * mpmath.sqrt(mpmath.mpf(8) / params.lattice_rank)
        * mpmath.sinpi(mpmath.mpf(r * r2 * (p_minus - p_plus)) / p_plus)
        * mpmath.sinpi(mpmath.mpf(s * s2 * (p_minus - p_plus)) / p_minus)
    )


def smatrix_virasoro(params: value.ModelParams) -> np.ndarray:
    table = model.kac_table(params)
    return np.array(
        [[float(smatrix_entry(params, i.r, i.s, j.r, j.s)) for j in table] for i in table]
    )


def smatrix_wzw(k: int) -> np.ndarray:
    if k < 0:
        raise ValueError(f"The level must be non-negative, but was given: {k}")
    labels_ = np.arange(1, k + 2)
    return np.sqrt(2 / (k + 2)) * np.sin(np.pi * np.outer(labels_, labels_) / (k + 2))


def _virasoro_image(params, r: int, s: int, ctx: value.EvalContext) -> mpmath.mpc:
    total = mpmath.mpc(0)
    for kac in model.kac_table(params):
        chi = characters.char_virasoro(params, kac, ctx)
        with ctx.precision():
            total += smatrix_entry(params, r, s, kac.r, kac.s) * chi
    return total


# ---- Quadrature ----
def _cutoff(ctx: value.EvalContext, growth, scale) -> mpmath.mpf:
    if ctx.quad_cutoff is not None:
        return mpmath.mpf(ctx.quad_cutoff)
    y = ctx.tau.imag
    log_ratio = mpmath.log(max(scale, 1) / ctx.quad_abs_tol) + 2
    return (growth + mpmath.sqrt(growth**2 + 4 * mpmath.pi * y * log_ratio)) / (2 * mpmath.pi * y)


def line_integral(
    what: str,
    params: value.ModelParams,
    kernel: Callable[[mpmath.mpf], mpmath.mpc],
    ctx: value.EvalContext,
    growth=0,
    poles: bool = True,
) -> mpmath.mpc:
    """Integral over real x of kernel(x) ch F^eps_{x + alpha_0/2}(tau)."""
    with ctx.precision():
        eps, tau = ctx.eps, ctx.tau

        def integrand(x):
            return kernel(x) * mpmath.exp(2 * mpmath.pi * eps * x) * mpmath.expjpi(tau * x * x)

        alpha = params.alpha
        scale = max(abs(integrand(mpmath.mpf(0))), abs(integrand(1 / (2 * alpha))))
        x_max = _cutoff(ctx, mpmath.mpf(growth), scale)
        nodes = {-x_max, mpmath.mpf(0), x_max}
        nodes.update(mpmath.mpf(k) for k in range(int(-x_max), int(x_max) + 1))
        if poles:
            k_low = int(mpmath.floor((-x_max - eps.imag) * alpha))
            k_high = int(mpmath.ceil((x_max - eps.imag) * alpha))
            nodes.update(
                k / alpha + eps.imag for k in range(k_low, k_high + 1)
                if abs(k / alpha + eps.imag) < x_max
            )
        points = sorted(nodes)
        result, error = mpmath.quad(integrand, points, error=True)
        requested = ctx.quad_abs_tol * max(1, abs(result))
        logger.debug("%s: %d panels up to |x| = %.3f, error %.2e", what, len(points) - 1, float(x_max), float(error))
        if error > requested:
            raise value.QuadratureError(what, float(error), requested)
        return result / series.eta(ctx).value


def gaussian_kernel_check(f: Callable[[float], float], y: float) -> float:
    """2 sqrt(y) times the integral of exp(-y pi x^2) f(x) over x >= 0; tends to f(0) as y grows."""
    result, _ = integrate.quad(lambda x: np.exp(-y * np.pi * x * x) * f(x), 0, np.inf)
    return 2 * np.sqrt(y) * result


# ---- Verification ----
def _inverted(ctx: value.EvalContext) -> value.EvalContext:
    with ctx.precision():
        return ctx.with_tau(-1 / ctx.tau)


def verify_theta_transform(idx: value.ThetaIndex, u, ctx: value.EvalContext) -> value.ResidualReport:
    """theta_{a,b}(u/tau; -1/tau) against sqrt(-i tau/2a) e^{pi i u^2/(2 a tau)} sum_b' e^{-pi i b b'/a} theta_{a,b'}(u; tau)."""
    a, b = idx.a, idx.b
    with ctx.precision():
        u = mpmath.mpc(u)
        tau = ctx.tau
        argument = u / tau
    lhs = series.theta(idx, argument, _inverted(ctx)).value
    images = [series.theta(value.ThetaIndex(a, other), u, ctx).value for other in range(2 * a)]
    with ctx.precision():
        prefactor = mpmath.sqrt(-1j * tau / (2 * a)) * mpmath.expjpi(u * u / (2 * a * tau))
        rhs = prefactor * mpmath.fsum(
            mpmath.expjpi(-mpmath.mpf(b * other) / a) * image for other, image in enumerate(images)
        )
    return value.ResidualReport.build(lhs, rhs, ctx)


def _correction_switch(eps) -> int:
    """(1 - sgn Re eps) / 2."""
    _require_real_part(eps)
    return 1 if mpmath.mpc(eps).real < 0 else 0


def _typical_rhs(params, weight, ctx: value.EvalContext) -> mpmath.mpc:
    with ctx.precision():
        shifted = mpmath.mpc(weight) - params.alpha_zero / 2
        growth = 2 * mpmath.pi * abs(shifted.imag)
    return line_integral(
        "typical S-transform", params,
        lambda x: s_kernel_typical(shifted, x, ctx.eps), ctx, growth=growth, poles=False,
    )


def _false_rhs(params, b: int, c: int, ctx: value.EvalContext) -> mpmath.mpc:
    integral = line_integral(
        f"F[{b},{c}] S-transform", params, lambda x: s_kernel_false(params, b, c, x, ctx.eps), ctx
    )
    if _correction_switch(ctx.eps):
        integral += correction_X(params, b, c, ctx)
    return integral


def _plus_rhs(params, r: int, s: int, n: int, ctx) -> mpmath.mpc:
    a = params.lattice_rank
    total = _false_rhs(params, (2 - n) * a - s * params.p_plus, r * params.p_minus, ctx)
    if s != params.p_minus and n >= 1:
        if n % 2 == 0:
            total += _virasoro_image(params, r, s, ctx)
        else:
            total -= _virasoro_image(params, r, params.p_minus - s, ctx)
    return total


def _minus_rhs(params, r: int, s: int, n: int, ctx) -> mpmath.mpc:
    a = params.lattice_rank
    total = _false_rhs(params, -n * a + r * params.p_minus, s * params.p_plus, ctx)
    if r != params.p_plus and n >= 0:
        if n % 2 == 1:
            total += _virasoro_image(params, r, params.p_minus - s, ctx)
        else:
            total -= _virasoro_image(params, r, s, ctx)
    return total


def _interior_rhs(params, r: int, s: int, n: int, ctx) -> mpmath.mpc:
    total = line_integral(
        f"I({r},{s};{n}) S-transform", params,
        lambda x: s_kernel_atypical(params, r, s, n, x, ctx.eps), ctx,
    )
    if n >= 1:
        for kac in model.kac_table(params):
            chi = characters.char_virasoro(params, kac, ctx)
            with ctx.precision():
                total += n * _kac_sign(params, n, kac.r, kac.s) * smatrix_entry(params, r, s, kac.r, kac.s) * chi
    if _correction_switch(ctx.eps):
        total += correction_Y(params, r, s, n, ctx)
    return total


def _atypical_rhs(params, label: interfaces.ModuleLabel, ctx) -> mpmath.mpc:
    r, s, n = label.r, label.s, label.n
    if isinstance(label, labels.AtypicalIPlus):
        return _plus_rhs(params, r, s, n, ctx)
    if isinstance(label, labels.AtypicalIMinus):
        return _minus_rhs(params, r, s, n, ctx)
    if r == params.p_plus and s == params.p_minus:
        return _typical_rhs(params, model.fock_weight(params, r, s, n), ctx)
    if r == params.p_plus:
        return _minus_rhs(params, r, s, n, ctx)
    if s == params.p_minus:
        return _plus_rhs(params, r, s, n, ctx)
    return _interior_rhs(params, r, s, n, ctx)


def verify_s_transform(
    params: value.ModelParams, label: interfaces.ModuleLabel, ctx: value.EvalContext
) -> value.ResidualReport:
    """Character at -1/tau against its transformed expansion at tau."""
    label.validate(params)
    lhs = characters.character(params, label, _inverted(ctx))
    if isinstance(label, labels.Typical):
        rhs = _typical_rhs(params, label.weight, ctx)
    elif isinstance(label, labels.Virasoro):
        rhs = _virasoro_image(params, label.kac.r, label.kac.s, ctx)
    elif isinstance(label, labels.Kernel):
        rhs = _virasoro_image(params, label.r, label.s, ctx) + _interior_rhs(
            params, label.r, label.s, 0, ctx
        )
    else:
        rhs = _atypical_rhs(params, label, ctx)
    report = value.ResidualReport.build(lhs, rhs, ctx)
    logger.debug("S-transform of %s: relative residual %.2e", label, report.rel_residual)
    return report


def verify_false_theta_transform(
    params: value.ModelParams, b: int, c: int, ctx: value.EvalContext
) -> value.ResidualReport:
    lhs = series.mixed_false_theta(params, b, c, ctx.eps, _inverted(ctx)).value
    rhs = _false_rhs(params, b, c, ctx)
    return value.ResidualReport.build(lhs, rhs, ctx)
