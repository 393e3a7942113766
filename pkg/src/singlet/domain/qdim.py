"""Regularised quantum dimensions.

The eps-plane splits along the wall B(eps) into a continuous half, where the
integral part of the S-transform dominates, and a discrete half cut into
horizontal strips. Inside a strip the quantum dimension is constant.
"""
import concurrent.futures
import dataclasses
import functools
import logging
import os
from typing import List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from singlet.domain import characters, interfaces, labels, value

logger = logging.getLogger(__name__)

WALL_TOL = 1e-12
LEAK_OFFSET = 1e-6
PARALLEL_CELLS = 400
DEFAULT_QDIM_TOL = 1e-5
MAX_Y = 0.02
MIN_Y = 5e-4
WINDOW = 3
GAP_FRACTION = 0.15


# ---- Related errors ----
class OnWallError(ValueError):
    pass


class QdimRatioError(value.NumericalError):
    pass


# ---- Regimes ----
@dataclasses.dataclass(frozen=True)
class Continuous(interfaces.Regime):
    pass


@dataclasses.dataclass(frozen=True)
class Discrete(interfaces.Regime):
    k: int
    m: int


@dataclasses.dataclass(frozen=True)
class OnWall(interfaces.Regime):
    pass


def _index(params: value.ModelParams, eps) -> Tuple[int, mpmath.mpf]:
    scaled = params.alpha * mpmath.mpc(eps).imag
    return int(mpmath.nint(scaled)), scaled


def wall(params: value.ModelParams, eps) -> float:
    """B = -min over m outside qZ of |m/alpha - Im eps|."""
    q = params.lattice_rank
    scaled = params.alpha * mpmath.mpc(eps).imag
    below = int(mpmath.floor(scaled))
    candidates = [m for m in range(below - 1, below + 3) if m % q]
    return -float(min(abs(m - scaled) for m in candidates) / params.alpha)


def strip(params: value.ModelParams, eps) -> Tuple[int, int]:
    nearest, _ = _index(params, eps)
    k, m = divmod(nearest, 2 * params.lattice_rank)
    return k, m


def regime(params: value.ModelParams, eps) -> interfaces.Regime:
    real_part = float(mpmath.mpc(eps).real)
    boundary = wall(params, eps)
    if abs(real_part - boundary) <= WALL_TOL:
        return OnWall()
    if real_part > boundary:
        return Continuous()
    return Discrete(*strip(params, eps))


def vacuum_label(params: value.ModelParams) -> interfaces.ModuleLabel:
    if params.is_one_p_family:
        return labels.AtypicalI(1, 1, 0)
    return labels.Kernel(1, 1)


# ---- Closed forms ----
def _cosh_arguments(params, eps):
    eps = mpmath.mpc(eps)
    return (
        mpmath.cosh(mpmath.pi * params.alpha_plus * eps),
        mpmath.cosh(mpmath.pi * abs(params.alpha_minus) * eps),
    )


def _continuous(params: value.ModelParams, label: interfaces.ModuleLabel, eps) -> mpmath.mpc:
    eps = mpmath.mpc(eps)
    pi, alpha = mpmath.pi, params.alpha
    c_plus, c_minus = _cosh_arguments(params, eps)
    u = mpmath.chebyu
    if isinstance(label, labels.Typical):
        return (
            mpmath.exp(2 * pi * eps * (label.weight - params.alpha_zero / 2))
            * u(params.p_plus - 1, c_plus)
            * u(params.p_minus - 1, c_minus)
        )
    if isinstance(label, labels.Virasoro):
        return mpmath.mpc(0)
    if isinstance(label, labels.Kernel):
        label = labels.AtypicalI(label.r, label.s, 0)
    r, s, n = label.r, label.s, label.n
    if isinstance(label, labels.AtypicalIPlus):
        return (
            mpmath.exp(pi * (n - 1) * alpha * eps + pi * s * abs(params.alpha_minus) * eps)
            * u(r - 1, c_plus)
            * u(params.p_minus - 1, c_minus)
        )
    if isinstance(label, labels.AtypicalIMinus):
        return (
            mpmath.exp(pi * (n + 1) * alpha * eps - pi * r * params.alpha_plus * eps)
            * u(params.p_plus - 1, c_plus)
            * u(s - 1, c_minus)
        )
    return mpmath.exp(pi * n * alpha * eps) * u(r - 1, c_plus) * u(s - 1, c_minus)


def _sin_ratio(numerator: int, index: int, period: int) -> mpmath.mpf:
    return mpmath.sinpi(mpmath.mpf(numerator * index) / period) / mpmath.sinpi(
        mpmath.mpf(index) / period
    )


def discrete_index(params: value.ModelParams, eps) -> int:
    """Strip index; when both p_plus and p_minus divide it, the dominating neighbour."""
    nearest, scaled = _index(params, eps)
    if nearest % params.p_plus == 0 and nearest % params.p_minus == 0:
        side = 1 if scaled - nearest >= 0 else -1
        return nearest + side
    return nearest


def _discrete(params: value.ModelParams, label: interfaces.ModuleLabel, eps) -> mpmath.mpf:
    p_plus, p_minus = params.p_plus, params.p_minus
    if isinstance(label, (labels.Typical, labels.Virasoro)):
        return mpmath.mpf(0)
    if isinstance(label, labels.Kernel):
        label = labels.AtypicalI(label.r, label.s, 0)
    index = discrete_index(params, eps)
    r, s, n = label.r, label.s, label.n
    by_plus, by_minus = index % p_plus == 0, index % p_minus == 0
    if isinstance(label, labels.AtypicalIPlus):
        if not by_minus or by_plus:
            return mpmath.mpf(0)
        t = index // p_minus
        return p_minus * (-1) ** (t * (n * p_minus + s + 1)) * _sin_ratio(r, index, p_plus)
    if isinstance(label, labels.AtypicalIMinus):
        if not by_plus or by_minus:
            return mpmath.mpf(0)
        t = index // p_plus
        return p_plus * (-1) ** (t * (n * p_plus + r + 1)) * _sin_ratio(s, index, p_minus)
    sign = (-1) ** (n * index)
    if by_minus:
        t = index // p_minus
        return sign * _sin_ratio(r, index, p_plus) * s * (-1) ** (t * (s - 1))
    if by_plus:
        t = index // p_plus
        return sign * _sin_ratio(s, index, p_minus) * r * (-1) ** (t * (r - 1))
    return sign * _sin_ratio(r, index, p_plus) * _sin_ratio(s, index, p_minus)


def qdim_closed(params: value.ModelParams, label: interfaces.ModuleLabel, eps) -> mpmath.mpc:
    label.validate(params)
    if isinstance(label, labels.Virasoro):
        return mpmath.mpc(0)
    current = regime(params, eps)
    if isinstance(current, OnWall):
        raise OnWallError(f"eps = {eps} lies on the wall; the quantum dimension is not defined there")
    if isinstance(current, Continuous):
        return _continuous(params, label, eps)
    return mpmath.mpc(_discrete(params, label, eps))


# ---- Numerical estimate ----
@dataclasses.dataclass()
class QdimEstimate:
    value: mpmath.mpc
    error: float
    samples: List[Tuple[float, mpmath.mpc]]


def _ratio(params, label, vacuum, ctx: value.EvalContext) -> mpmath.mpc:
    numerator = characters.character(params, label, ctx)
    denominator = characters.character(params, vacuum, ctx)
    with ctx.precision():
        if denominator == 0 or not mpmath.isfinite(denominator) or not mpmath.isfinite(numerator):
            raise QdimRatioError(
                f"Character ratio at tau = {ctx.tau} is not finite "
                f"(numerator {mpmath.nstr(numerator, 5)}, vacuum {mpmath.nstr(denominator, 5)})"
            )
        return numerator / denominator


def extrapolate_to_zero(samples: Sequence[Tuple[float, mpmath.mpc]]) -> Tuple[mpmath.mpc, float]:
    """Neville extrapolation of the samples to y = 0."""
    ys = [y for y, _ in samples]
    table = [f for _, f in samples]
    previous = table[-1]
    for order in range(1, len(samples)):
        previous = table[-1]
        table = [
            (ys[i + order] * table[i] - ys[i] * table[i + 1]) / (ys[i + order] - ys[i])
            for i in range(len(table) - 1)
        ]
    return table[0], float(abs(table[0] - previous))


def wall_gap(params: value.ModelParams, eps) -> float:
    """y times the log-ratio between the dominant term of the character ratio and the nearest rival.

    Vanishes on the wall; the rival terms are suppressed like exp(-pi gap / y).
    """
    real_part = float(mpmath.mpc(eps).real)
    boundary = wall(params, eps)
    return abs(real_part - boundary) * (abs(real_part) + abs(boundary))


def starting_heights(params: value.ModelParams, eps) -> List[float]:
    """Starting sample heights, halving from below the wall gap.

    In the continuous half the power corrections grow with |eps|, so the first
    height is also kept below MAX_Y / (1 + |eps|^2).
    """
    start = min(MAX_Y, GAP_FRACTION * wall_gap(params, eps))
    if isinstance(regime(params, eps), Continuous):
        start = min(start, MAX_Y / (1 + abs(complex(eps)) ** 2))
    return [start / 2**k for k in range(WINDOW + 1)]


def qdim_numeric(
    params: value.ModelParams,
    label: interfaces.ModuleLabel,
    eps,
    y_schedule: Optional[Sequence[float]] = None,
    ctx: Optional[value.EvalContext] = None,
    tol: float = DEFAULT_QDIM_TOL,
) -> QdimEstimate:
    """ch[label] / ch[vacuum] at tau = iy, extrapolated to y = 0.

    Each estimate is a Neville fit through the last WINDOW samples; the error
    is its distance to the fit one sample earlier. The height is halved until
    the error drops below tol (relative, for estimates above one) or MIN_Y is
    reached, in which case QdimRatioError is raised.
    """
    label.validate(params)
    if mpmath.mpc(eps).real == 0:
        raise OnWallError(f"qdim_numeric needs Re(eps) != 0, but was given: {eps}")
    if isinstance(regime(params, eps), OnWall):
        raise OnWallError(f"eps = {eps} lies on the wall; the quantum dimension is not defined there")
    heights = sorted(y_schedule or starting_heights(params, eps), reverse=True)
    if len(heights) <= WINDOW:
        raise ValueError(f"qdim_numeric needs at least {WINDOW + 1} heights, but was given: {heights}")
    if heights[-1] < MIN_Y:
        raise QdimRatioError(
            f"eps = {eps} is too close to the wall for a numerical estimate "
            f"(gap {wall_gap(params, eps):.2e}, smallest height {heights[-1]:.2e})"
        )
    base = (ctx or value.EvalContext()).with_eps(eps)
    vacuum = vacuum_label(params)

    def sample(y: float) -> Tuple[float, mpmath.mpc]:
        ratio = _ratio(params, label, vacuum, base.with_tau(1j * y))
        logger.debug("qdim ratio at y = %g: %s", y, mpmath.nstr(ratio, 10))
        return y, ratio

    samples = [sample(y) for y in heights]
    while True:
        estimate, _ = extrapolate_to_zero(samples[-WINDOW:])
        previous, _ = extrapolate_to_zero(samples[-WINDOW - 1 : -1])
        error = float(abs(estimate - previous))
        if error <= tol * max(1, float(abs(estimate))):
            return QdimEstimate(value=estimate, error=error, samples=samples)
        y = samples[-1][0] / 2
        if y < MIN_Y:
            raise QdimRatioError(
                f"Character ratio at eps = {eps} did not settle above y = {MIN_Y} "
                f"(extrapolation error {error:.2e})"
            )
        samples.append(sample(y))


# ---- Leak points ----
@dataclasses.dataclass()
class LeakReport:
    left: mpmath.mpc
    right: mpmath.mpc
    left_regime: interfaces.Regime
    right_regime: interfaces.Regime

    def agrees(self, tol: float = 1e-6) -> bool:
        return abs(self.left - self.right) < tol


def leak_check(
    params: value.ModelParams, label: interfaces.ModuleLabel, m: int, delta: float = LEAK_OFFSET
) -> LeakReport:
    """One-sided quantum dimensions either side of the wall at Im(eps) = m/alpha.

    The module is any label (I, I+, I-, kernel or typical) rather than an
    (r, s, n) triple. The two points sit at Re(eps) = B -/+ delta, with B the
    wall at that height. For m outside qZ the wall passes through Re(eps) = 0,
    so these are the points -/+ delta; for m in qZ they straddle the shifted wall.
    """
    imag = mpmath.mpf(m) / params.alpha
    boundary = wall(params, 1j * imag)
    left_eps = mpmath.mpc(boundary - delta, imag)
    right_eps = mpmath.mpc(boundary + delta, imag)
    return LeakReport(
        left=qdim_closed(params, label, left_eps),
        right=qdim_closed(params, label, right_eps),
        left_regime=regime(params, left_eps),
        right_regime=regime(params, right_eps),
    )


# ---- Scans ----
@dataclasses.dataclass(init=False)
class Rectangle:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    nx: int
    ny: int

    def __init__(self, re_min: float, re_max: float, im_min: float, im_max: float, nx: int, ny: int):
        if re_min >= re_max or im_min >= im_max:
            raise ValueError(
                f"Rectangle bounds must be increasing, but was given: "
                f"[{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )
        if nx < 1 or ny < 1:
            raise ValueError(f"Grid resolution must be positive, but was given: {nx} x {ny}")
        self.re_min, self.re_max = float(re_min), float(re_max)
        self.im_min, self.im_max = float(im_min), float(im_max)
        self.nx, self.ny = int(nx), int(ny)

    def points(self) -> List[complex]:
        return [
            complex(x, y)
            for y in np.linspace(self.im_min, self.im_max, self.ny)
            for x in np.linspace(self.re_min, self.re_max, self.nx)
        ]


@dataclasses.dataclass()
class ScanRow:
    eps: complex
    value: Optional[complex]
    regime: interfaces.Regime


def _scan_cell(params: value.ModelParams, label: interfaces.ModuleLabel, eps: complex) -> ScanRow:
    current = regime(params, eps)
    result = None if isinstance(current, OnWall) else complex(qdim_closed(params, label, eps))
    return ScanRow(eps=eps, value=result, regime=current)


def qdim_scan(
    params: value.ModelParams,
    label: interfaces.ModuleLabel,
    grid: Rectangle,
    workers: Optional[int] = None,
) -> List[ScanRow]:
    """Closed-form quantum dimensions over the grid, row by row.

    Grids of PARALLEL_CELLS cells or more are mapped over worker processes;
    rows come back in grid order either way. workers=1 keeps it in-process.
    """
    label.validate(params)
    points = grid.points()
    cell = functools.partial(_scan_cell, params, label)
    if workers == 1 or len(points) < PARALLEL_CELLS:
        return [cell(eps) for eps in points]
    count = workers or os.cpu_count() or 1
    with concurrent.futures.ProcessPoolExecutor(max_workers=count) as executor:
        return list(executor.map(cell, points, chunksize=max(1, len(points) // (4 * count))))
