from fractions import Fraction
from typing import List

import mpmath

from singlet.domain import interfaces, labels, value


# ---- Kac table ----
def kac_table(params: value.ModelParams) -> List[value.KacLabel]:
    return [
        value.KacLabel(r, s)
        for r in range(1, params.p_plus)
        for s in range(1, params.p_minus)
        if s * params.p_plus > r * params.p_minus
    ]


def kac_representative(params: value.ModelParams, r: int, s: int) -> value.KacLabel:
    """Member of the Kac table equal to (r,s) or (p_plus - r, p_minus - s)."""
    for candidate in (value.KacLabel(r, s), value.KacLabel(params.p_plus - r, params.p_minus - s)):
        try:
            candidate.validate(params)
            return candidate
        except value.InvalidKacLabel:
            continue
    raise value.InvalidKacLabel(
        f"({r}, {s}) has no representative in the Kac table of ({params.p_plus}, {params.p_minus})"
    )


def minimal_model_vacuum(params: value.ModelParams) -> value.KacLabel:
    return kac_representative(params, 1, 1)


# ---- Weights ----
def fock_lattice_units(params: value.ModelParams, r: int, s: int, n: int) -> Fraction:
    """alpha_{r,s;n} in units of kappa."""
    return Fraction(
        (1 - r) * params.p_minus - (1 - s) * params.p_plus + n * params.lattice_rank, 2
    )


def fock_weight(params: value.ModelParams, r: int, s: int, n: int) -> mpmath.mpf:
    return (
        mpmath.mpf(1 - r) / 2 * params.alpha_plus
        + mpmath.mpf(1 - s) / 2 * params.alpha_minus
        + mpmath.mpf(n) / 2 * params.alpha
    )


def conformal_dim(params: value.ModelParams, label: interfaces.ModuleLabel):
    """Exact Fraction for Virasoro labels, mpc for typical ones."""
    if isinstance(label, labels.Virasoro):
        label.validate(params)
        return virasoro_dim(params, label.kac.r, label.kac.s)
    if isinstance(label, labels.Typical):
        return label.weight * (label.weight - params.alpha_zero) / 2
    raise labels.InvalidModuleLabel(
        f"Conformal dimension is defined for typical and Virasoro labels, not {label.kind()}; "
        f"compose fock_weight with a typical label instead"
    )


def virasoro_dim(params: value.ModelParams, r: int, s: int) -> Fraction:
    return Fraction(
        (params.p_minus * r - params.p_plus * s) ** 2 - (params.p_plus - params.p_minus) ** 2,
        4 * params.lattice_rank,
    )
