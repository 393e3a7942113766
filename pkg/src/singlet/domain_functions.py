import logging
from fractions import Fraction
from typing import Callable, Dict, Optional, Tuple

import mpmath

from singlet.domain import (
    characters,
    fusion,
    labels,
    model,
    modular,
    qdim,
    qmf,
    value,
    variety,
)
from singlet.transfer.conversions import (
    CommandResultDTO,
    ComplexDTO,
    EvalContextDTO,
    FusionElementDTO,
    LabelDTO,
    ModelParamsDTO,
    RegimeDTO,
    ResidualReportDTO,
    ScanRowDTO,
    SeriesValueDTO,
)


class CommandError(Exception):
    """Raised when there is an error executing a command."""

    pass


# ---- Utils ----
def _envelope(command: str, params=None, context=None, result=None, **diagnostics) -> CommandResultDTO:
    return CommandResultDTO(
        command=command, params=params, context=context, result=result, diagnostics=diagnostics
    )


def _run(command: str, action: Callable[[], CommandResultDTO]) -> CommandResultDTO:
    logging.info("Running %s", command)
    try:
        result = action()
    except Exception as error:
        raise CommandError(f"Failed to run {command}: {error}") from error
    logging.info("Finished %s", command)
    return result


def _resolution(params, label, ctx) -> mpmath.mpc:
    if isinstance(label, labels.AtypicalIPlus):
        return characters.char_plus_resolution(params, label.r, label.s, label.n, ctx)
    if isinstance(label, labels.AtypicalIMinus):
        return characters.char_minus_resolution(params, label.r, label.s, label.n, ctx)
    raise labels.InvalidModuleLabel(f"The resolution form needs an I+ or I- label, but was given: {label}")


def _interior_form(function):
    def evaluate(params, label, ctx) -> mpmath.mpc:
        if not isinstance(label, labels.AtypicalI):
            raise labels.InvalidModuleLabel(f"This form needs an I label, but was given: {label}")
        return function(params, label.r, label.s, label.n, ctx)

    return evaluate


CHARACTER_FORMS: Dict[str, Callable] = {
    "F": characters.character,
    "resolution": _resolution,
    "from-plus": _interior_form(characters.char_from_plus),
    "from-minus": _interior_form(characters.char_from_minus),
    "fock": _interior_form(characters.char_fock_resolution),
}


# ---- Characters ----
def evaluate_character(
    params: ModelParamsDTO, label: LabelDTO, context: EvalContextDTO, form: str = "F"
) -> CommandResultDTO:
    def action():
        if form not in CHARACTER_FORMS:
            raise ValueError(f"Unknown character form {form!r}; choose from {sorted(CHARACTER_FORMS)}")
        domain_params = ModelParamsDTO.to_domain(params)
        domain_label = LabelDTO.to_domain(label)
        ctx = EvalContextDTO.to_domain(context)
        domain_label.validate(domain_params)
        result = characters.character_series(domain_params, domain_label, ctx, CHARACTER_FORMS[form])
        return _envelope(
            "char",
            params,
            context,
            SeriesValueDTO.from_domain(result),
            label=LabelDTO.from_domain(domain_label).text,
            form=form,
        )

    return _run("char", action)


def expand_character(params: ModelParamsDTO, label: LabelDTO, order: int) -> CommandResultDTO:
    def action():
        domain_params = ModelParamsDTO.to_domain(params)
        domain_label = LabelDTO.to_domain(label)
        expansion = characters.q_expansion(domain_params, domain_label, order)
        return _envelope(
            "char",
            params,
            None,
            {
                "label": LabelDTO.from_domain(domain_label).text,
                "leading_exponent": str(expansion.leading_exponent),
                "coefficients": list(expansion.coefficients),
            },
        )

    return _run("char --order", action)


# ---- Modular transformations ----
def verify_stransform(params: ModelParamsDTO, label: LabelDTO, context: EvalContextDTO) -> CommandResultDTO:
    def action():
        domain_params = ModelParamsDTO.to_domain(params)
        domain_label = LabelDTO.to_domain(label)
        report = modular.verify_s_transform(domain_params, domain_label, EvalContextDTO.to_domain(context))
        return _envelope(
            "stransform",
            params,
            context,
            ResidualReportDTO.from_domain(report),
            label=LabelDTO.from_domain(domain_label).text,
        )

    return _run("stransform", action)


def verify_false_theta(params: ModelParamsDTO, b: int, c: int, context: EvalContextDTO) -> CommandResultDTO:
    def action():
        report = modular.verify_false_theta_transform(
            ModelParamsDTO.to_domain(params), b, c, EvalContextDTO.to_domain(context)
        )
        return _envelope("stransform", params, context, ResidualReportDTO.from_domain(report), b=b, c=c)

    return _run("stransform --false-theta", action)


# ---- Quantum dimensions ----
def quantum_dimension(
    params: ModelParamsDTO, label: LabelDTO, context: EvalContextDTO, mode: str = "closed"
) -> CommandResultDTO:
    def action():
        domain_params = ModelParamsDTO.to_domain(params)
        domain_label = LabelDTO.to_domain(label)
        ctx = EvalContextDTO.to_domain(context)
        current = RegimeDTO.from_domain(qdim.regime(domain_params, ctx.eps))
        if mode == "closed":
            result = qdim.qdim_closed(domain_params, domain_label, ctx.eps)
            return _envelope(
                "qdim", params, context, {"value": ComplexDTO.from_domain(result), "regime": current}
            )
        if mode == "numeric":
            estimate = qdim.qdim_numeric(domain_params, domain_label, ctx.eps, ctx=ctx)
            return _envelope(
                "qdim",
                params,
                context,
                {"value": ComplexDTO.from_domain(estimate.value), "regime": current},
                error=estimate.error,
                samples=[[y, ComplexDTO.from_domain(f).model_dump()] for y, f in estimate.samples],
            )
        raise ValueError(f"Unknown qdim mode {mode!r}; choose 'closed' or 'numeric'")

    return _run("qdim", action)


def leak_points(params: ModelParamsDTO, label: LabelDTO, m: int, delta: float = qdim.LEAK_OFFSET) -> CommandResultDTO:
    def action():
        domain_params = ModelParamsDTO.to_domain(params)
        report = qdim.leak_check(domain_params, LabelDTO.to_domain(label), m, delta)
        return _envelope(
            "qdim",
            params,
            None,
            {
                "left": ComplexDTO.from_domain(report.left),
                "right": ComplexDTO.from_domain(report.right),
                "left_regime": RegimeDTO.from_domain(report.left_regime),
                "right_regime": RegimeDTO.from_domain(report.right_regime),
                "agrees": report.agrees(),
            },
            m=m,
            delta=delta,
        )

    return _run("qdim --leak", action)


def scan_quantum_dimension(
    params: ModelParamsDTO, label: LabelDTO, rectangle: Tuple[float, float, float, float, int, int]
) -> CommandResultDTO:
    def action():
        domain_params = ModelParamsDTO.to_domain(params)
        grid = qdim.Rectangle(*rectangle)
        rows = qdim.qdim_scan(domain_params, LabelDTO.to_domain(label), grid)
        return _envelope("qdim-scan", params, None, [ScanRowDTO.from_domain(row) for row in rows])

    return _run("qdim-scan", action)


# ---- Fusion ----
def fuse_labels(params: ModelParamsDTO, left: LabelDTO, right: LabelDTO) -> CommandResultDTO:
    def action():
        domain_params = ModelParamsDTO.to_domain(params)
        a = fusion.FusionElement.from_label(LabelDTO.to_domain(left))
        b = fusion.FusionElement.from_label(LabelDTO.to_domain(right))
        product = fusion.fuse(domain_params, a, b)
        return _envelope(
            "fuse",
            params,
            None,
            FusionElementDTO.from_domain(product),
            left=left.text,
            right=right.text,
        )

    return _run("fuse", action)


def verlinde(minimal: Optional[Tuple[int, int]] = None, wzw: Optional[int] = None) -> CommandResultDTO:
    def action():
        if (minimal is None) == (wzw is None):
            raise ValueError("Name exactly one S-matrix: a minimal model (p_plus, p_minus) or an SU(2) level")
        if minimal is not None:
            domain_params = value.ModelParams.build(*minimal)
            S = modular.smatrix_virasoro(domain_params)
            table = model.kac_table(domain_params)
            vacuum = table.index(model.minimal_model_vacuum(domain_params))
            names = [f"L:{kac.r},{kac.s}" for kac in table]
            params = ModelParamsDTO.from_domain(domain_params)
        else:
            S = modular.smatrix_wzw(wzw)
            vacuum = 0
            names = [f"j={j}/2" for j in range(wzw + 1)]
            params = None
        tensor = fusion.verlinde_coeffs(S, vacuum)
        return _envelope(
            "verlinde",
            params,
            None,
            {"basis": names, "vacuum": names[vacuum], "coefficients": tensor.astype(int).tolist()},
        )

    return _run("verlinde", action)


# ---- Fusion varieties ----
def _complex_list(values):
    return [ComplexDTO.from_domain(x) for x in values]


def variety_points(params: ModelParamsDTO) -> CommandResultDTO:
    def action():
        domain_params = ModelParamsDTO.to_domain(params)
        points = variety.singular_points(domain_params)
        result = {
            "count": len(points),
            "points": [
                {"exact": [str(c) for c in point.exact], "values": _complex_list(point.values)}
                for point in points
            ],
        }
        if domain_params.is_one_p_family:
            result["hessian_determinants"] = _complex_list(variety.hessian_determinants(domain_params))
        return _envelope("variety", params, None, result)

    return _run("variety --singular", action)


def variety_parametrize(params: ModelParamsDTO, t: complex) -> CommandResultDTO:
    def action():
        domain_params = ModelParamsDTO.to_domain(params)
        point = variety.parametrize(domain_params, t)
        residuals = variety.curve_eval(domain_params, point)
        return _envelope(
            "variety",
            params,
            None,
            {"point": _complex_list(point), "residuals": _complex_list(residuals)},
            t=ComplexDTO.from_domain(t),
        )

    return _run("variety --parametrize", action)


def variety_uniformise(params: ModelParamsDTO, context: EvalContextDTO) -> CommandResultDTO:
    def action():
        domain_params = ModelParamsDTO.to_domain(params)
        eps = EvalContextDTO.to_domain(context).eps
        report = variety.uniformisation_check(domain_params, eps)
        return _envelope(
            "variety",
            params,
            context,
            ResidualReportDTO.from_domain(report),
            t=ComplexDTO.from_domain(variety.uniformiser(domain_params, eps)),
        )

    return _run("variety --uniformise", action)


# ---- Quantum modular forms ----
def qmf_cocycle_half(p: int, w: complex, context: EvalContextDTO) -> CommandResultDTO:
    def action():
        report = qmf.cocycle_check_halfint(p, value.LowerHalfPoint.build(w), EvalContextDTO.to_domain(context))
        return _envelope(
            "qmf", None, context, ResidualReportDTO.from_domain(report), p=p, w=ComplexDTO.from_domain(w)
        )

    return _run("qmf --cocycle half", action)


def qmf_cocycle_weight32(params: ModelParamsDTO, w: complex, context: EvalContextDTO) -> CommandResultDTO:
    def action():
        report = qmf.cocycle_check_weight32(
            ModelParamsDTO.to_domain(params), value.LowerHalfPoint.build(w), EvalContextDTO.to_domain(context)
        )
        return _envelope(
            "qmf", params, context, ResidualReportDTO.from_domain(report), w=ComplexDTO.from_domain(w)
        )

    return _run("qmf --cocycle weight32", action)


def qmf_radial(j: int, p: int, x: str, context: EvalContextDTO) -> CommandResultDTO:
    def action():
        report = qmf.radial_limit_check(j, p, Fraction(x), ctx=EvalContextDTO.to_domain(context))
        return _envelope(
            "qmf",
            None,
            context,
            {
                "upper": ComplexDTO.from_domain(report.upper),
                "lower": ComplexDTO.from_domain(report.lower),
                "agrees": report.agrees(),
            },
            j=j,
            p=p,
            x=x,
            upper_error=report.upper_error,
            lower_error=report.lower_error,
        )

    return _run("qmf --radial", action)

