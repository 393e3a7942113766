import json
import re
from typing import Any, Dict, List, Optional, TypeAlias

import mpmath
from pydantic import BaseModel, Field

from singlet.domain import fusion, interfaces, labels, qdim, value

# ---- Utils ----
LabelText: TypeAlias = str
SIGNIFICANT_DIGITS = 15


class InvalidLabelSyntax(ValueError):
    pass


def _round(number) -> float:
    return float(f"{float(number):.{SIGNIFICANT_DIGITS}g}")


def parse_complex(text: str) -> complex:
    """`re` or `re,im`."""
    parts = text.split(",")
    if not 1 <= len(parts) <= 2:
        raise ValueError(f"Expected 're' or 're,im', but was given: {text!r}")
    try:
        numbers = [float(part) for part in parts]
    except ValueError as error:
        raise ValueError(f"Expected 're' or 're,im', but was given: {text!r}") from error
    return complex(numbers[0], numbers[1] if len(numbers) == 2 else 0.0)


class ComplexDTO(BaseModel):
    re: float
    im: float

    @classmethod
    def to_domain(cls, instance: "ComplexDTO") -> mpmath.mpc:
        return mpmath.mpc(instance.re, instance.im)

    @classmethod
    def from_domain(cls, instance) -> "ComplexDTO":
        number = complex(instance)
        return cls(re=_round(number.real), im=_round(number.imag))


# ---- Model and context ----
class ModelParamsDTO(BaseModel):
    p_plus: int
    p_minus: int

    @classmethod
    def to_domain(cls, instance: "ModelParamsDTO") -> value.ModelParams:
        return value.ModelParams.build(instance.p_plus, instance.p_minus)

    @classmethod
    def from_domain(cls, instance: value.ModelParams) -> "ModelParamsDTO":
        return cls(p_plus=instance.p_plus, p_minus=instance.p_minus)


class EvalContextDTO(BaseModel):
    tau: ComplexDTO = Field(default_factory=lambda: ComplexDTO(re=0.0, im=1.0))
    eps: ComplexDTO = Field(default_factory=lambda: ComplexDTO(re=0.0, im=0.0))
    series_tail_tol: float = value.EvalContext.DEFAULT_TAIL_TOL
    max_terms: int = value.EvalContext.DEFAULT_MAX_TERMS
    quad_abs_tol: float = value.EvalContext.DEFAULT_QUAD_TOL
    precision_digits: int = value.EvalContext.DEFAULT_PRECISION

    @classmethod
    def to_domain(cls, instance: "EvalContextDTO") -> value.EvalContext:
        return value.EvalContext(
            tau=ComplexDTO.to_domain(instance.tau),
            eps=ComplexDTO.to_domain(instance.eps),
            series_tail_tol=instance.series_tail_tol,
            max_terms=instance.max_terms,
            quad_abs_tol=instance.quad_abs_tol,
            precision_digits=instance.precision_digits,
        )

    @classmethod
    def from_domain(cls, instance: value.EvalContext) -> "EvalContextDTO":
        return cls(
            tau=ComplexDTO.from_domain(instance.tau),
            eps=ComplexDTO.from_domain(instance.eps),
            series_tail_tol=instance.series_tail_tol,
            max_terms=instance.max_terms,
            quad_abs_tol=instance.quad_abs_tol,
            precision_digits=instance.precision_digits,
        )


# ---- Labels ----
_LABEL_PATTERN = re.compile(r"^\s*(F|I\+|I-|I|L|K|M)\s*:\s*(.+?)\s*$")


def _integers(text: str, count: int, raw: str) -> List[int]:
    try:
        numbers = [int(part) for part in text.split(",")]
    except ValueError as error:
        raise InvalidLabelSyntax(f"Expected {count} integers in label {raw!r}") from error
    if len(numbers) != count:
        raise InvalidLabelSyntax(f"Expected {count} integers in label {raw!r}")
    return numbers


def parse_label(text: LabelText) -> interfaces.ModuleLabel:
    """F:re[,im] | I:r,s,n | I+:r,s,n | I-:r,s,n | L:r,s | K:r,s | M:r,s."""
    match = _LABEL_PATTERN.match(text)
    if not match:
        raise InvalidLabelSyntax(f"Unrecognised module label: {text!r}")
    tag, body = match.groups()
    if tag == "F":
        try:
            return labels.Typical(parse_complex(body))
        except ValueError as error:
            raise InvalidLabelSyntax(str(error)) from error
    if tag in ("I", "I+", "I-"):
        r, s, n = _integers(body, 3, text)
        family = {"I": labels.AtypicalI, "I+": labels.AtypicalIPlus, "I-": labels.AtypicalIMinus}[tag]
        return family(r, s, n)
    r, s = _integers(body, 2, text)
    if tag == "L":
        return labels.Virasoro.of(r, s)
    if tag == "K":
        return labels.Kernel(r, s)
    return labels.singlet_1p(r, s)


def format_label(label: interfaces.ModuleLabel) -> LabelText:
    if isinstance(label, labels.Typical):
        weight = complex(label.weight)
        if weight.imag:
            return f"F:{_round(weight.real)!r},{_round(weight.imag)!r}"
        return f"F:{_round(weight.real)!r}"
    if isinstance(label, labels.Virasoro):
        return f"L:{label.kac.r},{label.kac.s}"
    if isinstance(label, labels.Kernel):
        return f"K:{label.r},{label.s}"
    tag = {labels.AtypicalI: "I", labels.AtypicalIPlus: "I+", labels.AtypicalIMinus: "I-"}[type(label)]
    return f"{tag}:{label.r},{label.s},{label.n}"


class LabelDTO(BaseModel):
    text: LabelText

    @classmethod
    def to_domain(cls, instance: "LabelDTO") -> interfaces.ModuleLabel:
        return parse_label(instance.text)

    @classmethod
    def from_domain(cls, instance: interfaces.ModuleLabel) -> "LabelDTO":
        return cls(text=format_label(instance))


# ---- Results ----
class SeriesValueDTO(BaseModel):
    value: ComplexDTO
    terms_used: int
    tail_bound: float

    @classmethod
    def from_domain(cls, instance: value.SeriesValue) -> "SeriesValueDTO":
        return cls(
            value=ComplexDTO.from_domain(instance.value),
            terms_used=instance.terms_used,
            tail_bound=_round(instance.tail_bound),
        )


class ResidualReportDTO(BaseModel):
    lhs: List[ComplexDTO]
    rhs: List[ComplexDTO]
    abs_residual: float
    rel_residual: float

    @classmethod
    def from_domain(cls, instance: value.ResidualReport) -> "ResidualReportDTO":
        def as_list(side):
            return list(side) if isinstance(side, (list, tuple)) else [side]

        return cls(
            lhs=[ComplexDTO.from_domain(x) for x in as_list(instance.lhs)],
            rhs=[ComplexDTO.from_domain(x) for x in as_list(instance.rhs)],
            abs_residual=_round(instance.abs_residual),
            rel_residual=_round(instance.rel_residual),
        )


class RegimeDTO(BaseModel):
    name: str
    k: Optional[int] = None
    m: Optional[int] = None

    @classmethod
    def from_domain(cls, instance: interfaces.Regime) -> "RegimeDTO":
        if isinstance(instance, qdim.Discrete):
            return cls(name=instance.name(), k=instance.k, m=instance.m)
        return cls(name=instance.name())

    def tag(self) -> str:
        return self.name if self.k is None else f"{self.name}({self.k},{self.m})"


class AtypicalTermDTO(BaseModel):
    r: int
    s: int
    n: int
    coefficient: int


class TypicalTermDTO(BaseModel):
    base: ComplexDTO
    shift: str
    coefficient: int


class FusionElementDTO(BaseModel):
    atypical: List[AtypicalTermDTO] = Field(default_factory=list)
    typical: List[TypicalTermDTO] = Field(default_factory=list)

    @classmethod
    def from_domain(cls, instance: fusion.FusionElement) -> "FusionElementDTO":
        atypical = [
            AtypicalTermDTO(r=r, s=s, n=n, coefficient=c)
            for (r, s, n), c in sorted(instance.atypical_part.items())
        ]
        typical = [
            TypicalTermDTO(base=ComplexDTO.from_domain(w.base), shift=str(w.shift), coefficient=c)
            for w, c in sorted(
                instance.typical_part.items(),
                key=lambda item: (item[0].base.real, item[0].base.imag, item[0].shift),
            )
        ]
        return cls(atypical=atypical, typical=typical)


class ScanRowDTO(BaseModel):
    re_eps: float
    im_eps: float
    re_q: Optional[float]
    im_q: Optional[float]
    regime: str

    @classmethod
    def from_domain(cls, instance: qdim.ScanRow) -> "ScanRowDTO":
        result = instance.value
        return cls(
            re_eps=_round(instance.eps.real),
            im_eps=_round(instance.eps.imag),
            re_q=None if result is None else _round(result.real),
            im_q=None if result is None else _round(result.imag),
            regime=RegimeDTO.from_domain(instance.regime).tag(),
        )


# ---- Envelope ----
class CommandResultDTO(BaseModel):
    command: str
    params: Optional[ModelParamsDTO] = None
    context: Optional[EvalContextDTO] = None
    result: Any = None
    diagnostics: Dict[str, Any] = Field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True)
