import dataclasses

import mpmath

from singlet.domain import interfaces, value


# ---- Related errors ----
class InvalidModuleLabel(ValueError):
    pass


# ---- Module labels ----
@dataclasses.dataclass(frozen=True)
class Typical(interfaces.ModuleLabel):
    """Fock module F_lambda; `weight` is lambda itself, not lambda - alpha_0/2."""

    weight: mpmath.mpc

    def __init__(self, weight: value.Number):
        object.__setattr__(self, "weight", mpmath.mpc(weight))

    def validate(self, params: value.ModelParams) -> None:
        pass


@dataclasses.dataclass(frozen=True)
class AtypicalI(interfaces.ModuleLabel):
    r: int
    s: int
    n: int

    def validate(self, params: value.ModelParams) -> None:
        if not (1 <= self.r <= params.p_plus and 1 <= self.s <= params.p_minus):
            raise InvalidModuleLabel(
                f"I({self.r},{self.s};{self.n}) needs 1 <= r <= {params.p_plus} and "
                f"1 <= s <= {params.p_minus}"
            )


@dataclasses.dataclass(frozen=True)
class AtypicalIPlus(interfaces.ModuleLabel):
    r: int
    s: int
    n: int

    def validate(self, params: value.ModelParams) -> None:
        if not (1 <= self.r < params.p_plus and 1 <= self.s <= params.p_minus):
            raise InvalidModuleLabel(
                f"I+({self.r},{self.s};{self.n}) needs 1 <= r < {params.p_plus} and "
                f"1 <= s <= {params.p_minus}"
            )


@dataclasses.dataclass(frozen=True)
class AtypicalIMinus(interfaces.ModuleLabel):
    r: int
    s: int
    n: int

    def validate(self, params: value.ModelParams) -> None:
        if not (1 <= self.r <= params.p_plus and 1 <= self.s < params.p_minus):
            raise InvalidModuleLabel(
                f"I-({self.r},{self.s};{self.n}) needs 1 <= r <= {params.p_plus} and "
                f"1 <= s < {params.p_minus}"
            )


@dataclasses.dataclass(frozen=True)
class Virasoro(interfaces.ModuleLabel):
    kac: value.KacLabel

    def validate(self, params: value.ModelParams) -> None:
        try:
            self.kac.validate(params)
        except value.InvalidKacLabel as error:
            raise InvalidModuleLabel(str(error)) from error

    @classmethod
    def of(cls, r: int, s: int) -> "Virasoro":
        return cls(value.KacLabel(r, s))


@dataclasses.dataclass(frozen=True)
class Kernel(interfaces.ModuleLabel):
    """The n = 0 kernel module K(r,s;0)."""

    r: int
    s: int

    def validate(self, params: value.ModelParams) -> None:
        if not (1 <= self.r < params.p_plus and 1 <= self.s < params.p_minus):
            raise InvalidModuleLabel(
                f"K({self.r},{self.s}) needs 1 <= r < {params.p_plus} and 1 <= s < {params.p_minus}"
            )


def singlet_1p(r: int, s: int) -> AtypicalI:
    """M(r,s) of the (1,p) family, which is I(1,s;r-1)."""
    return AtypicalI(1, s, r - 1)


ATYPICAL_LABELS = (AtypicalI, AtypicalIPlus, AtypicalIMinus)
