import abc
from typing import TypeAlias

# ---- Model components ----
LabelKind: TypeAlias = str
RegimeName: TypeAlias = str


class ModuleLabel(abc.ABC):
    def kind(self) -> LabelKind:
        return type(self).__name__

    @abc.abstractmethod
    def validate(self, params) -> None:
        raise NotImplementedError()


class Regime(abc.ABC):
    def name(self) -> RegimeName:
        return type(self).__name__
