"""
Перечисления, используемые фильтрами и конфигурацией.
"""

from enum import Enum


class JacobianMode(str, Enum):
    """Способ вычисления log|det dX/dxi|."""

    FINITE_DIFFERENCE = "finite_difference"
    """Повтор итерации для соседних xi и разностная аппроксимация."""

    LINEARIZED = "linearized"
    """log det L сошедшегося псевдо-гауссиана (точно для линейной h)."""


class FilterKind(str, Enum):
    """Типы фильтров, доступные драйверу."""

    IMPLICIT = "implicit"
    IMPLICIT_BACKWARD = "implicit_backward"
    SIR = "sir"

    @property
    def is_implicit(self) -> bool:
        return self in (FilterKind.IMPLICIT, FilterKind.IMPLICIT_BACKWARD)


class ResampleMode(str, Enum):
    """Правило запуска ресэмплинга."""

    EVERY_STEP = "every_step"
    WEIGHT_RATIO = "weight_ratio"


class StepKind(str, Enum):
    """Вид неявного шага, породившего StepResult."""

    FORWARD = "forward"
    BACKWARD = "backward"
    SPARSE = "sparse"
    PRIOR = "prior"


class StreamRole(int, Enum):
    """
    Роль подпотока случайных чисел.

    Значение входит в ключ SeedSequence, поэтому менять числа нельзя:
    это сломает воспроизводимость сохраненных прогонов.
    """

    XI = 1
    XI_PAIR = 2
    RESAMPLE = 3
    INIT = 4
    SIR = 5
    BACKWARD = 6
    TRUTH = 7
    OBSERVATION = 8
    RETRY = 9


class ModelKind(str, Enum):
    """Встроенные системы, доступные из конфигурации."""

    PLANKTON = "plankton"
    IID_GAUSSIAN = "iid_gaussian"
    LINEAR = "linear"
