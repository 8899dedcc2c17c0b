"""
Модуль с исключениями, которые могут возникать при работе фильтра.
"""

from typing import Optional


class ImplicitFilterError(Exception):
    """Базовый класс для всех исключений пакета implicit_pf."""

    pass


class ConfigError(ImplicitFilterError):
    """Ошибка конфигурации запуска (файл не читается или не проходит валидацию)."""

    pass


class ModelError(ImplicitFilterError):
    """Ошибка в описании модели пространства состояний."""

    pass


class UnsupportedModelError(ModelError):
    """Операция не поддерживается для данной модели (например, Калман для нелинейной модели)."""

    pass


class NumericalError(ImplicitFilterError):
    """Базовый класс для численных сбоев."""

    pass


class PropagationDivergedError(NumericalError):
    """Шаг разностной схемы дал нечисловой результат."""

    def __init__(self, time: int, state=None):
        self.time = time
        self.state = state
        super().__init__(f"Шаг схемы разошелся на шаге {time}: получено нечисловое состояние")


class SingularCovarianceError(NumericalError):
    """Ковариация псевдо-гауссиана не положительно определена."""

    def __init__(self, message: str, min_pivot: Optional[float] = None):
        self.min_pivot = min_pivot
        super().__init__(message)


class SingularJacobianError(NumericalError):
    """Численный якобиан отображения xi -> X вырожден."""

    pass


class DegenerateEnsembleError(NumericalError):
    """Все логарифмы весов равны -inf."""

    pass


class NonConvergenceError(NumericalError):
    """
    Итерация неявного шага не сошлась за max_iters.

    Attributes:
        residual: Последняя невязка ||X_{j+1} - X_j||_inf
        iters: Число выполненных итераций
        step: Номер шага фильтра (добавляется драйвером)
        particle: Индекс частицы (добавляется драйвером)
    """

    def __init__(
        self,
        residual: float,
        iters: int,
        step: Optional[int] = None,
        particle: Optional[int] = None,
    ):
        self.residual = residual
        self.iters = iters
        self.step = step
        self.particle = particle
        message = f"Итерация не сошлась за {iters} итераций, невязка {residual:.3e}"
        if step is not None:
            message += f" (шаг {step}, частица {particle})"
        super().__init__(message)

    def with_context(self, step: int, particle: int) -> "NonConvergenceError":
        """Возвращает копию ошибки с номером шага и частицы."""
        return NonConvergenceError(self.residual, self.iters, step=step, particle=particle)
