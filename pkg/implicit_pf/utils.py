"""
Утилиты для численных операций пакета implicit_pf.
"""

import logging
from typing import Callable, Optional

import numpy as np


logger = logging.getLogger(__name__)


def as_vector(value, dim: Optional[int] = None, name: str = "vector") -> np.ndarray:
    """
    Приводит значение к одномерному массиву float64.

    Args:
        value: Скаляр, список или массив
        dim: Ожидаемая длина (None - не проверять)
        name: Имя аргумента для сообщения об ошибке

    Returns:
        np.ndarray: Одномерный массив

    Raises:
        ValueError: Если длина не совпадает с ожидаемой
    """
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"{name}: ожидалась длина {dim}, получено {arr.shape[0]}")
    return arr


def sup_norm(x: np.ndarray) -> float:
    """Норма ||x||_inf (0 для пустого массива)."""
    if x.size == 0:
        return 0.0
    return float(np.max(np.abs(x)))


def central_difference_jacobian(
    fn: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    step: float = 1e-6,
) -> np.ndarray:
    """
    Якобиан функции fn в точке x по центральным разностям.

    Шаг по каждой координате масштабируется как step * max(1, |x_i|).

    Args:
        fn: Функция R^m -> R^k
        x: Точка
        step: Относительный шаг

    Returns:
        np.ndarray: Матрица k x m
    """
    x = np.asarray(x, dtype=float)
    f0 = np.atleast_1d(fn(x))
    jac = np.empty((f0.shape[0], x.shape[0]))
    for i in range(x.shape[0]):
        h = step * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        jac[:, i] = (np.atleast_1d(fn(xp)) - np.atleast_1d(fn(xm))) / (2.0 * h)
    return jac


def relative_error(actual: np.ndarray, expected: np.ndarray) -> float:
    """Относительная ошибка ||a - e||_inf / max(1e-300, ||e||_inf)."""
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    scale = max(sup_norm(expected), 1e-300)
    return sup_norm(actual - expected) / scale
