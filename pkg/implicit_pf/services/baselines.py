"""
Эталонные фильтры: SIR (бутстрап-фильтр) и фильтр Калмана для линейно-гауссовых моделей.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from ..core.exceptions import SingularCovarianceError, UnsupportedModelError
from ..core.model import Particle, StateSpaceModel, observe_likelihood_log, propagate
from ..utils import as_vector
from .resampling import normalize_log_weights


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KalmanState:
    """
    Гауссово состояние фильтра Калмана.

    Attributes:
        mean: Среднее
        cov: Ковариация (симметричная неотрицательно определенная; нулевая - точечная масса)
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if not np.allclose(cov, cov.T, rtol=1e-10, atol=1e-12):
            raise SingularCovarianceError("Ковариация фильтра Калмана не симметрична")
        min_eig = float(linalg.eigvalsh(cov)[0]) if cov.size else 0.0
        if min_eig < -1e-12 * max(1.0, float(np.max(np.abs(cov)))):
            raise SingularCovarianceError(
                f"Ковариация фильтра Калмана не является неотрицательно определенной (min eig = {min_eig:.3e})",
                min_pivot=min_eig,
            )
        object.__setattr__(self, "mean", as_vector(self.mean, cov.shape[0], "mean"))
        object.__setattr__(self, "cov", cov)

    @classmethod
    def point(cls, mean: np.ndarray) -> "KalmanState":
        """Точечная масса в mean: нулевая ковариация."""
        mean = as_vector(mean)
        return cls(mean=mean, cov=np.zeros((mean.shape[0], mean.shape[0])))


def sir_step(
    model: StateSpaceModel,
    particle: Union[Particle, np.ndarray],
    b_next: Optional[np.ndarray],
    noise: Optional[np.ndarray] = None,
    rng: Optional[np.random.Generator] = None,
    time: int = 0,
) -> Tuple[np.ndarray, float]:
    """
    Шаг SIR: выборка из динамики и вес по правдоподобию наблюдения.

    Args:
        model: Модель
        particle: Частица или ее состояние
        b_next: Наблюдение (None - вес не меняется)
        noise: Стандартный нормальный шум; если не задан, берется из rng
        rng: Генератор для шума
        time: Индекс шага

    Returns:
        Tuple: (новое состояние, приращение логарифма веса)
    """
    state = particle.state if isinstance(particle, Particle) else np.asarray(particle, dtype=float)
    if noise is None:
        if rng is None:
            raise ValueError("Нужно задать noise или rng")
        noise = rng.standard_normal(model.dim_state)
    new_state = propagate(model, state, time, noise)
    if b_next is None:
        return new_state, 0.0
    return new_state, observe_likelihood_log(model, new_state, b_next)


def kalman_step(
    model: StateSpaceModel,
    ks: KalmanState,
    b_next: Optional[np.ndarray],
    time: int = 0,
) -> KalmanState:
    """
    Прогноз и коррекция фильтра Калмана.

    Прогноз: mean <- mean + A mean delta, cov <- (I + A delta) cov (I + A delta)^T + delta G G^T.
    Коррекция с коэффициентом K = cov H^T (H cov H^T + Q^T Q)^{-1} в форме Джозефа.

    Raises:
        UnsupportedModelError: Если модель не линейна
    """
    if model.linear is None or not model.linear_obs:
        raise UnsupportedModelError(f"Фильтр Калмана требует линейную модель, получена {model.name}")
    transition = np.eye(model.dim_state) + model.linear.drift_matrix * model.delta
    mean = transition @ ks.mean
    cov = transition @ ks.cov @ transition.T + np.diag(model.prior_cov_diag(ks.mean, time))
    cov = 0.5 * (cov + cov.T)
    if b_next is None:
        return KalmanState(mean=mean, cov=cov)

    H = model.linear.obs_matrix
    R = np.diag(model.obs_cov_diag)
    innovation_cov = H @ cov @ H.T + R
    try:
        gain = linalg.solve(innovation_cov, H @ cov, assume_a="pos").T
    except linalg.LinAlgError as e:
        raise SingularCovarianceError("Ковариация невязки фильтра Калмана вырождена") from e
    b = as_vector(b_next, model.dim_obs, "b_next")
    mean = mean + gain @ (b - H @ mean)
    correction = np.eye(model.dim_state) - gain @ H
    cov = correction @ cov @ correction.T + gain @ R @ gain.T
    return KalmanState(mean=mean, cov=0.5 * (cov + cov.T))


def max_normalized_weight(log_weights: Sequence[float]) -> float:
    """Максимальный нормированный вес ансамбля."""
    return float(np.max(normalize_log_weights(log_weights)))
