"""
Модель пространства состояний и базовые операции над ней.

Дискретная схема:
    X^{n+1} = X^n + F(X^n, t^n) * delta + sqrt(delta) * G(X^n, t^n) * V,   V ~ N(0, I)
Наблюдение:
    b^n = h(X^n) + Q * W,   W ~ N(0, I)

G и Q диагональны и хранятся как векторы диагоналей.
"""

import copy
import logging
import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, Deque, List, Optional, Sequence, Tuple

import numpy as np

from ..utils import as_vector, central_difference_jacobian, relative_error
from .exceptions import ModelError, PropagationDivergedError


logger = logging.getLogger(__name__)

StateFn = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class LinearDynamics:
    """
    Линейная часть модели для фильтра Калмана.

    Attributes:
        drift_matrix: Матрица A, F(x) = A x
        obs_matrix: Матрица H, h(x) = H x
    """

    drift_matrix: np.ndarray
    obs_matrix: np.ndarray


@dataclass(frozen=True)
class StateSpaceModel:
    """
    Модель пространства состояний.

    Attributes:
        name: Имя модели
        dim_state: Размерность состояния m
        dim_obs: Размерность наблюдения k (k <= m)
        delta: Шаг по времени
        drift_fn: F(x, t) в физическом времени (без множителя delta)
        diffusion_fn: Диагональ G(x, t) (без множителя sqrt(delta))
        obs_fn: h(x)
        obs_jacobian_fn: H(x), матрица k x m
        obs_noise: Диагональ Q
        linear_obs: Якобиан h не зависит от состояния
        constant_drift: F и G не зависят от состояния
        linear: Линейная часть модели (для Калмана), если модель линейна
        constrain_fn: Проекция состояния на допустимую область (по умолчанию тождественна)
        component_names: Имена компонент состояния для отчетов
    """

    name: str
    dim_state: int
    dim_obs: int
    delta: float
    drift_fn: StateFn
    diffusion_fn: StateFn
    obs_fn: Callable[[np.ndarray], np.ndarray]
    obs_jacobian_fn: Callable[[np.ndarray], np.ndarray]
    obs_noise: np.ndarray
    linear_obs: bool = False
    constant_drift: bool = False
    linear: Optional[LinearDynamics] = None
    constrain_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    component_names: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.dim_state < 1:
            raise ModelError(f"dim_state должно быть положительным, получено {self.dim_state}")
        if not 1 <= self.dim_obs <= self.dim_state:
            raise ModelError(f"dim_obs должно быть в [1, {self.dim_state}], получено {self.dim_obs}")
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise ModelError(f"delta должно быть положительным, получено {self.delta}")
        noise = as_vector(self.obs_noise, self.dim_obs, "obs_noise")
        if np.any(noise <= 0) or not np.all(np.isfinite(noise)):
            raise ModelError("Диагональ Q должна быть строго положительной")
        object.__setattr__(self, "obs_noise", noise)
        if not self.component_names:
            object.__setattr__(self, "component_names", tuple(f"x{i}" for i in range(self.dim_state)))
        elif len(self.component_names) != self.dim_state:
            raise ModelError("Число имен компонент не совпадает с dim_state")

    def physical_time(self, time: int) -> float:
        """Физическое время для целого индекса шага."""
        return time * self.delta

    def drift(self, state: np.ndarray, time: int) -> np.ndarray:
        """Приращение сноса F(x, t) * delta."""
        return np.asarray(self.drift_fn(state, self.physical_time(time)), dtype=float) * self.delta

    def diffusion(self, state: np.ndarray, time: int) -> np.ndarray:
        """Диагональ sqrt(delta) * G(x, t)."""
        return np.asarray(self.diffusion_fn(state, self.physical_time(time)), dtype=float) * math.sqrt(self.delta)

    def prior_cov_diag(self, state: np.ndarray, time: int) -> np.ndarray:
        """Диагональ G_n^T G_n = delta * G^2."""
        return self.diffusion(state, time) ** 2

    def obs_map(self, state: np.ndarray) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.obs_fn(state), dtype=float))

    def obs_jacobian(self, state: np.ndarray) -> np.ndarray:
        return np.atleast_2d(np.asarray(self.obs_jacobian_fn(state), dtype=float)).reshape(
            self.dim_obs, self.dim_state
        )

    @property
    def obs_cov_diag(self) -> np.ndarray:
        """Диагональ Q^T Q."""
        return self.obs_noise**2

    def constrain(self, state: np.ndarray) -> np.ndarray:
        if self.constrain_fn is None:
            return state
        return np.asarray(self.constrain_fn(state), dtype=float)

    def with_delta(self, delta: float) -> "StateSpaceModel":
        """
        Копия модели с другим шагом по времени.

        Используется для дробления шага при расходимости итерации.
        """
        logger.debug(f"Модель {self.name}: смена шага {self.delta} -> {delta}")
        return replace(self, delta=delta)


@dataclass
class ObservationRecord:
    """
    Наблюдение в момент time_index.

    Attributes:
        time_index: Индекс шага
        value: Вектор b^n (None, если наблюдения нет)
        present: Есть ли наблюдение
    """

    time_index: int
    value: Optional[np.ndarray] = None
    present: bool = False

    def __post_init__(self):
        if self.present:
            if self.value is None:
                raise ModelError(f"Наблюдение на шаге {self.time_index} помечено присутствующим, но пусто")
            self.value = as_vector(self.value, name="observation")
            if not np.all(np.isfinite(self.value)):
                raise ModelError(f"Наблюдение на шаге {self.time_index} содержит нечисловые значения")

    @classmethod
    def absent(cls, time_index: int) -> "ObservationRecord":
        return cls(time_index=time_index)


@dataclass
class Particle:
    """
    Частица ансамбля.

    Attributes:
        state: Текущее состояние X^n
        log_weight: Накопленный -Phi + log|J| с последнего ресэмплинга
        history: Ограниченная история состояний (последний элемент - текущее состояние)
        ancestor: Индекс предка при последнем ресэмплинге
    """

    state: np.ndarray
    log_weight: float = 0.0
    history: Deque[np.ndarray] = field(default_factory=deque)
    ancestor: int = 0

    @classmethod
    def create(cls, state: np.ndarray, index: int, history_len: int = 3) -> "Particle":
        state = np.asarray(state, dtype=float)
        return cls(state=state, history=deque([state], maxlen=history_len), ancestor=index)

    def advance(self, new_state: np.ndarray, log_weight_increment: float = 0.0) -> None:
        """Добавляет новое состояние в историю и накапливает вес."""
        self.state = np.asarray(new_state, dtype=float)
        self.history.append(self.state)
        self.log_weight += log_weight_increment

    def past(self, lag: int) -> np.ndarray:
        """Состояние lag шагов назад (lag=0 - текущее)."""
        return self.history[-1 - lag]

    def replace_past(self, lag: int, new_state: np.ndarray) -> None:
        """Заменяет прошлое состояние после обратного шага."""
        self.history[-1 - lag] = np.asarray(new_state, dtype=float)
        if lag == 0:
            self.state = self.history[-1]

    def clone(self) -> "Particle":
        """Глубокая копия (история копируется целиком)."""
        return copy.deepcopy(self)


@dataclass
class Ensemble:
    """
    Ансамбль из M частиц, аппроксимирующий P_n.

    Attributes:
        particles: Частицы
        time_index: Номер шага n
        rng_seed: Мастер-сид прогона
    """

    particles: List[Particle]
    time_index: int = 0
    rng_seed: int = 0

    def __post_init__(self):
        if not self.particles:
            raise ModelError("Ансамбль должен содержать хотя бы одну частицу")
        dims = {p.state.shape[0] for p in self.particles}
        if len(dims) != 1:
            raise ModelError(f"Частицы имеют разные размерности: {sorted(dims)}")

    @classmethod
    def from_states(
        cls,
        states: Sequence[np.ndarray],
        time_index: int = 0,
        rng_seed: int = 0,
        history_len: int = 3,
    ) -> "Ensemble":
        particles = [Particle.create(s, i, history_len) for i, s in enumerate(states)]
        return cls(particles=particles, time_index=time_index, rng_seed=rng_seed)

    @property
    def size(self) -> int:
        return len(self.particles)

    @property
    def states(self) -> np.ndarray:
        return np.stack([p.state for p in self.particles])

    @property
    def log_weights(self) -> np.ndarray:
        return np.array([p.log_weight for p in self.particles])


def propagate(model: StateSpaceModel, state: np.ndarray, time: int, noise: np.ndarray) -> np.ndarray:
    """
    Шаг разностной схемы: state + F(state, t) delta + sqrt(delta) G(state, t) noise.

    Args:
        model: Модель
        state: Текущее состояние
        time: Индекс шага
        noise: Вектор стандартных нормальных величин длины dim_state

    Returns:
        np.ndarray: Новое состояние

    Raises:
        PropagationDivergedError: Если результат не конечен
    """
    state = as_vector(state, model.dim_state, "state")
    noise = as_vector(noise, model.dim_state, "noise")
    new_state = state + model.drift(state, time) + model.diffusion(state, time) * noise
    if not np.all(np.isfinite(new_state)):
        raise PropagationDivergedError(time, new_state)
    return new_state


def observe_likelihood_log(model: StateSpaceModel, state: np.ndarray, b: np.ndarray) -> float:
    """
    Логарифм правдоподобия наблюдения без нормировки:
    -(h(x) - b)^T (Q^T Q)^{-1} (h(x) - b) / 2.
    """
    residual = model.obs_map(state) - as_vector(b, model.dim_obs, "b")
    return float(-0.5 * np.sum(residual**2 / model.obs_cov_diag))


def check_obs_jacobian(
    model: StateSpaceModel,
    states: Sequence[np.ndarray],
    step: float = 1e-6,
) -> float:
    """
    Сравнивает obs_jacobian с центральными разностями obs_map.

    Returns:
        float: Максимальная относительная ошибка по всем состояниям
    """
    worst = 0.0
    for state in states:
        numeric = central_difference_jacobian(model.obs_map, np.asarray(state, dtype=float), step)
        worst = max(worst, relative_error(model.obs_jacobian(state), numeric))
    return worst
