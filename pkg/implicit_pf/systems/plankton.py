"""
Модель планктона NPZD (фитопланктон, зоопланктон, питательные вещества, детрит).

Состояние - пятимерный вектор (P, Z, N, D, dgamma), где dgamma - возмущение темпа
роста gamma = 0.14 + 3 dgamma, подчиненное AR(1) процессу dgamma_t = 0.9 dgamma_{t-1} + шум.
Наблюдается log P с шумом sigma_obs. После каждого шага P, Z, N, D не опускаются ниже
1% начальных значений.
"""

import logging
import math
from dataclasses import dataclass
from functools import partial
from typing import Any, Dict, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..core.exceptions import PropagationDivergedError
from ..core.model import StateSpaceModel, propagate


logger = logging.getLogger(__name__)

COMPONENTS = ("P", "Z", "N", "D", "dgamma")

# Индексы компонент вектора состояния
P, Z, N, D, DGAMMA = range(5)


class PlanktonParams(BaseModel):
    """
    Параметры модели NPZD.

    Стандартные отклонения шума по умолчанию равны 1% начальных значений.

    Attributes:
        p0, z0, n0, d0: Начальные концентрации
        sigma_p, sigma_z, sigma_n, sigma_d: Дневные стандартные отклонения шума концентраций
        sigma_gamma: Стандартное отклонение шума dgamma
        sigma_obs: Стандартное отклонение шума наблюдения log P
        dt: Шаг схемы Эйлера в сутках
        floor_fraction: Доля начального значения, ниже которой концентрации не опускаются
        gamma_base, gamma_scale, gamma_ar: gamma = gamma_base + gamma_scale * dgamma,
            dgamma_t = gamma_ar * dgamma_{t-1}
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    p0: float = Field(0.125, gt=0)
    z0: float = Field(0.00708, gt=0)
    n0: float = Field(0.764, gt=0)
    d0: float = Field(0.136, gt=0)
    sigma_p: float = Field(0.00125, gt=0)
    sigma_z: float = Field(0.0000708, gt=0)
    sigma_n: float = Field(0.00764, gt=0)
    sigma_d: float = Field(0.00136, gt=0)
    sigma_gamma: float = Field(0.01, gt=0)
    sigma_obs: float = Field(0.3, gt=0)
    dt: float = Field(1.0, gt=0)
    floor_fraction: float = Field(0.01, gt=0, lt=1)
    gamma_base: float = 0.14
    gamma_scale: float = 3.0
    gamma_ar: float = Field(0.9, gt=0, le=1)

    @model_validator(mode="before")
    @classmethod
    def _default_noise(cls, data: Any) -> Any:
        # Незаданные sigma берутся как 1% от (возможно измененных) начальных значений
        if not isinstance(data, dict):
            return data
        data = dict(data)
        for name in ("p", "z", "n", "d"):
            initial = data.get(f"{name}0", cls.model_fields[f"{name}0"].default)
            data.setdefault(f"sigma_{name}", 0.01 * initial)
        return data

    @property
    def initial(self) -> np.ndarray:
        """Начальное состояние (dgamma = 0)."""
        return np.array([self.p0, self.z0, self.n0, self.d0, 0.0])

    @property
    def floors(self) -> np.ndarray:
        """Нижние границы P, Z, N, D."""
        return self.floor_fraction * self.initial[:DGAMMA]

    @property
    def noise(self) -> np.ndarray:
        """Дневные стандартные отклонения шума всех пяти компонент."""
        return np.array([self.sigma_p, self.sigma_z, self.sigma_n, self.sigma_d, self.sigma_gamma])

    def with_system_noise(self, sigma_p: float) -> "PlanktonParams":
        """Копия параметров с другим sigma_p (режимы экспериментов с разной дисперсией системы)."""
        return self.model_copy(update={"sigma_p": sigma_p})


DEFAULT_PARAMS = PlanktonParams()


@dataclass(frozen=True)
class PlanktonState:
    """Состояние NPZD с возмущением темпа роста."""

    P: float
    Z: float
    N: float
    D: float
    dgamma: float = 0.0

    @classmethod
    def from_vector(cls, x: np.ndarray) -> "PlanktonState":
        return cls(*(float(v) for v in np.asarray(x, dtype=float)))

    def to_vector(self) -> np.ndarray:
        return np.array([self.P, self.Z, self.N, self.D, self.dgamma])

    def gamma(self, params: PlanktonParams = DEFAULT_PARAMS) -> float:
        return params.gamma_base + params.gamma_scale * self.dgamma

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(COMPONENTS, self.to_vector()))


StateLike = Union[PlanktonState, np.ndarray]


def _vector(state: StateLike) -> np.ndarray:
    if isinstance(state, PlanktonState):
        return state.to_vector()
    return np.asarray(state, dtype=float)


def clamp(state: StateLike, params: PlanktonParams = DEFAULT_PARAMS) -> np.ndarray:
    """Поднимает P, Z, N, D до их нижних границ; dgamma не ограничивается."""
    x = _vector(state).copy()
    x[:DGAMMA] = np.maximum(x[:DGAMMA], params.floors)
    return x


def plankton_drift(state: StateLike, params: PlanktonParams = DEFAULT_PARAMS) -> np.ndarray:
    """
    Правая часть системы NPZD в сутки.

    Вычисляется на состоянии, поднятом до нижних границ, так что знаменатели
    0.2 + N и 0.1 + P отделены от нуля и для промежуточных приближений итерации.

    Returns:
        np.ndarray: (dP, dZ, dN, dD, d dgamma)
    """
    x = clamp(state, params)
    p, z, n, d, dgamma = x
    gamma = params.gamma_base + params.gamma_scale * dgamma
    uptake = n / (0.2 + n) * gamma * p
    grazing = p / (0.1 + p) * z
    return np.array(
        [
            uptake - 0.1 * p - 0.6 * grazing,
            0.18 * grazing - 0.1 * z,
            0.1 * d + 0.24 * grazing - uptake + 0.05 * z,
            -0.1 * d + 0.1 * p + 0.18 * grazing + 0.05 * z,
            -(1.0 - params.gamma_ar) * dgamma,
        ]
    )


def plankton_obs(state: StateLike, params: PlanktonParams = DEFAULT_PARAMS) -> float:
    """
    h = log P.

    Ниже границы P_floor логарифм продолжен касательной
    h = log P_floor + (P - P_floor) / P_floor: h непрерывно дифференцируема и возрастает
    на всей прямой, промежуточные приближения итерации с P <= 0 допустимы.
    """
    p = _vector(state)[P]
    floor = params.floors[P]
    if p >= floor:
        return math.log(p)
    return math.log(floor) + (p - floor) / floor


def plankton_obs_jacobian(state: StateLike, params: PlanktonParams = DEFAULT_PARAMS) -> np.ndarray:
    """H = (1 / max(P, P_floor), 0, 0, 0, 0)."""
    p = _vector(state)[P]
    jac = np.zeros((1, 5))
    jac[0, P] = 1.0 / max(p, params.floors[P])
    return jac


def _drift_fn(params: PlanktonParams, x: np.ndarray, t: float) -> np.ndarray:
    return plankton_drift(x, params)


def _diffusion_fn(params: PlanktonParams, x: np.ndarray, t: float) -> np.ndarray:
    # G в единицах за sqrt(сутки): за шаг dt дисперсия sigma^2 dt
    return params.noise


def _obs_fn(params: PlanktonParams, x: np.ndarray) -> np.ndarray:
    return np.array([plankton_obs(x, params)])


def plankton_model(params: PlanktonParams = DEFAULT_PARAMS) -> StateSpaceModel:
    """Модель NPZD как StateSpaceModel (m = 5, k = 1, delta = dt)."""
    logger.debug(f"Модель NPZD: sigma_p={params.sigma_p}, sigma_obs={params.sigma_obs}")
    return StateSpaceModel(
        name="plankton",
        dim_state=5,
        dim_obs=1,
        delta=params.dt,
        drift_fn=partial(_drift_fn, params),
        diffusion_fn=partial(_diffusion_fn, params),
        obs_fn=partial(_obs_fn, params),
        obs_jacobian_fn=partial(plankton_obs_jacobian, params=params),
        obs_noise=np.array([params.sigma_obs]),
        constrain_fn=partial(clamp, params=params),
        component_names=COMPONENTS,
    )


def plankton_step(
    state: StateLike,
    params: PlanktonParams = DEFAULT_PARAMS,
    noise: Optional[np.ndarray] = None,
    time: int = 0,
) -> PlanktonState:
    """
    Шаг Эйлера с аддитивным шумом и ограничением снизу.

    Raises:
        PropagationDivergedError: Если результат не конечен
    """
    model = plankton_model(params)
    if noise is None:
        noise = np.zeros(5)
    new_state = model.constrain(propagate(model, _vector(state), time, noise))
    if not np.all(np.isfinite(new_state)):
        raise PropagationDivergedError(time, new_state)
    return PlanktonState.from_vector(new_state)
