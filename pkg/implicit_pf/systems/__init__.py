"""
Встроенные модельные системы.
"""

from typing import TYPE_CHECKING

import numpy as np

from ..core.enums import ModelKind
from ..core.exceptions import ConfigError
from ..core.model import StateSpaceModel
from ..utils import as_vector
from .gaussian import iid_gaussian_model
from .linear import linear_gaussian_model, random_stable_linear_model
from .plankton import (
    PlanktonParams,
    PlanktonState,
    plankton_drift,
    plankton_model,
    plankton_obs,
    plankton_obs_jacobian,
    plankton_step,
)
from .twin import TwinData, regular_obs_times, synth_twin_data


if TYPE_CHECKING:
    from ..config import ModelConfig


def build_model(cfg: "ModelConfig") -> StateSpaceModel:
    """Строит модель по секции [model] конфигурации."""
    if cfg.kind == ModelKind.PLANKTON:
        return plankton_model(cfg.plankton)
    if cfg.kind == ModelKind.IID_GAUSSIAN:
        return iid_gaussian_model(cfg.dims)
    linear = cfg.linear
    if linear.random_state_dims is not None:
        return random_stable_linear_model(
            linear.random_state_dims, linear.random_obs_dims, seed=linear.random_seed, delta=linear.delta
        )
    return linear_gaussian_model(
        linear.drift_matrix, linear.diffusion, linear.obs_matrix, linear.obs_noise, linear.delta
    )


def initial_state(cfg: "ModelConfig", model: StateSpaceModel) -> np.ndarray:
    """
    Начальное состояние: явный x0, начальные значения NPZD или ноль.

    Raises:
        ConfigError: Если длина x0 не совпадает с размерностью модели
    """
    if cfg.x0 is not None:
        try:
            return as_vector(cfg.x0, model.dim_state, "x0")
        except ValueError as e:
            raise ConfigError(str(e)) from e
    if cfg.kind == ModelKind.PLANKTON:
        return cfg.plankton.initial
    return np.zeros(model.dim_state)


__all__ = [
    "PlanktonParams",
    "PlanktonState",
    "TwinData",
    "build_model",
    "iid_gaussian_model",
    "initial_state",
    "linear_gaussian_model",
    "plankton_drift",
    "plankton_model",
    "plankton_obs",
    "plankton_obs_jacobian",
    "plankton_step",
    "random_stable_linear_model",
    "regular_obs_times",
    "synth_twin_data",
]
