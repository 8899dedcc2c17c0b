"""
Модель с независимыми гауссовыми компонентами: X^n = V^n, b^n = X^n + W^n.
"""

import numpy as np

from ..core.exceptions import ModelError
from ..core.model import LinearDynamics, StateSpaceModel


def iid_gaussian_model(d: int) -> StateSpaceModel:
    """
    Модель размерности d с независимыми шагами.

    Снос F(x) = -x при delta = 1 обнуляет вклад X^n, так что априорное среднее
    каждого шага равно нулю, G = I, h = id, Q = I.

    Raises:
        ModelError: Если d < 1
    """
    if d < 1:
        raise ModelError(f"Размерность должна быть положительной, получено {d}")
    identity = np.eye(d)
    return StateSpaceModel(
        name=f"iid_gaussian_{d}",
        dim_state=d,
        dim_obs=d,
        delta=1.0,
        drift_fn=lambda x, t: -x,
        diffusion_fn=lambda x, t: np.ones(d),
        obs_fn=lambda x: x,
        obs_jacobian_fn=lambda x: identity,
        obs_noise=np.ones(d),
        linear_obs=True,
        linear=LinearDynamics(drift_matrix=-identity, obs_matrix=identity),
    )
