"""
Линейно-гауссова модель для проверки против фильтра Калмана.
"""

import logging
from typing import Optional, Sequence

import numpy as np

from ..core.exceptions import ModelError
from ..core.model import LinearDynamics, StateSpaceModel


logger = logging.getLogger(__name__)


def linear_gaussian_model(
    drift_matrix: Sequence[Sequence[float]],
    diffusion: Sequence[float],
    obs_matrix: Sequence[Sequence[float]],
    obs_noise: Sequence[float],
    delta: float = 1.0,
    name: str = "linear",
) -> StateSpaceModel:
    """
    Модель F(x) = A x, G = diag(g), h(x) = H x, Q = diag(q).

    Args:
        drift_matrix: Матрица A (m x m)
        diffusion: Диагональ G (m)
        obs_matrix: Матрица H (k x m)
        obs_noise: Диагональ Q (k)
        delta: Шаг по времени

    Raises:
        ModelError: При несогласованных размерностях или неположительной диагонали G
    """
    A = np.atleast_2d(np.asarray(drift_matrix, dtype=float))
    H = np.atleast_2d(np.asarray(obs_matrix, dtype=float))
    g = np.atleast_1d(np.asarray(diffusion, dtype=float))
    m = A.shape[0]
    if A.shape != (m, m) or g.shape != (m,) or H.shape[1] != m:
        raise ModelError(f"Несогласованные размерности: A {A.shape}, G {g.shape}, H {H.shape}")
    if np.any(g <= 0):
        raise ModelError("Диагональ G должна быть строго положительной")
    return StateSpaceModel(
        name=name,
        dim_state=m,
        dim_obs=H.shape[0],
        delta=delta,
        drift_fn=lambda x, t: A @ x,
        diffusion_fn=lambda x, t: g,
        obs_fn=lambda x: H @ x,
        obs_jacobian_fn=lambda x: H,
        obs_noise=np.asarray(obs_noise, dtype=float),
        linear_obs=True,
        constant_drift=not np.any(A),
        linear=LinearDynamics(drift_matrix=A, obs_matrix=H),
    )


def random_stable_linear_model(
    m: int,
    k: Optional[int] = None,
    seed: int = 0,
    delta: float = 1.0,
    radius: float = 0.9,
) -> StateSpaceModel:
    """
    Случайная устойчивая линейная модель: спектральный радиус I + A delta равен radius.

    Args:
        m: Размерность состояния
        k: Размерность наблюдения (по умолчанию m)
        seed: Сид генератора
        radius: Спектральный радиус матрицы перехода (< 1)
    """
    k = m if k is None else k
    rng = np.random.default_rng(seed)
    base = rng.standard_normal((m, m))
    transition = radius * base / np.max(np.abs(np.linalg.eigvals(base)))
    drift_matrix = (transition - np.eye(m)) / delta
    obs_matrix = rng.standard_normal((k, m))
    diffusion = rng.uniform(0.5, 1.5, m)
    obs_noise = rng.uniform(0.5, 1.5, k)
    logger.debug(f"Случайная линейная модель m={m}, k={k}, seed={seed}")
    return linear_gaussian_model(drift_matrix, diffusion, obs_matrix, obs_noise, delta, name=f"linear_random_{m}x{k}")
