"""
Выделение полного квадрата для псевдо-гауссова представления.

Для априорного среднего mu, ковариации P, линеаризованного наблюдения z = H x + шум
с ковариацией R сумма двух квадратичных форм

    (x - mu)^T P^{-1} (x - mu) / 2 + (H x - z)^T R^{-1} (H x - z) / 2

переписывается как

    (x - m)^T Sigma^{-1} (x - m) / 2 + Phi,

где Sigma^{-1} = P^{-1} + H^T R^{-1} H, m = Sigma (P^{-1} mu + H^T R^{-1} z),
K = H P H^T + R, Phi = (z - H mu)^T K^{-1} (z - H mu) / 2.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import linalg

from .exceptions import SingularCovarianceError


logger = logging.getLogger(__name__)

# Порог для квадрата ведущего элемента разложения Холецкого
PIVOT_THRESHOLD = 1e-12


@dataclass(frozen=True)
class PseudoGaussian:
    """
    Результат выделения полного квадрата.

    Attributes:
        sigma_inv: Sigma^{-1}, симметричная положительно определенная m x m
        mean: Центр m
        chol: Нижнетреугольный L, Sigma = L L^T
        phi: Остаток Phi >= 0
        innov_cov: Ковариация невязки K, k x k
    """

    sigma_inv: np.ndarray
    mean: np.ndarray
    chol: np.ndarray
    phi: float
    innov_cov: np.ndarray

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def sigma(self) -> np.ndarray:
        return self.chol @ self.chol.T

    def exponent(self, x: np.ndarray) -> float:
        """(x - m)^T Sigma^{-1} (x - m) / 2 + Phi."""
        d = np.asarray(x, dtype=float) - self.mean
        return float(0.5 * d @ self.sigma_inv @ d + self.phi)


def _is_diagonal_pattern(H: np.ndarray, axis: int) -> bool:
    return bool(np.all(np.count_nonzero(H, axis=axis) <= 1))


def _inverse(cov: np.ndarray, name: str) -> np.ndarray:
    """Обратная матрица для диагонали (1-D) или плотной SPD-матрицы (2-D)."""
    if cov.ndim == 1:
        if np.any(cov <= 0):
            raise SingularCovarianceError(f"{name}: диагональ должна быть строго положительной")
        return np.diag(1.0 / cov)
    try:
        factor = linalg.cho_factor(cov, lower=True)
    except linalg.LinAlgError as e:
        raise SingularCovarianceError(f"{name}: матрица не положительно определена") from e
    return linalg.cho_solve(factor, np.eye(cov.shape[0]))


def _as_matrix(cov: np.ndarray) -> np.ndarray:
    return np.diag(cov) if cov.ndim == 1 else cov


def _check_pivots(chol_diag: np.ndarray) -> None:
    pivots = chol_diag**2
    threshold = PIVOT_THRESHOLD * max(1.0, float(np.max(pivots)))
    if not np.all(np.isfinite(pivots)) or np.min(pivots) <= threshold:
        min_pivot = float(np.min(pivots))
        raise SingularCovarianceError(
            f"Ковариация Sigma вырождена: минимальный ведущий элемент {min_pivot:.3e}", min_pivot=min_pivot
        )


def _solve_phi(innov_cov: np.ndarray, innovation: np.ndarray, diagonal: bool) -> float:
    if innovation.size == 0:
        return 0.0
    if diagonal:
        k_diag = np.diag(innov_cov)
        return float(0.5 * np.sum(innovation**2 / k_diag))
    try:
        factor = linalg.cho_factor(innov_cov, lower=True)
    except linalg.LinAlgError as e:
        raise SingularCovarianceError("Ковариация невязки K не положительно определена") from e
    return float(0.5 * innovation @ linalg.cho_solve(factor, innovation))


def complete_squares(
    prior_mean: np.ndarray,
    prior_cov: np.ndarray,
    H: np.ndarray,
    obs_cov: np.ndarray,
    z: np.ndarray,
) -> PseudoGaussian:
    """
    Выделяет полный квадрат по априорному члену и линеаризованному наблюдению.

    Если обе ковариации заданы диагоналями, а каждая строка H содержит не более одного
    ненулевого элемента ("диагональная" h), Sigma считается поэлементно.

    Args:
        prior_mean: Априорное среднее (X^n + F_n для прямого шага)
        prior_cov: Диагональ G^T G (1-D) или плотная ковариация (2-D)
        H: Якобиан наблюдения k x m
        obs_cov: Диагональ Q^T Q (1-D) или плотная ковариация (2-D)
        z: Линеаризованное наблюдение

    Returns:
        PseudoGaussian: Параметры псевдо-гауссиана

    Raises:
        SingularCovarianceError: Если Sigma или K не положительно определены
    """
    prior_mean = np.asarray(prior_mean, dtype=float)
    prior_cov = np.asarray(prior_cov, dtype=float)
    obs_cov = np.asarray(obs_cov, dtype=float)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    H = np.atleast_2d(np.asarray(H, dtype=float)).reshape(z.shape[0], prior_mean.shape[0])

    innovation = z - H @ prior_mean
    k_diagonal = obs_cov.ndim == 1 and (prior_cov.ndim == 1) and _is_diagonal_pattern(H, axis=0)

    if prior_cov.ndim == 1 and obs_cov.ndim == 1 and _is_diagonal_pattern(H, axis=1):
        # Диагональный случай: H^T R^{-1} H диагональна
        if np.any(prior_cov <= 0) or np.any(obs_cov <= 0):
            raise SingularCovarianceError("Диагонали ковариаций должны быть строго положительными")
        precision = 1.0 / prior_cov + np.sum(H**2 / obs_cov[:, None], axis=0)
        sigma_diag = 1.0 / precision
        chol_diag = np.sqrt(sigma_diag)
        _check_pivots(chol_diag)
        mean = sigma_diag * (prior_mean / prior_cov + H.T @ (z / obs_cov))
        sigma_inv = np.diag(precision)
        chol = np.diag(chol_diag)
    else:
        prior_inv = _inverse(prior_cov, "prior_cov")
        obs_inv = _inverse(obs_cov, "obs_cov")
        sigma_inv = prior_inv + H.T @ obs_inv @ H
        sigma_inv = 0.5 * (sigma_inv + sigma_inv.T)
        try:
            factor = linalg.cho_factor(sigma_inv, lower=True)
            sigma = linalg.cho_solve(factor, np.eye(sigma_inv.shape[0]))
            sigma = 0.5 * (sigma + sigma.T)
            chol = linalg.cholesky(sigma, lower=True)
        except linalg.LinAlgError as e:
            raise SingularCovarianceError("Sigma не положительно определена") from e
        _check_pivots(np.diag(chol))
        mean = sigma @ (prior_inv @ prior_mean + H.T @ obs_inv @ z)

    innov_cov = H @ _as_matrix(prior_cov) @ H.T + _as_matrix(obs_cov)
    phi = _solve_phi(innov_cov, innovation, k_diagonal)
    return PseudoGaussian(sigma_inv=sigma_inv, mean=mean, chol=chol, phi=phi, innov_cov=innov_cov)


def solve_reference(pg: PseudoGaussian, xi: np.ndarray) -> np.ndarray:
    """
    Решает (X - m)^T Sigma^{-1} (X - m) / 2 = xi^T xi / 2 выбором X = m + L xi.
    """
    return pg.mean + pg.chol @ np.asarray(xi, dtype=float)


def chol_logdet(pg: PseudoGaussian) -> float:
    """log det L = sum log L_ii."""
    return float(np.sum(np.log(np.diag(pg.chol))))


def merge_diagonal_gaussians(
    mean_a: np.ndarray,
    cov_a: np.ndarray,
    mean_b: np.ndarray,
    cov_b: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    Объединяет две диагональные гауссовы формы от одного аргумента.

    (x - a)^T A^{-1} (x - a) / 2 + (x - b)^T B^{-1} (x - b) / 2
        = (x - c)^T C^{-1} (x - c) / 2 + phi,
    C^{-1} = A^{-1} + B^{-1}, c = C (A^{-1} a + B^{-1} b), phi = (a - b)^T (A + B)^{-1} (a - b) / 2.

    Returns:
        Tuple: (c, диагональ C, phi)
    """
    precision = 1.0 / cov_a + 1.0 / cov_b
    cov = 1.0 / precision
    mean = cov * (mean_a / cov_a + mean_b / cov_b)
    diff = mean_a - mean_b
    phi = float(0.5 * np.sum(diff**2 / (cov_a + cov_b)))
    return mean, cov, phi
