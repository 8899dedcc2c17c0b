"""
Нормировка весов, ресэмплинг и метрики разнообразия ансамбля.
"""

import logging
import math
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import logsumexp

from ..core.enums import ResampleMode
from ..core.exceptions import DegenerateEnsembleError
from ..core.model import Particle


logger = logging.getLogger(__name__)


class ResamplePolicy(BaseModel):
    """
    Политика ресэмплинга.

    Attributes:
        mode: every_step - на каждом шаге с наблюдением; weight_ratio - когда отношение
            наибольшего накопленного веса к наименьшему превышает ratio_limit
        ratio_limit: Порог L > 1 для weight_ratio
        subset_size: Размер блока для ресэмплинга внутри подмножеств (None - весь ансамбль)
        stratified: Стратифицированные theta вместо независимых равномерных
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    mode: ResampleMode = ResampleMode.EVERY_STEP
    ratio_limit: float = 10.0
    subset_size: Optional[int] = Field(None, ge=1)
    stratified: bool = False

    @model_validator(mode="after")
    def _check_ratio(self) -> "ResamplePolicy":
        if self.mode == ResampleMode.WEIGHT_RATIO and not self.ratio_limit > 1:
            raise ValueError(f"ratio_limit должен быть > 1, получено {self.ratio_limit}")
        return self


def normalize_log_weights(log_weights: Sequence[float]) -> np.ndarray:
    """
    Переводит логарифмы весов в вероятности: вычитание максимума, экспонента, деление на сумму.

    Raises:
        DegenerateEnsembleError: Если все веса равны -inf (или есть NaN)
    """
    lw = np.asarray(log_weights, dtype=float)
    if lw.size == 0 or np.any(np.isnan(lw)) or not np.any(np.isfinite(lw)):
        raise DegenerateEnsembleError("Ансамбль выродился: нет ни одного конечного веса")
    w = np.exp(lw - np.max(lw))
    return w / np.sum(w)


def effective_sample_size(log_weights: Sequence[float]) -> float:
    """ESS = (sum w)^2 / sum w^2."""
    lw = np.asarray(log_weights, dtype=float)
    if not np.any(np.isfinite(lw)):
        raise DegenerateEnsembleError("Ансамбль выродился: нет ни одного конечного веса")
    return float(np.exp(2.0 * logsumexp(lw) - logsumexp(2.0 * lw)))


def draw_thetas(rng: np.random.Generator, size: int, stratified: bool = False) -> np.ndarray:
    """Равномерные величины на (0, 1] (независимые или по одной в каждой страте)."""
    u = 1.0 - rng.random(size)
    if not stratified:
        return u
    return (np.arange(size) + u) / size


def resample_indices(probs: Sequence[float], thetas: Sequence[float]) -> np.ndarray:
    """
    Индексы i с A^{-1} sum_{j<i} W_j < theta_k <= A^{-1} sum_{j<=i} W_j.
    """
    cumulative = np.cumsum(np.asarray(probs, dtype=float))
    cumulative[-1] = 1.0
    indices = np.searchsorted(cumulative, np.asarray(thetas, dtype=float), side="left")
    return np.minimum(indices, len(cumulative) - 1)


def _copy_as(particle: Particle, ancestor: int, log_weight: float = 0.0) -> Particle:
    child = particle.clone()
    child.log_weight = log_weight
    child.ancestor = ancestor
    return child


def resample(particles: Sequence[Particle], probs: Sequence[float], thetas: Sequence[float]) -> List[Particle]:
    """
    Ресэмплинг: k-я частица результата - копия частицы, чей интервал накопленных
    вероятностей содержит theta_k. Веса сбрасываются в 0, истории копируются.
    """
    indices = resample_indices(probs, thetas)
    return [_copy_as(particles[i], int(i)) for i in indices]


def resample_subsets(
    particles: Sequence[Particle],
    probs: Sequence[float],
    thetas: Sequence[float],
    subset_size: int,
) -> List[Particle]:
    """
    Ресэмплинг внутри блоков индексов размера subset_size.

    Частицы блока после ресэмплинга получают одинаковый вес - средний вес блока,
    так что блоки сохраняют свою суммарную вероятность.
    """
    probs = np.asarray(probs, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    result: List[Particle] = []
    for start in range(0, len(particles), subset_size):
        stop = min(start + subset_size, len(particles))
        block = probs[start:stop]
        total = float(np.sum(block))
        if total <= 0.0:
            result.extend(_copy_as(particles[i], i, -math.inf) for i in range(start, stop))
            continue
        log_weight = math.log(total / (stop - start))
        local = resample_indices(block / total, thetas[start:stop])
        result.extend(_copy_as(particles[start + int(i)], start + int(i), log_weight) for i in local)
    return result


def should_resample(cumulative_log_weights: Sequence[float], policy: ResamplePolicy) -> bool:
    """every_step - всегда; weight_ratio - если max - min > log L."""
    if policy.mode == ResampleMode.EVERY_STEP:
        return True
    lw = np.asarray(cumulative_log_weights, dtype=float)
    return bool(np.max(lw) - np.min(lw) > math.log(policy.ratio_limit))


def distinct_count(particles: Sequence[Particle]) -> int:
    """Число различных предков, переживших последний ресэмплинг."""
    return len({p.ancestor for p in particles})


def apply_policy(
    particles: Sequence[Particle],
    policy: ResamplePolicy,
    rng: np.random.Generator,
) -> Optional[List[Particle]]:
    """
    Применяет политику к ансамблю.

    Returns:
        Новый список частиц или None, если ресэмплинг не нужен
    """
    log_weights = [p.log_weight for p in particles]
    if not should_resample(log_weights, policy):
        return None
    probs = normalize_log_weights(log_weights)
    size = len(particles)
    if policy.subset_size is not None and policy.subset_size < size:
        # Страты строятся внутри каждого блока
        thetas = np.concatenate(
            [
                draw_thetas(rng, min(policy.subset_size, size - start), policy.stratified)
                for start in range(0, size, policy.subset_size)
            ]
        )
        return resample_subsets(particles, probs, thetas, policy.subset_size)
    return resample(particles, probs, draw_thetas(rng, size, policy.stratified))
