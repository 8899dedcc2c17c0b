"""
Алгоритмы фильтрации: неявные шаги, ресэмплинг и эталонные фильтры.

Драйвер, отчеты и эксперименты импортируются из своих модулей напрямую
(services.driver, services.reporting, services.experiments), так как зависят от config.
"""

from .baselines import KalmanState, kalman_step, max_normalized_weight, sir_step
from .implicit_sampling import (
    DEFAULT_ITERATION,
    IterationConfig,
    StepResult,
    backward_step,
    forward_step,
    gaussian_moment_step,
    jacobian_logdet,
    sparse_step,
)
from .resampling import (
    ResamplePolicy,
    apply_policy,
    distinct_count,
    effective_sample_size,
    normalize_log_weights,
    resample,
    resample_subsets,
    should_resample,
)


__all__ = [
    "DEFAULT_ITERATION",
    "IterationConfig",
    "KalmanState",
    "ResamplePolicy",
    "StepResult",
    "apply_policy",
    "backward_step",
    "distinct_count",
    "effective_sample_size",
    "forward_step",
    "gaussian_moment_step",
    "jacobian_logdet",
    "kalman_step",
    "max_normalized_weight",
    "normalize_log_weights",
    "resample",
    "resample_subsets",
    "should_resample",
    "sir_step",
    "sparse_step",
]
