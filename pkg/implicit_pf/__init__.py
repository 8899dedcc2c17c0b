"""
Неявный фильтр частиц для моделей в пространстве состояний.
"""

from .cli import cli
from .config import RunConfig, RuntimeSettings, load_run_config
from .core import (
    ConfigError,
    ImplicitFilterError,
    ModelError,
    NonConvergenceError,
    NumericalError,
    StateSpaceModel,
)
from .core.enums import FilterKind, JacobianMode, ModelKind, ResampleMode
from .services.driver import FilterDriver, RunMetrics, run_filter
from .services.experiments import compare_filters, weight_study
from .systems import iid_gaussian_model, linear_gaussian_model, plankton_model, synth_twin_data


__all__ = [
    "ConfigError",
    "FilterDriver",
    "FilterKind",
    "ImplicitFilterError",
    "JacobianMode",
    "ModelError",
    "ModelKind",
    "NonConvergenceError",
    "NumericalError",
    "ResampleMode",
    "RunConfig",
    "RunMetrics",
    "RuntimeSettings",
    "StateSpaceModel",
    "cli",
    "compare_filters",
    "iid_gaussian_model",
    "linear_gaussian_model",
    "load_run_config",
    "plankton_model",
    "run_filter",
    "synth_twin_data",
    "weight_study",
]

__version__ = "0.1.0"
