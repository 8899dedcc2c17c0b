"""
Основные компоненты фильтра: модель пространства состояний, псевдо-гауссианы,
подпотоки случайных чисел и исключения.
"""

from .enums import FilterKind, JacobianMode, ModelKind, ResampleMode, StepKind, StreamRole
from .exceptions import (
    ConfigError,
    DegenerateEnsembleError,
    ImplicitFilterError,
    ModelError,
    NonConvergenceError,
    NumericalError,
    PropagationDivergedError,
    SingularCovarianceError,
    SingularJacobianError,
    UnsupportedModelError,
)
from .model import (
    Ensemble,
    LinearDynamics,
    ObservationRecord,
    Particle,
    StateSpaceModel,
    check_obs_jacobian,
    observe_likelihood_log,
    propagate,
)
from .pseudo_gaussian import PseudoGaussian, chol_logdet, complete_squares, solve_reference
from .rng import derive_seed, rng_substream, standard_normals


__all__ = [
    "ConfigError",
    "DegenerateEnsembleError",
    "Ensemble",
    "FilterKind",
    "ImplicitFilterError",
    "JacobianMode",
    "LinearDynamics",
    "ModelError",
    "ModelKind",
    "NonConvergenceError",
    "NumericalError",
    "ObservationRecord",
    "Particle",
    "PropagationDivergedError",
    "PseudoGaussian",
    "ResampleMode",
    "SingularCovarianceError",
    "SingularJacobianError",
    "StateSpaceModel",
    "StepKind",
    "StreamRole",
    "UnsupportedModelError",
    "check_obs_jacobian",
    "chol_logdet",
    "complete_squares",
    "derive_seed",
    "observe_likelihood_log",
    "propagate",
    "rng_substream",
    "solve_reference",
    "standard_normals",
]
