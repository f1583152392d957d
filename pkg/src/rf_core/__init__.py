"""
Foundations shared by every other package: the time grid, state batches,
the velocity-field protocol, seeded noise and the interpolation identities.
"""

from .data_models import StateBatch, TimeGrid, check_same_shape, check_state_batch
from .errors import (
    ConfigValidationError,
    DomainError,
    InvariantViolationError,
    MaskError,
    MetricError,
    NonFiniteStateError,
    RectifiedFlowError,
    ShapeMismatchError,
    TrainingDivergedError,
)
from .flow import (
    SCORE_GUARD,
    check_score_time,
    interpolate,
    score_from_velocity,
    velocity_target,
)
from .noise import NoiseSource
from .velocity import ConstantVelocity, VelocityField, evaluate_velocity

__all__ = [
    "StateBatch",
    "TimeGrid",
    "check_same_shape",
    "check_state_batch",
    "ConfigValidationError",
    "DomainError",
    "InvariantViolationError",
    "MaskError",
    "MetricError",
    "NonFiniteStateError",
    "RectifiedFlowError",
    "ShapeMismatchError",
    "TrainingDivergedError",
    "SCORE_GUARD",
    "check_score_time",
    "interpolate",
    "score_from_velocity",
    "velocity_target",
    "NoiseSource",
    "ConstantVelocity",
    "VelocityField",
    "evaluate_velocity",
]
