"""
Exception hierarchy for the rectified-flow lab.
"""


class RectifiedFlowError(Exception):
    """Base exception for rectified-flow operations."""

    pass


class ShapeMismatchError(RectifiedFlowError, ValueError):
    """Array shapes or dimensions do not line up."""

    pass


class DomainError(RectifiedFlowError, ValueError):
    """A time or parameter lies outside the guarded domain."""

    pass


class InvariantViolationError(RectifiedFlowError):
    """A structural invariant (grid, mixture, coefficient) does not hold."""

    pass


class NonFiniteStateError(RectifiedFlowError):
    """A sampler produced a non-finite state or velocity."""

    def __init__(self, message: str, step_index: int):
        super().__init__(f"{message} (step {step_index})")
        self.step_index = step_index


class TrainingDivergedError(RectifiedFlowError):
    """Training loss became non-finite."""

    def __init__(self, step: int, last_finite_loss: float | None):
        super().__init__(
            f"Training diverged at step {step}; last finite loss {last_finite_loss}"
        )
        self.step = step
        self.last_finite_loss = last_finite_loss


class MaskError(RectifiedFlowError, ValueError):
    """Attention-mask inputs or values are invalid."""

    pass


class MetricError(RectifiedFlowError, ValueError):
    """Metric inputs are empty or incompatible."""

    pass


class ConfigValidationError(RectifiedFlowError):
    """An experiment configuration failed validation."""

    pass
