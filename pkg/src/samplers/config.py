"""
Sampler configuration.
"""

import math
from dataclasses import asdict, dataclass
from typing import Any

from ..rf_core.errors import DomainError

# Strengths used with the public rectified-flow text-to-image models.
OVERSHOOT_STRENGTH_PRESETS: dict[str, float] = {
    "flux": 2.0,
    "sd3": 1.0,
    "auraflow": 1.0,
}
DEFAULT_STEPS = 100


@dataclass(frozen=True)
class OvershootConfig:
    """
    Overshoot strength and step policy.

    Attributes:
        c: Overshoot strength; the ODE is advanced to o = s + c (s - t)
        clamp: Cap o at 1. Unclamped steps are for SDE-limit studies only
        noise_compensation: Rescale and re-noise back to time s. Turning it
            off returns the overshot state as is (ablation diagnostic)
    """

    c: float = 1.0
    clamp: bool = True
    noise_compensation: bool = True

    def __post_init__(self):
        c = float(self.c)
        if not math.isfinite(c) or c < 0.0:
            raise DomainError(f"overshoot strength c must be finite and >= 0, got {self.c}")
        object.__setattr__(self, "c", c)

    @classmethod
    def for_model(cls, name: str, **kwargs) -> "OvershootConfig":
        """Config with the preset strength for a named model family."""
        try:
            return cls(c=OVERSHOOT_STRENGTH_PRESETS[name], **kwargs)
        except KeyError as e:
            raise DomainError(
                f"unknown strength preset '{name}', "
                f"available: {', '.join(sorted(OVERSHOOT_STRENGTH_PRESETS))}"
            ) from e

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for serialization."""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "OvershootConfig":
        """Create from a dictionary, ignoring unknown keys."""
        return cls(
            c=data.get("c", 1.0),
            clamp=bool(data.get("clamp", True)),
            noise_compensation=bool(data.get("noise_compensation", True)),
        )
