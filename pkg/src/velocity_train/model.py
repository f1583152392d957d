"""
Small tanh MLP velocity model.

Inputs are the state x concatenated with time features; the last layer is
linear. Weights are stored (fan_in, fan_out) so a layer computes h @ W + b.
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import NDArray

from ..rf_core.data_models import StateBatch
from ..rf_core.errors import DomainError, ShapeMismatchError
from ..rf_core.noise import NoiseSource

TIME_FEATURES = ("concat", "sinusoidal")
DEFAULT_HIDDEN = (64, 64)

Params = list[NDArray[np.float64]]


def time_feature_count(time_features: str, n_frequencies: int) -> int:
    """Number of time columns appended to x."""
    if time_features == "concat":
        return 1
    if time_features == "sinusoidal":
        return 1 + 2 * n_frequencies
    raise DomainError(f"unknown time features '{time_features}', expected one of {TIME_FEATURES}")


def _per_sample_times(t, batch: int) -> NDArray[np.float64]:
    t_arr = np.asarray(t, dtype=np.float64)
    if t_arr.ndim == 0:
        return np.full(batch, float(t_arr))
    t_arr = t_arr.reshape(-1)
    if t_arr.shape[0] != batch:
        raise ShapeMismatchError(f"expected {batch} per-sample times, got {t_arr.shape[0]}")
    return t_arr


@dataclass(frozen=True, eq=False)
class MlpVelocity:
    """
    v(x, t) as a fully connected tanh network.

    Attributes:
        weights: One (fan_in, fan_out) matrix per layer
        biases: One fan_out vector per layer
        time_features: "concat" appends t; "sinusoidal" also appends
            sin/cos(k pi t) for k = 1..n_frequencies
        n_frequencies: Sinusoidal frequencies (ignored for "concat")
    """

    weights: tuple[NDArray[np.float64], ...]
    biases: tuple[NDArray[np.float64], ...]
    time_features: str = "concat"
    n_frequencies: int = 4

    def __post_init__(self):
        weights = tuple(np.array(w, dtype=np.float64) for w in self.weights)
        biases = tuple(np.array(b, dtype=np.float64).reshape(-1) for b in self.biases)
        if not weights or len(weights) != len(biases):
            raise ShapeMismatchError("need one bias per weight matrix and at least one layer")
        n_time = time_feature_count(self.time_features, self.n_frequencies)
        for i, (w, b) in enumerate(zip(weights, biases, strict=True)):
            if w.ndim != 2 or b.shape[0] != w.shape[1]:
                raise ShapeMismatchError(f"layer {i}: weight {w.shape} and bias {b.shape} disagree")
            if i and w.shape[0] != weights[i - 1].shape[1]:
                raise ShapeMismatchError(f"layer {i} input {w.shape[0]} != previous output")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise DomainError(f"layer {i} has non-finite parameters")
            w.setflags(write=False)
            b.setflags(write=False)
        if weights[0].shape[0] != weights[-1].shape[1] + n_time:
            raise ShapeMismatchError(
                f"input width {weights[0].shape[0]} must be dim {weights[-1].shape[1]} "
                f"plus {n_time} time features"
            )
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "biases", biases)

    @classmethod
    def initialize(
        cls,
        dim: int,
        hidden_sizes: Sequence[int] = DEFAULT_HIDDEN,
        time_features: str = "concat",
        n_frequencies: int = 4,
        rng: NoiseSource | None = None,
    ) -> "MlpVelocity":
        """Glorot-normal weights and zero biases."""
        if dim < 1 or any(h < 1 for h in hidden_sizes):
            raise DomainError(f"invalid architecture dim={dim}, hidden={list(hidden_sizes)}")
        rng = rng or NoiseSource(0)
        widths = [dim + time_feature_count(time_features, n_frequencies), *hidden_sizes, dim]
        weights, biases = [], []
        for fan_in, fan_out in zip(widths, widths[1:], strict=False):
            scale = math.sqrt(2.0 / (fan_in + fan_out))
            weights.append(scale * rng.normal((fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(tuple(weights), tuple(biases), time_features, n_frequencies)

    @property
    def dim(self) -> int:
        return int(self.weights[-1].shape[1])

    @property
    def hidden_sizes(self) -> list[int]:
        return [int(w.shape[1]) for w in self.weights[:-1]]

    @property
    def n_parameters(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases, strict=True))

    def features(self, x: StateBatch, t) -> NDArray[np.float64]:
        """Network input [x, t, (sin, cos)(k pi t)...]."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.dim:
            raise ShapeMismatchError(f"expected a (B, {self.dim}) batch, got {x.shape}")
        times = _per_sample_times(t, x.shape[0])[:, None]
        columns = [x, times]
        if self.time_features == "sinusoidal":
            angles = np.pi * times * np.arange(1, self.n_frequencies + 1)
            columns += [np.sin(angles), np.cos(angles)]
        return np.hstack(columns)

    def forward(self, x: StateBatch, t) -> tuple[StateBatch, list[NDArray[np.float64]]]:
        """Output and the per-layer inputs needed for backpropagation."""
        h = self.features(x, t)
        activations = [h]
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases, strict=True)):
            z = h @ w + b
            h = z if i == last else np.tanh(z)
            if i != last:
                activations.append(h)
        return h, activations

    def __call__(self, x, t) -> StateBatch:
        return self.forward(x, t)[0]

    def parameters(self) -> Params:
        """Copies of [W0, b0, W1, b1, ...]."""
        params: Params = []
        for w, b in zip(self.weights, self.biases, strict=True):
            params += [w.copy(), b.copy()]
        return params

    def with_parameters(self, params: Sequence[NDArray[np.float64]]) -> "MlpVelocity":
        """Same architecture with new parameters, in :meth:`parameters` order."""
        if len(params) != 2 * len(self.weights):
            raise ShapeMismatchError(f"expected {2 * len(self.weights)} arrays, got {len(params)}")
        for new, old in zip(params, self.parameters(), strict=True):
            if np.shape(new) != old.shape:
                raise ShapeMismatchError(f"parameter shape {np.shape(new)} != {old.shape}")
        return MlpVelocity(
            weights=tuple(params[0::2]),
            biases=tuple(params[1::2]),
            time_features=self.time_features,
            n_frequencies=self.n_frequencies,
        )

    def flat_parameters(self) -> NDArray[np.float64]:
        return np.concatenate([p.reshape(-1) for p in self.parameters()])

    def with_flat_parameters(self, flat: NDArray[np.float64]) -> "MlpVelocity":
        """Inverse of :meth:`flat_parameters`."""
        flat = np.asarray(flat, dtype=np.float64).reshape(-1)
        if flat.shape[0] != self.n_parameters:
            raise ShapeMismatchError(f"expected {self.n_parameters} values, got {flat.shape[0]}")
        params, offset = [], 0
        for template in self.parameters():
            params.append(flat[offset : offset + template.size].reshape(template.shape))
            offset += template.size
        return self.with_parameters(params)

    def to_dict(self) -> dict[str, Any]:
        """Checkpoint document: architecture plus flat row-major parameters."""
        return {
            "time_features": self.time_features,
            "n_frequencies": self.n_frequencies,
            "layers": [
                {"shape": list(w.shape), "weight": w.reshape(-1).tolist(), "bias": b.tolist()}
                for w, b in zip(self.weights, self.biases, strict=True)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "MlpVelocity":
        try:
            weights = tuple(
                np.asarray(layer["weight"], dtype=np.float64).reshape(layer["shape"])
                for layer in data["layers"]
            )
            biases = tuple(np.asarray(layer["bias"], dtype=np.float64) for layer in data["layers"])
            return cls(
                weights,
                biases,
                data.get("time_features", "concat"),
                int(data.get("n_frequencies", 4)),
            )
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, DomainError | ShapeMismatchError):
                raise
            raise ShapeMismatchError(f"invalid model document: {e}") from e

    def __repr__(self) -> str:
        widths = [self.weights[0].shape[0], *self.hidden_sizes, self.dim]
        return f"MlpVelocity({'-'.join(str(w) for w in widths)}, {self.time_features})"
