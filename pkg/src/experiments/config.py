"""
Experiment configuration: defaults, file loading, overrides and validation.

A config document is resolved in a fixed order: per-experiment defaults,
then the file (JSON, YAML, or a previous run's manifest.json), then
``--override key=value`` entries, then schema and semantic validation.
"""

import copy
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import jsonschema
import yaml

from ..rf_core.data_models import GRID_TIME_ATOL
from ..rf_core.errors import ConfigValidationError
from ..samplers.drivers import SAMPLERS
from ..shared_utilities import get_logger

logger = get_logger(__name__)

SCHEMA_FILE = Path(__file__).parent / "experiment.schema.json"

EXPERIMENTS = ("marginal-check", "figure3", "step-ablation", "amo-grid", "train")

THREADS_ENV = "RF_OVERSHOOT_THREADS"

BASE_DEFAULTS: dict[str, Any] = {
    "description": "",
    "target": "two-modes",
    "velocity": "analytic",
    "n_steps": 20,
    "step_counts": [10, 20, 50, 100],
    "c_values": [1.0],
    "samplers": ["euler", "overshoot"],
    "k_inner": 5,
    "seeds": [0],
    "n_paths": 2000,
    "check_times": [0.25, 0.5, 0.75],
    "n_projections": 50,
    "max_points": 2000,
    "outdir": "output",
    "write_trajectories": False,
    "trajectory_thin": 1,
    "moment_threshold": 4.0,
    "correction": {
        "time": 0.5,
        "eps": 0.05,
        "c": 2.0,
        "applications": 5,
        "offset": 1.5,
    },
    "mask": {
        "grid_target": "bimodal-1d",
        "h": 8,
        "w": 8,
        "scenario": "focused-block",
        "n_tokens": 4,
        "per_step": False,
        "binarize_threshold": 0.5,
        "temperature": 1.0,
    },
    "training": {
        "batch_size": 256,
        "n_steps": 3000,
        "learning_rate": 3e-3,
        "optimizer": "rmsprop",
        "schedule": "cosine",
        "time_sampling": "uniform",
        "hidden_sizes": [64, 64],
        "time_features": "concat",
        "n_frequencies": 4,
        "checkpoint_every": 1000,
        "log_every": 500,
        "probe_half_width": 1.5,
        "sup_error_gate": 0.1,
    },
}

EXPERIMENT_DEFAULTS: dict[str, dict[str, Any]] = {
    "marginal-check": {
        "target": "near-point-mass",
        "n_steps": 50,
        "samplers": ["euler", "overshoot", "overshoot-no-compensation"],
        "n_paths": 10000,
        "check_times": [0.2, 0.5, 0.8],
    },
    "figure3": {
        "c_values": [0.0, 0.5, 1.0, 2.0, 4.0],
        "seeds": list(range(10)),
    },
    "step-ablation": {
        "samplers": ["overshoot", "sde"],
        "seeds": list(range(10)),
    },
    "amo-grid": {
        "c_values": [2.0],
        "samplers": ["euler", "overshoot", "amo"],
    },
    "train": {
        "target": "shifted-gaussian",
    },
}


def _merge(base: dict[str, Any], update: dict[str, Any]) -> dict[str, Any]:
    """Recursive dict merge; nested sections are merged key by key."""
    merged = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def defaults_for(experiment: str) -> dict[str, Any]:
    """Fully populated default document for an experiment."""
    if experiment not in EXPERIMENTS:
        raise ConfigValidationError(
            f"unknown experiment '{experiment}', expected one of {', '.join(EXPERIMENTS)}"
        )
    document = _merge(BASE_DEFAULTS, EXPERIMENT_DEFAULTS[experiment])
    document["experiment"] = experiment
    return document


def parse_override(entry: str) -> tuple[list[str], Any]:
    """
    Split ``a.b=value`` into (["a", "b"], parsed value).

    Values are parsed as JSON when possible and kept as strings otherwise.
    """
    key, sep, raw = entry.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigValidationError(f"override '{entry}' is not of the form key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.split("."), value


def apply_overrides(
    document: dict[str, Any], overrides: list[str] | tuple[str, ...]
) -> dict[str, Any]:
    """Apply dotted overrides to a copy of ``document``."""
    result = copy.deepcopy(document)
    for entry in overrides:
        path, value = parse_override(entry)
        node = result
        for part in path[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigValidationError(
                    f"override '{entry}': '{part}' is not a section"
                )
            node = child
        node[path[-1]] = value
        logger.debug("Override applied", key=".".join(path), value=value)
    return result


def read_document(path: Path) -> dict[str, Any]:
    """
    Read a JSON or YAML config file.

    A manifest written by a previous run is recognized by its
    ``resolved_config`` entry, which is returned instead.
    """
    path = Path(path)
    try:
        text = path.read_text()
        if path.suffix.lower() in (".yaml", ".yml"):
            data = yaml.safe_load(text)
        else:
            data = json.loads(text)
    except (OSError, json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigValidationError(f"cannot read config {path}: {e}") from e

    if not isinstance(data, dict):
        raise ConfigValidationError(f"config {path} must contain a mapping")
    if "resolved_config" in data:
        logger.info("Replaying manifest", path=str(path), seed=data.get("seed"))
        return data["resolved_config"]
    return data


def load_schema() -> dict[str, Any]:
    with open(SCHEMA_FILE) as f:
        return json.load(f)


def validate_document(document: dict[str, Any]) -> None:
    """Validate against the shipped JSON schema."""
    try:
        jsonschema.validate(document, load_schema())
    except jsonschema.ValidationError as e:
        location = ".".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigValidationError(f"invalid config at {location}: {e.message}") from e


@dataclass(frozen=True)
class ExperimentConfig:
    """
    A fully resolved, validated experiment configuration.

    ``velocity`` is "analytic" or the path of a model.json written by the
    train experiment. Nested sections keep their document form.
    """

    experiment: str
    target: str
    velocity: str
    n_steps: int
    step_counts: list[int]
    c_values: list[float]
    samplers: list[str]
    k_inner: int
    seeds: list[int]
    n_paths: int
    check_times: list[float]
    n_projections: int
    max_points: int
    outdir: str
    write_trajectories: bool
    trajectory_thin: int
    moment_threshold: float
    correction: dict[str, Any] = field(default_factory=dict)
    mask: dict[str, Any] = field(default_factory=dict)
    training: dict[str, Any] = field(default_factory=dict)
    description: str = ""

    def __post_init__(self):
        self._check_semantics()

    def _check_semantics(self) -> None:
        unknown = [name for name in self.samplers if name not in SAMPLERS]
        if unknown:
            raise ConfigValidationError(f"unknown samplers: {unknown}")
        if "amo" in self.samplers and self.experiment != "amo-grid":
            raise ConfigValidationError("the amo sampler needs a grid state; use amo-grid")
        if self.experiment == "marginal-check":
            interior = [k / self.n_steps for k in range(1, self.n_steps)]
            for t in self.check_times:
                if not any(abs(t - g) <= GRID_TIME_ATOL for g in interior):
                    raise ConfigValidationError(
                        f"check time {t} is not an interior point of the {self.n_steps}-step grid"
                    )
        if self.experiment == "amo-grid" and self.velocity != "analytic":
            raise ConfigValidationError("amo-grid runs on the analytic grid-state field only")
        if self.experiment == "train" and self.velocity != "analytic":
            raise ConfigValidationError("train fits its own model; velocity must be 'analytic'")
        if self.experiment == "figure3":
            t = float(self.correction["time"])
            if t + float(self.correction["eps"]) > 1.0:
                raise ConfigValidationError("correction time + eps must not exceed 1")

    def to_dict(self) -> dict[str, Any]:
        """Document form; feeding it back through :func:`resolve_config` is a no-op."""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        """Build from an already validated document."""
        return cls(**{name: data[name] for name in cls.__dataclass_fields__ if name in data})

    def for_seed(self, seed: int) -> "ExperimentConfig":
        """The same config restricted to one seed (recorded in manifests)."""
        data = self.to_dict()
        data["seeds"] = [seed]
        return ExperimentConfig.from_dict(data)


def resolve_config(
    experiment: str,
    config_path: Path | None = None,
    overrides: list[str] | tuple[str, ...] = (),
    seed: int | None = None,
    outdir: Path | None = None,
) -> ExperimentConfig:
    """
    Resolve defaults, file, overrides and CLI flags into a validated config.

    Raises:
        ConfigValidationError: unreadable file, schema violation, experiment
            mismatch, or a semantic error
    """
    document = defaults_for(experiment)
    if config_path is not None:
        loaded = read_document(config_path)
        declared = loaded.get("experiment", experiment)
        if declared != experiment:
            raise ConfigValidationError(
                f"config {config_path} is for '{declared}', not '{experiment}'"
            )
        document = _merge(document, loaded)
    document = apply_overrides(document, overrides)
    if seed is not None:
        document["seeds"] = [seed]
    if outdir is not None:
        document["outdir"] = str(outdir)

    validate_document(document)
    config = ExperimentConfig.from_dict(document)
    logger.debug("Config resolved", experiment=experiment, seeds=config.seeds)
    return config


def worker_count(n_seeds: int) -> int:
    """Thread pool size: RF_OVERSHOOT_THREADS, else one per CPU, capped by seeds."""
    raw = os.getenv(THREADS_ENV)
    if raw:
        try:
            cap = int(raw)
        except ValueError as e:
            raise ConfigValidationError(f"{THREADS_ENV} must be an integer, got '{raw}'") from e
        if cap < 1:
            raise ConfigValidationError(f"{THREADS_ENV} must be >= 1, got {cap}")
    else:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_seeds))
