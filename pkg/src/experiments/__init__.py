"""
Named experiments, their configuration and the rf-overshoot CLI.
"""

from .config import EXPERIMENTS, ExperimentConfig, resolve_config
from .core import (
    RUNNERS,
    ExperimentRunner,
    run_amo_grid,
    run_experiment,
    run_figure3,
    run_marginal_check,
    run_step_ablation,
    run_train,
)
from .data_models import ExperimentSummary, GateOutcome, GateSpec, SeedResult

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "resolve_config",
    "RUNNERS",
    "ExperimentRunner",
    "run_amo_grid",
    "run_experiment",
    "run_figure3",
    "run_marginal_check",
    "run_step_ablation",
    "run_train",
    "ExperimentSummary",
    "GateOutcome",
    "GateSpec",
    "SeedResult",
]
