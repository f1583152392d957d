"""
Experiment runners.

Each runner executes one seed at a time in a thread pool. A seed owns the
noise lineage rooted at ``NoiseSource(seed)``:

    spawn(0)  initial states z0
    spawn(1)  sampler noise; a fresh copy per sampler (common random numbers)
    spawn(2)  reference draws from the closed-form laws
    spawn(3)  metric randomness (permutations, projections)
    spawn(4+) experiment-specific streams

so results depend only on (config, seed), never on scheduling.
"""

import hashlib
import platform
import time
from abc import ABC, abstractmethod
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor, as_completed
from datetime import datetime
from datetime import timezone as _timezone
from importlib import metadata
from pathlib import Path
from typing import Any, ClassVar

import numpy as np

from ..analytic_models.factorized import FactorizedMixture
from ..analytic_models.mixture import analytic_velocity, marginal_at
from ..analytic_models.presets import load_mixture, load_preset
from ..attention_mask.mask import AttentionMask, mask_from_attention
from ..attention_mask.providers import (
    ConstantMaskProvider,
    MaskProvider,
    PerStepMaskProvider,
    StaticMaskProvider,
)
from ..attention_mask.synthetic import synthetic_attention
from ..eval_metrics.metrics import (
    MetricReport,
    energy_distance,
    energy_test,
    moment_test,
    sliced_wasserstein,
)
from ..rf_core.data_models import StateBatch, TimeGrid
from ..rf_core.errors import (
    ConfigValidationError,
    DomainError,
    InvariantViolationError,
    MaskError,
    ShapeMismatchError,
)
from ..rf_core.noise import NoiseSource
from ..rf_core.velocity import VelocityField
from ..samplers.config import OvershootConfig
from ..samplers.drivers import (
    SamplerFactory,
    amo_sample,
    euler_sample,
    overshoot_sample,
)
from ..samplers.steps import overshoot_correction
from ..samplers.trajectory import Trajectory, points_rows
from ..shared_utilities import get_logger, get_logging_manager
from ..shared_utilities.logging_config import SERVICE_VERSION
from ..shared_utilities.output_formatter import (
    format_json,
    format_jsonl,
    format_rows_csv,
)
from ..shared_utilities.output_manager import OutputManager
from ..shared_utilities.telemetry import trace_function, trace_operation
from ..velocity_train.trainer import (
    TrainConfig,
    load_model,
    probe_grid,
    save_model,
    train_with_history,
)
from .config import ExperimentConfig, worker_count
from .data_models import ExperimentSummary, GateOutcome, GateSpec, SeedResult

UTC = _timezone.utc  # datetime.UTC is 3.11+; identical object

logger = get_logger(__name__)

Z0_STREAM = 0
SAMPLER_STREAM = 1
REFERENCE_STREAM = 2
METRIC_STREAM = 3

RECORD_FIELDS = [
    "seed",
    "sampler",
    "c",
    "n_steps",
    "time",
    "metric",
    "value",
    "standard_error",
    "passed",
]
GATE_FIELDS = [
    "gate",
    "passed",
    "asserted",
    "n_passed",
    "n_evaluated",
    "fraction",
    "min_fraction",
]

# Samplers whose intermediate marginals are exact for a straight-line flow.
MARGINAL_EXACT_SAMPLERS = ("euler", "overshoot")
ORDERING_STEP_COUNTS = (10, 20)
ORDERING_MIN_FRACTION = 0.7
NARROWING_RATIO = 2.0
TOP_PANEL_C = 1.0
BOTTOM_PANEL_MIN_FRACTION = 0.8
TRAIN_PROBE_TIMES = (0.25, 0.5, 0.75)
PACKAGES = ("numpy", "scipy", "scikit-learn", "click", "jsonschema", "pyyaml", "loguru")


def software_versions() -> dict[str, str]:
    """Versions recorded in every manifest."""
    versions = {"python": platform.python_version()}
    try:
        versions["rf-overshoot-lab"] = metadata.version("rf-overshoot-lab")
    except metadata.PackageNotFoundError:
        versions["rf-overshoot-lab"] = SERVICE_VERSION
    for package in PACKAGES:
        try:
            versions[package] = metadata.version(package)
        except metadata.PackageNotFoundError:
            versions[package] = "unknown"
    return versions


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def build_manifest(
    config: ExperimentConfig, seed: int, outputs: dict[str, str], wall_time: float
) -> dict[str, Any]:
    """
    Manifest for one seed directory.

    ``resolved_config`` is the config restricted to this seed; passing the
    manifest back as ``--config`` replays the run.
    """
    return {
        "experiment": config.experiment,
        "seed": seed,
        "resolved_config": config.for_seed(seed).to_dict(),
        "software": software_versions(),
        "platform": platform.platform(),
        "wall_time_seconds": wall_time,
        "created_at": datetime.now(UTC).isoformat(timespec="seconds"),
        "outputs": outputs,
    }


def evaluate_gates(
    specs: list[GateSpec], seed_results: list[SeedResult]
) -> list[GateOutcome]:
    """Aggregate per-seed checks into gate outcomes."""
    outcomes = []
    for spec in specs:
        evaluated = [
            r.checks[spec.name] for r in seed_results if r.checks.get(spec.name) is not None
        ]
        n_passed = sum(1 for ok in evaluated if ok)
        if not evaluated:
            passed = None
        else:
            fraction = n_passed / len(evaluated)
            if spec.strict:
                passed = fraction > spec.min_fraction
            else:
                passed = fraction >= spec.min_fraction
        outcomes.append(
            GateOutcome(
                name=spec.name,
                passed=passed,
                asserted=spec.asserted,
                n_passed=n_passed,
                n_evaluated=len(evaluated),
                min_fraction=spec.min_fraction,
                description=spec.description,
            )
        )
    return outcomes


def load_velocity(source: str, target) -> VelocityField:
    """The exact field of ``target`` or a trained model.json of matching dimension."""
    if source == "analytic":
        return analytic_velocity(target)
    model = load_model(Path(source))
    if model.dim != target.dim:
        raise ShapeMismatchError(
            f"model {source} has dimension {model.dim}, target has {target.dim}"
        )
    logger.info("Loaded trained velocity", path=source, architecture=repr(model))
    return model


def make_record(
    metric: str,
    value: float | None,
    *,
    sampler: str | None = None,
    c: float | None = None,
    n_steps: int | None = None,
    time: float | None = None,
    standard_error: float | None = None,
    passed: bool | None = None,
    details: dict[str, Any] | None = None,
) -> dict[str, Any]:
    """One results.jsonl record; the scalar fields also feed metrics.csv."""
    return {
        "sampler": sampler,
        "c": c,
        "n_steps": n_steps,
        "time": time,
        "metric": metric,
        "value": value,
        "standard_error": standard_error,
        "passed": passed,
        "details": details or {},
    }


def report_record(
    report: MetricReport,
    sampler: str | None = None,
    c: float | None = None,
    n_steps: int | None = None,
    time: float | None = None,
    metric: str | None = None,
) -> dict[str, Any]:
    """Record from a metric report."""
    return make_record(
        metric or report.metric,
        report.value,
        sampler=sampler,
        c=c,
        n_steps=n_steps,
        time=time,
        standard_error=report.standard_error,
        passed=report.passed,
        details=report.details,
    )


def capped(points: StateBatch, max_points: int) -> StateBatch:
    return points[:max_points] if max_points else points[:0]


class ExperimentRunner(ABC):
    """
    Runs one experiment over its seeds and writes the output tree.

    Subclasses implement :meth:`run_seed`, which fills the seed's records
    and checks and returns the files to write, and :meth:`gate_specs`.
    """

    experiment: ClassVar[str] = ""

    def __init__(
        self, config: ExperimentConfig, output_manager: OutputManager | None = None
    ):
        if config.experiment != self.experiment:
            raise ConfigValidationError(
                f"{type(self).__name__} runs '{self.experiment}', got '{config.experiment}'"
            )
        self.config = config
        self.output_manager = output_manager or OutputManager(config.outdir)
        self.logging_manager = get_logging_manager()

    @abstractmethod
    def gate_specs(self) -> list[GateSpec]:
        """Gates evaluated after all seeds finished."""
        pass

    @abstractmethod
    def run_seed(self, seed: int, result: SeedResult) -> dict[str, str]:
        """Run one seed; returns {filename: content} for the seed directory."""
        pass

    def stochastic_runs(self) -> list[tuple[str, float | None]]:
        """(sampler, c) pairs: deterministic samplers once, the others per c."""
        factory = SamplerFactory()
        runs: list[tuple[str, float | None]] = []
        for name in self.config.samplers:
            if not factory.get_sampler(name).stochastic:
                runs.append((name, None))
            else:
                runs.extend((name, float(c)) for c in self.config.c_values)
        return runs

    def sample(
        self,
        name: str,
        c: float | None,
        v: VelocityField,
        grid: TimeGrid,
        z0: StateBatch,
        root: NoiseSource,
    ) -> Trajectory:
        """One sampler run on a fresh copy of the sampler stream."""
        sampler = SamplerFactory().get_sampler(
            name, OvershootConfig(c=c or 0.0), k_inner=self.config.k_inner
        )
        return sampler.sample(v, grid, z0, root.spawn(SAMPLER_STREAM))

    def _execute_seed(self, seed: int) -> SeedResult:
        start = time.perf_counter()
        result = SeedResult(seed=seed)
        with trace_operation(f"experiments.{self.experiment}.seed", {"seed": seed}):
            files = self.run_seed(seed, result)
        files["results.jsonl"] = format_jsonl(result.records)
        for filename in sorted(files):
            self.output_manager.save_output(files[filename], self.experiment, seed, filename)

        run_dir = self.output_manager.get_run_dir(self.experiment, seed)
        outputs = {
            path.relative_to(run_dir).as_posix(): sha256_file(path)
            for path in self.output_manager.get_existing_outputs(self.experiment, seed)
            if path.name != "manifest.json"
        }
        result.outputs = sorted(outputs)
        result.wall_time = time.perf_counter() - start
        manifest = build_manifest(self.config, seed, outputs, result.wall_time)
        self.output_manager.save_output(
            format_json(manifest), self.experiment, seed, "manifest.json"
        )
        logger.info(
            "Seed finished",
            experiment=self.experiment,
            seed=seed,
            wall_time=round(result.wall_time, 3),
        )
        return result

    def run(self) -> ExperimentSummary:
        """Run every seed, evaluate gates and write the experiment summaries."""
        seeds = list(self.config.seeds)
        workers = worker_count(len(seeds))
        self.logging_manager.log_operation_start(
            self.experiment, seeds=seeds, workers=workers
        )
        start = time.perf_counter()

        by_seed: dict[int, SeedResult] = {}
        try:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = {pool.submit(self._execute_seed, seed): seed for seed in seeds}
                for future in as_completed(futures):
                    by_seed[futures[future]] = future.result()
        except Exception as e:
            self.logging_manager.log_operation_error(self.experiment, e, seeds=seeds)
            raise

        seed_results = [by_seed[seed] for seed in seeds]
        gates = evaluate_gates(self.gate_specs(), seed_results)
        for gate in gates:
            self.logging_manager.log_gate_result(
                gate.name,
                gate.passed,
                f"{gate.n_passed}/{gate.n_evaluated} seeds"
                + ("" if gate.asserted else " (reported only)"),
            )

        summary = ExperimentSummary(
            experiment=self.experiment,
            seeds=seeds,
            gates=gates,
            seed_results=seed_results,
            wall_time=time.perf_counter() - start,
        )
        self._write_summaries(summary)
        self.logging_manager.log_operation_complete(
            self.experiment, summary.wall_time, passed=summary.passed
        )
        return summary

    def _write_summaries(self, summary: ExperimentSummary) -> None:
        rows = [gate.to_row() for gate in summary.gates]
        metrics = [record for r in summary.seed_results for record in r.records]
        self.output_manager.save_output(
            format_rows_csv(rows, GATE_FIELDS), self.experiment, None, "summary.csv"
        )
        self.output_manager.save_output(
            format_rows_csv(metrics, RECORD_FIELDS), self.experiment, None, "metrics.csv"
        )
        self.output_manager.save_output(
            format_json(summary.to_dict()), self.experiment, None, "summary.json"
        )


class MixtureRunner(ExperimentRunner):
    """Runner on a Gaussian-mixture target with an analytic or trained field."""

    def __init__(
        self, config: ExperimentConfig, output_manager: OutputManager | None = None
    ):
        super().__init__(config, output_manager)
        try:
            self.target = load_mixture(config.target)
            self.velocity = load_velocity(config.velocity, self.target)
        except (InvariantViolationError, ShapeMismatchError) as e:
            raise ConfigValidationError(f"cannot load target or velocity: {e}") from e

    @property
    def learned_field(self) -> bool:
        """Ordering gates are asserted only for a trained model.json field."""
        return self.config.velocity != "analytic"


class MarginalCheckRunner(MixtureRunner):
    """
    Compares intermediate states with the closed-form marginal law.

    At every check time each run gets a moment test and an energy
    permutation test against direct draws from the marginal.
    """

    experiment = "marginal-check"

    def gate_specs(self) -> list[GateSpec]:
        specs = []
        for name in self.config.samplers:
            asserted = name in MARGINAL_EXACT_SAMPLERS
            for kind in ("moments", "energy-test"):
                specs.append(
                    GateSpec(
                        name=f"{name}.{kind}",
                        asserted=asserted,
                        description=f"{kind} against the marginal law at every check time",
                    )
                )
        return specs

    def run_seed(self, seed: int, result: SeedResult) -> dict[str, str]:
        cfg = self.config
        root = NoiseSource(seed)
        grid = TimeGrid.uniform(cfg.n_steps)
        z0 = root.spawn(Z0_STREAM).normal((cfg.n_paths, self.target.dim))
        reference_root = root.spawn(REFERENCE_STREAM)
        references = [
            marginal_at(self.target, t).sample(cfg.n_paths, reference_root.spawn(i))
            for i, t in enumerate(cfg.check_times)
        ]

        rows: list[dict[str, Any]] = []
        files: dict[str, str] = {}
        for i, t in enumerate(cfg.check_times):
            rows += points_rows(capped(references[i], cfg.max_points), f"reference-t{t}")

        for name, c in self.stochastic_runs():
            trajectory = self.sample(name, c, self.velocity, grid, z0, root)
            label = name if c is None else f"{name}-c{c}"
            for i, t in enumerate(cfg.check_times):
                batch = trajectory.at(t)
                law = marginal_at(self.target, t)
                moments = moment_test(batch, law, cfg.moment_threshold)
                test = energy_test(
                    batch, references[i], root.spawn(METRIC_STREAM).spawn(i)
                )
                distance = energy_distance(batch, references[i])
                for report in (moments, test, distance):
                    result.add_record(**report_record(report, name, c, cfg.n_steps, t))
                result.check(f"{name}.moments", moments.passed)
                result.check(f"{name}.energy-test", test.passed)
                rows += points_rows(capped(batch, cfg.max_points), f"{label}-t{t}")

            if cfg.write_trajectories:
                files[f"trajectories_{label}.csv"] = trajectory.to_csv(
                    cfg.trajectory_thin, cfg.max_points or None
                )

        files["points.csv"] = format_rows_csv(rows)
        return files


class Figure3Runner(MixtureRunner):
    """
    Euler against overshoot on a toy target.

    Top panel: final clouds and their energy distance to the target for
    Euler and overshoot at each c. Bottom panel: an offset batch at a fixed
    time is pushed back toward the marginal by repeated corrections.
    """

    experiment = "figure3"

    def gate_specs(self) -> list[GateSpec]:
        return [
            GateSpec(
                name="top.overshoot-beats-euler",
                min_fraction=ORDERING_MIN_FRACTION,
                asserted=self.learned_field,
                description=f"overshoot c={TOP_PANEL_C} energy distance <= Euler's",
            ),
            GateSpec(
                name="bottom.correction-improves",
                min_fraction=BOTTOM_PANEL_MIN_FRACTION,
                description="energy distance to the marginal drops after the corrections",
            ),
        ]

    def run_seed(self, seed: int, result: SeedResult) -> dict[str, str]:
        cfg = self.config
        root = NoiseSource(seed)
        grid = TimeGrid.uniform(cfg.n_steps)
        z0 = root.spawn(Z0_STREAM).normal((cfg.n_paths, self.target.dim))
        reference = self.target.sample(cfg.n_paths, root.spawn(REFERENCE_STREAM))
        rows = points_rows(capped(reference, cfg.max_points), "target")

        distances: dict[tuple[str, float | None], float] = {}
        for name, c in self.stochastic_runs():
            final = self.sample(name, c, self.velocity, grid, z0, root).final
            report = energy_distance(final, reference)
            sliced = sliced_wasserstein(
                final, reference, cfg.n_projections, root.spawn(METRIC_STREAM)
            )
            distances[(name, c)] = float(report.value)
            for r in (report, sliced):
                result.add_record(**report_record(r, name, c, cfg.n_steps, 1.0))
            rows += points_rows(
                capped(final, cfg.max_points), name if c is None else f"{name}-c{c}"
            )

        euler = distances.get(("euler", None))
        overshoot = distances.get(("overshoot", TOP_PANEL_C))
        if euler is not None and overshoot is not None:
            result.check("top.overshoot-beats-euler", overshoot <= euler)

        rows += self._correction_panel(root, result)
        return {"points.csv": format_rows_csv(rows)}

    def _correction_panel(self, root: NoiseSource, result: SeedResult) -> list[dict[str, Any]]:
        section = self.config.correction
        t, eps = float(section["time"]), float(section["eps"])
        step_cfg = OvershootConfig(c=float(section["c"]))
        n = self.config.n_paths
        law = marginal_at(self.target, t)
        reference = law.sample(n, root.spawn(4))
        z = law.sample(n, root.spawn(5)) + float(section["offset"])
        rows = points_rows(capped(z, self.config.max_points), "correction-before")

        rng = root.spawn(6)
        distances = [energy_distance(z, reference)]
        for _ in range(int(section["applications"])):
            z = overshoot_correction(self.velocity, z, t, t + eps, step_cfg, rng)
            distances.append(energy_distance(z, reference))
        for application, report in enumerate(distances):
            result.add_record(
                **make_record(
                    "correction_energy_distance",
                    report.value,
                    sampler="correction",
                    c=step_cfg.c,
                    time=t,
                    details={"applications": application, "offset": section["offset"]},
                )
            )
        result.check(
            "bottom.correction-improves", distances[-1].value < distances[0].value
        )
        return rows + points_rows(capped(z, self.config.max_points), "correction-after")


class StepAblationRunner(MixtureRunner):
    """Final energy distance to the target over step counts and samplers."""

    experiment = "step-ablation"

    @property
    def compares(self) -> bool:
        return "overshoot" in self.config.samplers and "sde" in self.config.samplers

    def gate_specs(self) -> list[GateSpec]:
        if not self.compares:
            return []
        specs = [
            GateSpec(
                name=f"ordering.N{n}",
                min_fraction=ORDERING_MIN_FRACTION,
                asserted=self.learned_field,
                description=f"overshoot energy distance <= sde's at N={n}",
            )
            for n in ORDERING_STEP_COUNTS
            if n in self.config.step_counts
        ]
        n_max = max(self.config.step_counts)
        specs.append(
            GateSpec(
                name=f"narrowing.N{n_max}",
                min_fraction=ORDERING_MIN_FRACTION,
                description=f"distances within {NARROWING_RATIO}x of each other at N={n_max}",
            )
        )
        return specs

    def run_seed(self, seed: int, result: SeedResult) -> dict[str, str]:
        cfg = self.config
        root = NoiseSource(seed)
        z0 = root.spawn(Z0_STREAM).normal((cfg.n_paths, self.target.dim))
        reference = self.target.sample(cfg.n_paths, root.spawn(REFERENCE_STREAM))
        c = float(cfg.c_values[0])
        rows: list[dict[str, Any]] = []

        for n_steps in cfg.step_counts:
            grid = TimeGrid.uniform(n_steps)
            distances: dict[str, float] = {}
            for name in cfg.samplers:
                final = self.sample(name, c, self.velocity, grid, z0, root).final
                report = energy_distance(final, reference)
                distances[name] = float(report.value)
                result.add_record(**report_record(report, name, c, n_steps, 1.0))
                rows += points_rows(capped(final, cfg.max_points), f"{name}-N{n_steps}")

            if not self.compares:
                continue
            overshoot, sde = distances["overshoot"], distances["sde"]
            if n_steps in ORDERING_STEP_COUNTS:
                result.check(f"ordering.N{n_steps}", overshoot <= sde)
            if n_steps == max(cfg.step_counts):
                low, high = sorted((overshoot, sde))
                result.check(
                    f"narrowing.N{n_steps}", high <= NARROWING_RATIO * low
                )

        return {"points.csv": format_rows_csv(rows)}


class AmoGridRunner(ExperimentRunner):
    """
    Attention-modulated overshoot on an h x w grid state.

    Every coordinate of the target is an independent copy of a 1D mixture,
    so under common random numbers coordinates with mask 0 must match Euler
    bit for bit and coordinates with mask 1 must match scalar overshoot.
    """

    experiment = "amo-grid"

    def __init__(
        self, config: ExperimentConfig, output_manager: OutputManager | None = None
    ):
        super().__init__(config, output_manager)
        section = config.mask
        self.h, self.w = int(section["h"]), int(section["w"])
        try:
            base = load_preset(section["grid_target"])
        except InvariantViolationError as e:
            raise ConfigValidationError(f"cannot load grid target: {e}") from e
        if base.dim != 1:
            raise ConfigValidationError(
                f"grid target '{section['grid_target']}' must be one-dimensional"
            )
        self.target = FactorizedMixture(base, self.h * self.w)
        self.velocity = self.target.velocity()

    def gate_specs(self) -> list[GateSpec]:
        return [
            GateSpec("zero-mask.equals-euler", description="mask 0 reproduces Euler exactly"),
            GateSpec("unmasked.equals-euler", description="m=0 coordinates match Euler"),
            GateSpec("masked.equals-overshoot", description="m=1 coordinates match overshoot"),
            GateSpec("masked.differs", description="m=1 coordinates move off the Euler path"),
            GateSpec(
                "masked.moments",
                asserted=False,
                description="masked region moments against the target",
            ),
            GateSpec(
                "unmasked.moments",
                asserted=False,
                description="unmasked region moments against the target",
            ),
        ]

    def mask_provider(self, root: NoiseSource) -> MaskProvider:
        section = self.config.mask
        options: dict[str, Any] = {}
        if section.get("block") is not None and section["scenario"] == "focused-block":
            options["block"] = tuple(section["block"])
        threshold = section.get("binarize_threshold")
        temperature = float(section.get("temperature", 1.0))
        try:
            if section.get("per_step"):
                return PerStepMaskProvider(
                    section["scenario"],
                    self.h,
                    self.w,
                    int(section["n_tokens"]),
                    seed=root.spawn(4).seed,
                    temperature=temperature,
                    binarize_threshold=threshold,
                    **options,
                )
            inputs = synthetic_attention(
                section["scenario"],
                self.h,
                self.w,
                int(section["n_tokens"]),
                root.spawn(4),
                **options,
            )
            mask = mask_from_attention(inputs, temperature)
            if threshold is not None:
                mask = mask.binarize(threshold)
            return StaticMaskProvider(mask)
        except MaskError as e:
            raise ConfigValidationError(f"invalid mask section: {e}") from e

    def run_seed(self, seed: int, result: SeedResult) -> dict[str, str]:
        cfg = self.config
        root = NoiseSource(seed)
        grid = TimeGrid.uniform(cfg.n_steps)
        step_cfg = OvershootConfig(c=float(cfg.c_values[0]))
        z0 = root.spawn(Z0_STREAM).normal((cfg.n_paths, self.target.dim))

        provider = self.mask_provider(root)
        masks = [provider.mask_at(k, t, s) for k, t, s in grid.steps()]
        stacked = np.stack([m.flat for m in masks])
        unmasked = np.flatnonzero(np.all(stacked == 0.0, axis=0))
        masked = np.flatnonzero(np.all(stacked == 1.0, axis=0))

        euler = euler_sample(self.velocity, grid, z0)
        overshoot = overshoot_sample(
            self.velocity, grid, z0, step_cfg, root.spawn(SAMPLER_STREAM)
        )
        amo = amo_sample(
            self.velocity, grid, z0, step_cfg, provider, root.spawn(SAMPLER_STREAM)
        )
        zero = amo_sample(
            self.velocity,
            grid,
            z0,
            step_cfg,
            ConstantMaskProvider(self.h, self.w, 0.0),
            root.spawn(SAMPLER_STREAM),
        )

        self._exact("zero-mask.equals-euler", zero, euler, None, result)
        self._exact("unmasked.equals-euler", amo, euler, unmasked, result)
        self._exact("masked.equals-overshoot", amo, overshoot, masked, result)
        if masked.size and step_cfg.c > 0.0:
            differs = not np.array_equal(amo.final[:, masked], euler.final[:, masked])
            result.check("masked.differs", differs)
            result.add_record(
                **make_record(
                    "masked_differs",
                    float(differs),
                    sampler="amo",
                    c=step_cfg.c,
                    n_steps=cfg.n_steps,
                    time=1.0,
                    passed=differs,
                    details={"coordinates": int(masked.size)},
                )
            )

        for region, index in (("masked", masked), ("unmasked", unmasked)):
            if not index.size:
                continue
            law = FactorizedMixture(self.target.base, int(index.size))
            report = moment_test(
                amo.final[:, index], law, cfg.moment_threshold, covariance="diagonal"
            )
            report.details["region"] = region
            result.add_record(**report_record(report, "amo", step_cfg.c, cfg.n_steps, 1.0))
            result.check(f"{region}.moments", report.passed)

        columns = [f"x_{j}" for j in range(self.target.dim)]
        rows: list[dict[str, Any]] = []
        for label, trajectory in (("euler", euler), ("overshoot", overshoot), ("amo", amo)):
            rows += points_rows(capped(trajectory.final, cfg.max_points), label, columns)

        first: AttentionMask = masks[0]
        return {
            "points.csv": format_rows_csv(rows, ["label", "index", *columns]),
            "mask.csv": first.to_csv(),
            "mask.json": first.to_json(),
        }

    def _exact(
        self,
        gate: str,
        run: Trajectory,
        baseline: Trajectory,
        index: np.ndarray | None,
        result: SeedResult,
    ) -> None:
        if index is not None and not index.size:
            result.check(gate, None)
            return
        select: Callable[[StateBatch], StateBatch] = (
            (lambda z: z) if index is None else (lambda z: z[:, index])
        )
        equal = all(
            np.array_equal(select(a), select(b))
            for a, b in zip(run.states, baseline.states, strict=True)
        )
        result.check(gate, equal)
        result.add_record(
            **make_record(
                gate,
                float(equal),
                sampler="amo",
                n_steps=self.config.n_steps,
                passed=equal,
                details={"coordinates": None if index is None else int(index.size)},
            )
        )


class TrainRunner(ExperimentRunner):
    """Fits the MLP velocity and compares it with the exact field."""

    experiment = "train"

    def __init__(
        self, config: ExperimentConfig, output_manager: OutputManager | None = None
    ):
        super().__init__(config, output_manager)
        try:
            self.target = load_mixture(config.target)
        except InvariantViolationError as e:
            raise ConfigValidationError(f"cannot load target: {e}") from e
        section = dict(config.training)
        self.probe_half_width = float(section.pop("probe_half_width", 1.5))
        self.sup_error_gate = float(section.pop("sup_error_gate", 0.1))
        self.training = section
        try:
            self.train_config(0)
        except DomainError as e:
            raise ConfigValidationError(f"invalid training section: {e}") from e

    def train_config(self, seed: int) -> TrainConfig:
        return TrainConfig.from_dict(
            {
                **self.training,
                "hidden_sizes": tuple(self.training.get("hidden_sizes", (64, 64))),
                "seed": seed,
            }
        )

    def gate_specs(self) -> list[GateSpec]:
        return [
            GateSpec(
                "velocity.sup-error",
                description=f"sup |v_model - v_exact| <= {self.sup_error_gate} on the probes",
            ),
            GateSpec("loss.decreased", description="late training loss below early loss"),
        ]

    def probes(self, t: float, index: int, root: NoiseSource) -> StateBatch:
        """10 x 10 grid around the marginal mean in 2-D, marginal draws otherwise."""
        law = marginal_at(self.target, t)
        if self.target.dim == 2:
            return probe_grid(law.mean(), self.probe_half_width, 10)
        return law.sample(100, root.spawn(REFERENCE_STREAM).spawn(index))

    def run_seed(self, seed: int, result: SeedResult) -> dict[str, str]:
        train_cfg = self.train_config(seed)
        run_dir = self.output_manager.get_run_dir(self.experiment, seed)
        checkpoint_dir = run_dir / "snapshots" if train_cfg.checkpoint_every else None
        trained = train_with_history(self.target, train_cfg, checkpoint_dir)
        save_model(
            trained.model,
            run_dir / "model.json",
            {"target": self.config.target, "seed": seed, "train_config": train_cfg.to_dict()},
        )

        losses = trained.losses
        if losses:
            window = max(1, len(losses) // 10)
            early = float(np.mean(losses[:window]))
            late = float(np.mean(losses[-window:]))
            result.check("loss.decreased", late < early)
            result.add_record(
                **make_record(
                    "loss_window_mean",
                    late,
                    n_steps=train_cfg.n_steps,
                    passed=late < early,
                    details={"early": early, "late": late, "window": window},
                )
            )

        exact = analytic_velocity(self.target)
        root = NoiseSource(seed)
        rows: list[dict[str, Any]] = []
        sup_error = 0.0
        for index, t in enumerate(TRAIN_PROBE_TIMES):
            x = self.probes(t, index, root)
            predicted, reference = trained.model(x, t), exact(x, t)
            errors = np.linalg.norm(predicted - reference, axis=1)
            sup_error = max(sup_error, float(errors.max()))
            result.add_record(
                **make_record(
                    "velocity_sup_error",
                    float(errors.max()),
                    n_steps=train_cfg.n_steps,
                    time=t,
                    details={"mean_error": float(errors.mean()), "n_probes": len(errors)},
                )
            )
            dim = x.shape[1]
            for i in range(x.shape[0]):
                rows.append(
                    {
                        "label": f"probe-t{t}",
                        "index": i,
                        **{f"x_{j}": float(x[i, j]) for j in range(dim)},
                        **{f"v_{j}": float(predicted[i, j]) for j in range(dim)},
                        **{f"exact_{j}": float(reference[i, j]) for j in range(dim)},
                        "error": float(errors[i]),
                    }
                )
        result.check("velocity.sup-error", sup_error <= self.sup_error_gate)
        logger.info("Trained field checked", seed=seed, sup_error=sup_error)

        return {"points.csv": format_rows_csv(rows), "loss.csv": trained.loss_curve_csv()}


RUNNERS: dict[str, type[ExperimentRunner]] = {
    cls.experiment: cls
    for cls in (
        MarginalCheckRunner,
        Figure3Runner,
        StepAblationRunner,
        AmoGridRunner,
        TrainRunner,
    )
}


@trace_function("experiments.run", include_args=True)
def run_experiment(
    config: ExperimentConfig, output_manager: OutputManager | None = None
) -> ExperimentSummary:
    """Run the experiment named by ``config.experiment``."""
    runner_class = RUNNERS.get(config.experiment)
    if runner_class is None:
        raise ConfigValidationError(f"no runner for experiment '{config.experiment}'")
    return runner_class(config, output_manager).run()


def run_marginal_check(
    config: ExperimentConfig, output_manager: OutputManager | None = None
) -> ExperimentSummary:
    """Intermediate-marginal moment and energy tests for every sampler."""
    return MarginalCheckRunner(config, output_manager).run()


def run_figure3(
    config: ExperimentConfig, output_manager: OutputManager | None = None
) -> ExperimentSummary:
    """Euler vs overshoot clouds and the correction panel."""
    return Figure3Runner(config, output_manager).run()


def run_step_ablation(
    config: ExperimentConfig, output_manager: OutputManager | None = None
) -> ExperimentSummary:
    """Energy distances over step counts for overshoot and the SDE discretization."""
    return StepAblationRunner(config, output_manager).run()


def run_amo_grid(
    config: ExperimentConfig, output_manager: OutputManager | None = None
) -> ExperimentSummary:
    """Attention-modulated overshoot selectivity on a grid state."""
    return AmoGridRunner(config, output_manager).run()


def run_train(
    config: ExperimentConfig, output_manager: OutputManager | None = None
) -> ExperimentSummary:
    """Train the MLP velocity model per seed."""
    return TrainRunner(config, output_manager).run()
