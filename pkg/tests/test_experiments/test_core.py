"""
Tests for the experiment runners on small configurations.
"""

import hashlib
import json
from pathlib import Path
from unittest.mock import patch

import pytest

from src.experiments.config import resolve_config
from src.experiments.core import (
    Figure3Runner,
    build_manifest,
    run_amo_grid,
    run_experiment,
    run_figure3,
    run_marginal_check,
    run_step_ablation,
    run_train,
)
from src.rf_core.errors import ConfigValidationError, MetricError
from src.velocity_train.trainer import load_model

TINY_FIGURE3 = [
    "n_paths=64",
    "n_steps=5",
    "c_values=[1.0]",
    "correction.applications=2",
    "n_projections=4",
]


def _records(path):
    return [json.loads(line) for line in path.read_text().splitlines()]


@pytest.fixture
def marginal_run(tmp_path):
    """Euler and overshoot with c = 0 on a coarse grid."""
    config = resolve_config(
        "marginal-check",
        overrides=[
            "n_paths=200",
            "n_steps=10",
            "check_times=[0.5]",
            'samplers=["euler", "overshoot"]',
            "c_values=[0.0]",
            "write_trajectories=true",
            "trajectory_thin=5",
            "max_points=20",
        ],
        seed=0,
        outdir=tmp_path,
    )
    return tmp_path, run_marginal_check(config)


class TestOutputLayout:
    """Files written per seed and per experiment."""

    def test_seed_files(self, marginal_run):
        """Each seed directory holds results, points and a manifest."""
        outdir, _ = marginal_run
        seed_dir = outdir / "marginal-check" / "0"
        for name in ("results.jsonl", "points.csv", "manifest.json"):
            assert (seed_dir / name).is_file()
        assert (seed_dir / "trajectories_euler.csv").is_file()
        assert (seed_dir / "trajectories_overshoot-c0.0.csv").is_file()

    def test_experiment_files(self, marginal_run):
        """Summaries live one level up."""
        outdir, summary = marginal_run
        root = outdir / "marginal-check"
        for name in ("summary.csv", "summary.json", "metrics.csv"):
            assert (root / name).is_file()
        lines = (root / "summary.csv").read_text().splitlines()
        assert lines[0] == "gate,passed,asserted,n_passed,n_evaluated,fraction,min_fraction"
        assert len(lines) == 1 + len(summary.gates)

    def test_manifest(self, marginal_run):
        """The manifest echoes the config and hashes every output."""
        outdir, _ = marginal_run
        seed_dir = outdir / "marginal-check" / "0"
        manifest = json.loads((seed_dir / "manifest.json").read_text())
        assert manifest["seed"] == 0
        assert manifest["resolved_config"]["seeds"] == [0]
        assert manifest["resolved_config"]["n_paths"] == 200
        assert "numpy" in manifest["software"]
        assert manifest["wall_time_seconds"] >= 0.0
        assert "manifest.json" not in manifest["outputs"]
        for name, digest in manifest["outputs"].items():
            assert hashlib.sha256((seed_dir / name).read_bytes()).hexdigest() == digest

    def test_points_capped(self, marginal_run):
        """Each labelled cloud keeps at most max_points rows."""
        outdir, _ = marginal_run
        lines = (outdir / "marginal-check" / "0" / "points.csv").read_text().splitlines()
        assert lines[0] == "label,index,x_0,x_1"
        labels = [line.split(",")[0] for line in lines[1:]]
        assert labels.count("euler-t0.5") == 20
        assert labels.count("overshoot-c0.0-t0.5") == 20
        assert labels.count("reference-t0.5") == 20


class TestMarginalCheck:
    """Intermediate marginal reports."""

    def test_zero_strength_reports_equal_euler(self, marginal_run):
        """c = 0 produces the same metric values as Euler."""
        outdir, _ = marginal_run
        records = _records(outdir / "marginal-check" / "0" / "results.jsonl")
        euler = {r["metric"]: r for r in records if r["sampler"] == "euler"}
        overshoot = {r["metric"]: r for r in records if r["sampler"] == "overshoot"}
        assert set(euler) == {"moment_test", "energy_test", "energy_distance"}
        for metric, record in euler.items():
            assert overshoot[metric]["value"] == record["value"]
            assert overshoot[metric]["passed"] == record["passed"]

    def test_gate_names(self, marginal_run):
        """Two gates per sampler, asserted for the marginal-exact samplers."""
        _, summary = marginal_run
        names = {gate.name: gate.asserted for gate in summary.gates}
        assert names == {
            "euler.moments": True,
            "euler.energy-test": True,
            "overshoot.moments": True,
            "overshoot.energy-test": True,
        }

    def test_uncompensated_gates_are_reported_only(self, tmp_path):
        """The ablation without noise compensation never fails the run by itself."""
        config = resolve_config(
            "marginal-check",
            overrides=[
                "n_paths=100",
                "n_steps=10",
                "check_times=[0.5]",
                'samplers=["overshoot-no-compensation"]',
            ],
            seed=1,
            outdir=tmp_path,
        )
        summary = run_marginal_check(config)
        assert all(not gate.asserted for gate in summary.gates)
        assert summary.passed


class TestFigure3:
    """Top and bottom panels."""

    def test_panels(self, tmp_path):
        """Both gates are evaluated on every seed."""
        config = resolve_config(
            "figure3", overrides=[*TINY_FIGURE3, "seeds=[0, 1]"], outdir=tmp_path
        )
        summary = run_figure3(config)
        gates = {gate.name: gate for gate in summary.gates}
        assert gates["top.overshoot-beats-euler"].n_evaluated == 2
        assert gates["bottom.correction-improves"].n_evaluated == 2

        records = _records(tmp_path / "figure3" / "1" / "results.jsonl")
        corrections = [r for r in records if r["metric"] == "correction_energy_distance"]
        assert [r["details"]["applications"] for r in corrections] == [0, 1, 2]
        labels = {
            line.split(",")[0]
            for line in (tmp_path / "figure3" / "1" / "points.csv").read_text().splitlines()[1:]
        }
        assert labels == {
            "target",
            "euler",
            "overshoot-c1.0",
            "correction-before",
            "correction-after",
        }

    def test_top_gate_reported_only_for_exact_field(self, tmp_path):
        """With the analytic field only the correction gate sets the exit code."""
        config = resolve_config("figure3", overrides=TINY_FIGURE3, seed=0, outdir=tmp_path)
        gates = {gate.name: gate for gate in run_figure3(config).gates}
        assert gates["top.overshoot-beats-euler"].asserted is False
        assert gates["bottom.correction-improves"].asserted is True

    def test_top_gate_needs_unit_strength(self, tmp_path):
        """Without c = 1 the top gate is not evaluated."""
        config = resolve_config(
            "figure3", overrides=[*TINY_FIGURE3, "c_values=[2.0]"], seed=0, outdir=tmp_path
        )
        gates = {gate.name: gate for gate in run_figure3(config).gates}
        assert gates["top.overshoot-beats-euler"].passed is None

    def test_thread_count_does_not_change_results(self, tmp_path):
        """Outputs depend on (config, seed) only."""
        contents = []
        for threads in ("1", "3"):
            outdir = tmp_path / threads
            config = resolve_config(
                "figure3", overrides=[*TINY_FIGURE3, "seeds=[0, 1, 2]"], outdir=outdir
            )
            with patch.dict("os.environ", {"RF_OVERSHOOT_THREADS": threads}):
                run_figure3(config)
            contents.append(
                [(outdir / "figure3" / str(s) / "points.csv").read_bytes() for s in range(3)]
            )
        assert contents[0] == contents[1]

    def test_manifest_replay_is_byte_identical(self, tmp_path):
        """Re-running from a manifest reproduces the CSV and JSONL outputs."""
        config = resolve_config("figure3", overrides=TINY_FIGURE3, seed=4, outdir=tmp_path / "a")
        run_figure3(config)
        manifest = tmp_path / "a" / "figure3" / "4" / "manifest.json"

        replay = resolve_config("figure3", manifest, outdir=tmp_path / "b")
        run_figure3(replay)
        for name in ("points.csv", "results.jsonl"):
            original = (tmp_path / "a" / "figure3" / "4" / name).read_bytes()
            assert (tmp_path / "b" / "figure3" / "4" / name).read_bytes() == original

    def test_runner_rejects_other_experiment(self, tmp_path):
        """A runner only accepts configs for its own experiment."""
        with pytest.raises(ConfigValidationError, match="runs 'figure3'"):
            Figure3Runner(resolve_config("step-ablation", outdir=tmp_path))

    def test_seed_failure_propagates(self, tmp_path):
        """Errors inside a seed surface from run()."""
        config = resolve_config("figure3", overrides=TINY_FIGURE3, seed=0, outdir=tmp_path)
        with patch.object(Figure3Runner, "run_seed", side_effect=MetricError("empty batch")):
            with pytest.raises(MetricError, match="empty batch"):
                run_experiment(config)


class TestStepAblation:
    """Step-count grid over overshoot and the SDE discretization."""

    def test_gates(self, tmp_path):
        """Ordering gates at 10 and 20 steps, narrowing at the largest count."""
        config = resolve_config(
            "step-ablation",
            overrides=["n_paths=64", "step_counts=[10, 20]", "seeds=[0, 1]"],
            outdir=tmp_path,
        )
        summary = run_step_ablation(config)
        assert [gate.name for gate in summary.gates] == [
            "ordering.N10",
            "ordering.N20",
            "narrowing.N20",
        ]
        assert all(gate.n_evaluated == 2 for gate in summary.gates)
        assert [gate.asserted for gate in summary.gates] == [False, False, True]
        records = _records(tmp_path / "step-ablation" / "0" / "results.jsonl")
        assert {(r["sampler"], r["n_steps"]) for r in records} == {
            ("overshoot", 10),
            ("sde", 10),
            ("overshoot", 20),
            ("sde", 20),
        }

    def test_single_sampler_has_no_gates(self, tmp_path):
        """A single sampler emits its table without comparisons."""
        config = resolve_config(
            "step-ablation",
            overrides=["n_paths=64", "step_counts=[10]", 'samplers=["overshoot"]'],
            seed=0,
            outdir=tmp_path,
        )
        summary = run_step_ablation(config)
        assert summary.gates == []
        assert summary.passed
        lines = (tmp_path / "step-ablation" / "metrics.csv").read_text().splitlines()
        assert len(lines) == 2


class TestAmoGrid:
    """Selectivity of the attention-modulated sampler."""

    def test_static_mask_selectivity(self, tmp_path):
        """Exact-equality gates hold under common random numbers."""
        config = resolve_config(
            "amo-grid", overrides=["n_paths=40", "n_steps=5"], seed=0, outdir=tmp_path
        )
        summary = run_amo_grid(config)
        gates = {gate.name: gate for gate in summary.gates}
        for name in (
            "zero-mask.equals-euler",
            "unmasked.equals-euler",
            "masked.equals-overshoot",
            "masked.differs",
        ):
            assert gates[name].passed is True, name
        assert not gates["masked.moments"].asserted
        seed_dir = tmp_path / "amo-grid" / "0"
        assert (seed_dir / "mask.csv").read_text().splitlines()[0] == "row,col,value"
        header = (seed_dir / "points.csv").read_text().splitlines()[0].split(",")
        assert header[:3] == ["label", "index", "x_0"]
        assert len(header) == 2 + 64

    def test_per_step_mask(self, tmp_path):
        """Per-step masks complete and still reduce to Euler when zeroed."""
        config = resolve_config(
            "amo-grid",
            overrides=["n_paths=20", "n_steps=4", "mask.per_step=true"],
            seed=2,
            outdir=tmp_path,
        )
        gates = {gate.name: gate for gate in run_amo_grid(config).gates}
        assert gates["zero-mask.equals-euler"].passed is True
        assert (tmp_path / "amo-grid" / "2" / "mask.json").is_file()

    def test_grid_target_must_be_1d(self, tmp_path):
        """The grid target is a 1D preset."""
        config = resolve_config(
            "amo-grid", overrides=["mask.grid_target=two-modes"], outdir=tmp_path
        )
        with pytest.raises(ConfigValidationError, match="one-dimensional"):
            run_amo_grid(config)


class TestTrain:
    """Training runs and trained-field reuse."""

    @pytest.fixture
    def trained_dir(self, tmp_path):
        config = resolve_config(
            "train",
            overrides=[
                "training.n_steps=20",
                "training.batch_size=32",
                "training.hidden_sizes=[8]",
                "training.checkpoint_every=10",
                "training.log_every=10",
            ],
            seed=0,
            outdir=tmp_path,
        )
        summary = run_train(config)
        assert {gate.name for gate in summary.gates} == {
            "velocity.sup-error",
            "loss.decreased",
        }
        return tmp_path / "train" / "0"

    def test_outputs(self, trained_dir):
        """Model, loss curve, snapshots and their hashes are written."""
        assert load_model(trained_dir / "model.json").dim == 2
        assert len((trained_dir / "loss.csv").read_text().splitlines()) == 21
        assert (trained_dir / "snapshots" / "model_step000010.json").is_file()
        assert (trained_dir / "snapshots" / "model_step000020.json").is_file()
        manifest = json.loads((trained_dir / "manifest.json").read_text())
        assert "snapshots/model_step000020.json" in manifest["outputs"]
        assert "model.json" in manifest["outputs"]

    def test_probe_rows(self, trained_dir):
        """Probe rows cover the 10 x 10 grid at three times."""
        lines = (trained_dir / "points.csv").read_text().splitlines()
        assert lines[0] == "label,index,x_0,x_1,v_0,v_1,exact_0,exact_1,error"
        assert len(lines) == 1 + 3 * 100

    def test_trained_velocity_drives_samplers(self, trained_dir, tmp_path):
        """Other experiments accept a model.json as their velocity."""
        config = resolve_config(
            "figure3",
            overrides=[
                *TINY_FIGURE3,
                "target=shifted-gaussian",
                f"velocity={trained_dir / 'model.json'}",
            ],
            seed=0,
            outdir=tmp_path / "reuse",
        )
        run_figure3(config)
        assert (tmp_path / "reuse" / "figure3" / "0" / "points.csv").is_file()

    def test_trained_field_asserts_ordering_gates(self, trained_dir, tmp_path):
        """Ordering gates count toward the exit code for a learned field."""
        velocity = f"velocity={trained_dir / 'model.json'}"
        figure3 = resolve_config(
            "figure3", overrides=[*TINY_FIGURE3, velocity], seed=0, outdir=tmp_path / "f3"
        )
        gates = {gate.name: gate.asserted for gate in run_figure3(figure3).gates}
        assert gates["top.overshoot-beats-euler"] is True

        ablation = resolve_config(
            "step-ablation",
            overrides=["n_paths=32", "step_counts=[10, 20]", velocity],
            seed=0,
            outdir=tmp_path / "ablation",
        )
        gates = {gate.name: gate.asserted for gate in run_step_ablation(ablation).gates}
        assert gates == {"ordering.N10": True, "ordering.N20": True, "narrowing.N20": True}

    def test_dimension_mismatch(self, trained_dir, tmp_path):
        """A 2-D model cannot drive a 1-D target."""
        config = resolve_config(
            "figure3",
            overrides=[
                *TINY_FIGURE3,
                "target=bimodal-1d",
                f"velocity={trained_dir / 'model.json'}",
            ],
            seed=0,
            outdir=tmp_path / "reuse",
        )
        with pytest.raises(ConfigValidationError, match="dimension"):
            run_figure3(config)

    def test_zero_steps(self, tmp_path):
        """An untrained model is still checked; the loss gate is inconclusive."""
        config = resolve_config(
            "train", overrides=["training.log_every=1", "training.n_steps=0"], outdir=tmp_path
        )
        summary = run_train(config)
        assert {gate.name: gate.passed for gate in summary.gates}["loss.decreased"] is None


class TestManifest:
    """Manifest contents."""

    def test_build_manifest(self):
        """resolved_config holds the single seed."""
        config = resolve_config("figure3", overrides=["seeds=[0, 1, 2]"])
        manifest = build_manifest(config, 1, {"points.csv": "abc"}, 1.5)
        assert manifest["resolved_config"]["seeds"] == [1]
        assert manifest["outputs"] == {"points.csv": "abc"}
        assert manifest["experiment"] == "figure3"
        assert manifest["software"]["python"]


CONFIG_DIR = Path(__file__).resolve().parents[2] / "configs"


@pytest.mark.slow
class TestShippedConfigs:
    """The example configs pass their asserted gates over all ten seeds."""

    @pytest.mark.parametrize(
        ("experiment", "asserted_gates"),
        [
            ("figure3", {"bottom.correction-improves"}),
            ("step-ablation", {"narrowing.N100"}),
        ],
    )
    def test_config_passes(self, tmp_path, experiment, asserted_gates):
        """Every asserted gate passes; ordering gates are reported alongside."""
        config = resolve_config(experiment, CONFIG_DIR / f"{experiment}.json", outdir=tmp_path)
        assert config.seeds == list(range(10))

        summary = run_experiment(config)
        assert summary.passed, summary.failed_gates
        assert {gate.name for gate in summary.gates if gate.asserted} == asserted_gates
        assert all(gate.n_evaluated == 10 for gate in summary.gates)
