"""
Tests for the rf-overshoot command line.
"""

from unittest.mock import patch

import pytest
from click.testing import CliRunner

from src.experiments.data_models import ExperimentSummary, GateOutcome
from src.experiments.main import COMMANDS, cli
from src.rf_core.errors import MetricError

TINY = [
    "--override",
    "n_paths=32",
    "--override",
    "n_steps=4",
    "--override",
    "c_values=[1.0]",
    "--override",
    "correction.applications=1",
    "--override",
    "n_projections=4",
]


def _summary(passed):
    gate = GateOutcome(
        name="top.overshoot-beats-euler",
        passed=passed,
        asserted=True,
        n_passed=int(bool(passed)),
        n_evaluated=1,
        min_fraction=0.7,
    )
    return ExperimentSummary(experiment="figure3", seeds=[0], gates=[gate])


@pytest.fixture
def runner():
    with patch("src.experiments.main.apply_verbosity"):
        yield CliRunner()


class TestCommands:
    """Command discovery."""

    def test_help_lists_experiments(self, runner):
        """Every experiment has a subcommand."""
        result = runner.invoke(cli, ["--help"])
        assert result.exit_code == 0
        for name in COMMANDS:
            assert name in result.output

    def test_presets(self, runner):
        """The presets command lists the shipped targets."""
        result = runner.invoke(cli, ["presets"])
        assert result.exit_code == 0
        assert "two-modes" in result.output
        assert "bimodal-1d" in result.output

    def test_samplers(self, runner):
        """The samplers command lists the registry and the strength presets."""
        result = runner.invoke(cli, ["samplers"])
        assert result.exit_code == 0
        lines = result.output.splitlines()
        for name in ("euler", "overshoot", "sde", "multistep", "amo"):
            assert name in lines
        assert "Strength presets (100 steps):" in lines
        assert "  flux       c=2" in lines
        assert "  sd3        c=1" in lines

    def test_version(self, runner):
        """--version prints the package version."""
        result = runner.invoke(cli, ["--version"])
        assert result.exit_code == 0
        assert "rf-overshoot" in result.output


class TestExitCodes:
    """Outcome to exit status mapping."""

    def test_passing_run(self, runner, tmp_path):
        """All asserted gates passing exits 0."""
        with patch("src.experiments.main.run_experiment", return_value=_summary(True)):
            result = runner.invoke(cli, ["figure3", "--outdir", str(tmp_path)])
        assert result.exit_code == 0
        assert "[PASS] top.overshoot-beats-euler" in result.output

    def test_failed_gate(self, runner, tmp_path):
        """A failed asserted gate exits 1."""
        with patch("src.experiments.main.run_experiment", return_value=_summary(False)):
            result = runner.invoke(cli, ["figure3", "--outdir", str(tmp_path)])
        assert result.exit_code == 1
        assert "[FAIL]" in result.output

    def test_config_error(self, runner, tmp_path):
        """Invalid overrides exit 2 before anything runs."""
        with patch("src.experiments.main.run_experiment") as run:
            result = runner.invoke(
                cli, ["figure3", "--outdir", str(tmp_path), "--override", "n_steps=ten"]
            )
        assert result.exit_code == 2
        assert "Error" in result.output
        run.assert_not_called()

    def test_missing_config_file(self, runner, tmp_path):
        """click rejects a --config path that does not exist."""
        result = runner.invoke(cli, ["figure3", "--config", str(tmp_path / "missing.json")])
        assert result.exit_code == 2

    def test_interrupted(self, runner, tmp_path):
        """Ctrl-C exits 130."""
        with patch("src.experiments.main.run_experiment", side_effect=KeyboardInterrupt):
            result = runner.invoke(cli, ["figure3", "--outdir", str(tmp_path)])
        assert result.exit_code == 130

    def test_run_error(self, runner, tmp_path):
        """Numerical failures inside a run exit 1 with a message."""
        with patch(
            "src.experiments.main.run_experiment", side_effect=MetricError("empty batch")
        ):
            result = runner.invoke(cli, ["figure3", "--outdir", str(tmp_path)])
        assert result.exit_code == 1
        assert "empty batch" in result.output


class TestEndToEnd:
    """Small real runs through the command line."""

    def test_replay_from_manifest(self, runner, tmp_path):
        """A manifest passed as --config reproduces the seed's points."""
        first = runner.invoke(
            cli, ["figure3", "--seed", "2", "--outdir", str(tmp_path / "a"), *TINY]
        )
        assert first.exit_code in (0, 1), first.output
        seed_dir = tmp_path / "a" / "figure3" / "2"
        assert (seed_dir / "manifest.json").is_file()

        second = runner.invoke(
            cli,
            [
                "figure3",
                "--config",
                str(seed_dir / "manifest.json"),
                "--outdir",
                str(tmp_path / "b"),
            ],
        )
        assert second.exit_code == first.exit_code, second.output
        replayed = tmp_path / "b" / "figure3" / "2" / "points.csv"
        assert replayed.read_bytes() == (seed_dir / "points.csv").read_bytes()
