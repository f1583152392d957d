"""
Command-line entry point: one subcommand per experiment.

Exit codes: 0 when every asserted gate passed, 1 on failed gates or a run
error, 2 on an invalid configuration, 130 when interrupted.
"""

import sys
from pathlib import Path

import click
from dotenv import load_dotenv

from ..analytic_models.presets import describe_preset, list_presets
from ..rf_core.errors import ConfigValidationError, RectifiedFlowError
from ..samplers import DEFAULT_STEPS, OVERSHOOT_STRENGTH_PRESETS, OvershootConfig, SamplerFactory
from ..shared_utilities import get_logger
from ..shared_utilities.cli_base import ClickCommand, apply_verbosity
from ..shared_utilities.logging_config import SERVICE_VERSION
from ..shared_utilities.output_manager import OutputManager
from ..shared_utilities.telemetry import trace_function
from .config import resolve_config
from .core import run_experiment
from .data_models import ExperimentSummary

# Load environment variables from .env file
load_dotenv()

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_INTERRUPTED = 130


def print_summary(summary: ExperimentSummary, outdir: str) -> None:
    """Gate table on stdout."""
    click.echo(f"{summary.experiment}: seeds {summary.seeds}")
    for gate in summary.gates:
        if gate.passed is None:
            status = "n/a "
        else:
            status = "PASS" if gate.passed else "FAIL"
        note = "" if gate.asserted else "  (reported only)"
        click.echo(f"  [{status}] {gate.name} {gate.n_passed}/{gate.n_evaluated}{note}")
    click.echo(f"Results written to {Path(outdir) / summary.experiment}")
    click.echo("All asserted gates passed" if summary.passed else "Some asserted gates failed")


@trace_function("experiments.cli", include_args=True)
def execute(
    experiment: str,
    config_path: Path | None,
    seed: int | None,
    outdir: Path | None,
    overrides: tuple[str, ...],
    verbose: bool,
    quiet: bool,
) -> int:
    """Resolve the config, run the experiment and map the outcome to an exit code."""
    apply_verbosity(verbose, quiet)
    output_manager: OutputManager | None = None
    try:
        config = resolve_config(experiment, config_path, overrides, seed, outdir)
        output_manager = OutputManager(config.outdir)
        summary = run_experiment(config, output_manager)
        print_summary(summary, config.outdir)
        return EXIT_OK if summary.passed else EXIT_FAILED
    except ConfigValidationError as e:
        click.echo(f"Error: {e}", err=True)
        return EXIT_CONFIG
    except KeyboardInterrupt:
        logger.info("Run cancelled by user")
        return EXIT_INTERRUPTED
    except RectifiedFlowError as e:
        logger.error(f"Experiment {experiment} failed: {e}")
        click.echo(f"Error: {e}", err=True)
        return EXIT_FAILED
    finally:
        # Remove directories left empty by failed runs
        if output_manager is not None:
            output_manager.cleanup_active_experiments()


def experiment_command(name: str, summary: str):
    """Build the click subcommand running experiment ``name``."""

    @click.command(name=name, help=summary)
    @ClickCommand.add_experiment_options()
    @ClickCommand.add_common_options()
    def command(
        config_path: Path | None,
        seed: int | None,
        outdir: Path | None,
        overrides: tuple[str, ...],
        verbose: bool,
        quiet: bool,
    ) -> None:
        sys.exit(execute(name, config_path, seed, outdir, overrides, verbose, quiet))

    return command


@click.group()
@click.version_option(SERVICE_VERSION, prog_name="rf-overshoot")
def cli() -> None:
    """
    Overshoot sampler experiments on rectified flows with closed-form targets.

    Examples:

        # Intermediate-marginal checks with the shipped config
        rf-overshoot marginal-check --config configs/marginal-check.json

        # One seed of the Euler vs overshoot comparison, c = 2 only
        rf-overshoot figure3 --seed 3 --override 'c_values=[2.0]'

        # Replay a previous run
        rf-overshoot figure3 --config output/figure3/3/manifest.json --outdir replay
    """


COMMANDS = {
    "marginal-check": "Moment and energy tests against the exact intermediate marginals.",
    "figure3": "Euler vs overshoot clouds and repeated corrections at a fixed time.",
    "step-ablation": "Energy distance to the target over step counts, overshoot vs SDE.",
    "amo-grid": "Attention-modulated overshoot selectivity on a grid state.",
    "train": "Train the MLP velocity model and check it against the exact field.",
}

for _name, _help in COMMANDS.items():
    cli.add_command(experiment_command(_name, _help))


@cli.command(name="presets")
def presets_command() -> None:
    """List the shipped target presets."""
    for name in list_presets():
        click.echo(f"{name:18s} {describe_preset(name)}")


@cli.command(name="samplers")
def samplers_command() -> None:
    """List the registered samplers and the per-model overshoot strengths."""
    for name in SamplerFactory().get_available_samplers():
        click.echo(name)
    click.echo(f"Strength presets ({DEFAULT_STEPS} steps):")
    for model in sorted(OVERSHOOT_STRENGTH_PRESETS):
        click.echo(f"  {model:10s} c={OvershootConfig.for_model(model).c:g}")


def main() -> None:
    """Console-script entry point."""
    cli()


if __name__ == "__main__":
    main()
