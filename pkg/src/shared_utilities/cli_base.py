"""
Shared click options so every experiment subcommand accepts the same flags.
"""

from pathlib import Path

import click

from .logging_config import configure_logging


class ClickCommand:
    """
    Helpers for building consistent click commands.

    Options are added in reverse order because decorators apply bottom-up.
    """

    @staticmethod
    def add_common_options(exclude: list[str] | None = None):
        """Decorator adding logging verbosity flags."""
        exclude = exclude or []

        def decorator(func):
            if "verbose" not in exclude:
                func = click.option(
                    "-v", "--verbose", is_flag=True, help="Enable verbose logging"
                )(func)

            if "quiet" not in exclude:
                func = click.option(
                    "-q", "--quiet", is_flag=True, help="Only log warnings and errors"
                )(func)

            return func

        return decorator

    @staticmethod
    def add_experiment_options(exclude: list[str] | None = None):
        """Decorator adding --config/--seed/--outdir/--override."""
        exclude = exclude or []

        def decorator(func):
            if "override" not in exclude:
                func = click.option(
                    "--override",
                    "overrides",
                    multiple=True,
                    metavar="KEY=VALUE",
                    help="Override a config entry (dotted keys, JSON values); repeatable",
                )(func)

            if "outdir" not in exclude:
                func = click.option(
                    "--outdir",
                    type=click.Path(file_okay=False, path_type=Path),
                    help="Output root (overrides the config's outdir)",
                )(func)

            if "seed" not in exclude:
                func = click.option(
                    "--seed",
                    type=int,
                    help="Run a single seed instead of the config's seed list",
                )(func)

            if "config" not in exclude:
                func = click.option(
                    "--config",
                    "config_path",
                    type=click.Path(exists=True, dir_okay=False, path_type=Path),
                    help="Experiment config (JSON/YAML) or a previous manifest.json",
                )(func)

            return func

        return decorator


def apply_verbosity(verbose: bool, quiet: bool) -> None:
    """Reconfigure logging for --verbose/--quiet."""
    if verbose:
        configure_logging(level="DEBUG", force=True)
    elif quiet:
        configure_logging(level="WARNING", force=True)
    else:
        configure_logging()
