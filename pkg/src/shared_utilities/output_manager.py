"""
Output directory management for experiment runs.

Lays results out as ``<outdir>/<experiment>/<seed>/<file>`` with
experiment-level summaries one directory up, writes every file atomically
and removes directories left empty by failed runs.
"""

import os
import tempfile
from pathlib import Path

from . import get_logger

logger = get_logger(__name__)


def write_atomic(path: Path, content: str) -> Path:
    """
    Write text to ``path`` through a temporary sibling and a rename.

    Readers never observe a partially written file; concurrent writers to
    different paths in the same directory do not interfere.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(
        dir=path.parent, prefix=f".{path.name}.", suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(content)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise
    return path


class OutputManager:
    """Manages the output directory structure of experiment runs."""

    def __init__(self, base_output_dir: str | Path = "output", auto_cleanup: bool = True):
        """
        Initialize the output manager.

        Args:
            base_output_dir: Base directory for all outputs (default: "output")
            auto_cleanup: Whether cleanup_active_experiments removes empty directories
        """
        self.base_dir = Path(base_output_dir)
        self.auto_cleanup = auto_cleanup
        self._active_experiments: set[str] = set()

    def get_run_dir(
        self, experiment: str, seed: int | None = None, create_dirs: bool = True
    ) -> Path:
        """
        Directory for one seed of an experiment, or the experiment root.

        Args:
            experiment: Experiment name (e.g., "figure3")
            seed: Seed whose lineage owns the directory; None for summaries
            create_dirs: Whether to create the directory

        Returns:
            Path of the run directory
        """
        run_dir = self.base_dir / experiment
        if seed is not None:
            run_dir = run_dir / str(seed)

        if create_dirs:
            run_dir.mkdir(parents=True, exist_ok=True)
            logger.debug("Run directory ready", experiment=experiment, seed=seed)

        self._active_experiments.add(experiment)
        return run_dir

    def get_output_path(
        self,
        experiment: str,
        seed: int | None,
        filename: str,
        create_dirs: bool = True,
    ) -> Path:
        """Full path of an output file inside a run directory."""
        return self.get_run_dir(experiment, seed, create_dirs) / filename

    def save_output(
        self,
        content: str,
        experiment: str,
        seed: int | None,
        filename: str,
    ) -> Path:
        """
        Atomically save content to its place in the run layout.

        Args:
            content: Text to write
            experiment: Experiment name
            seed: Seed directory, or None for experiment-level files
            filename: Output filename

        Returns:
            Path to the saved file
        """
        output_path = self.get_output_path(experiment, seed, filename)
        write_atomic(output_path, content)
        logger.info(
            "Saved output",
            path=str(output_path),
            experiment=experiment,
            seed=seed,
            size=len(content),
        )
        return output_path

    def get_existing_outputs(self, experiment: str, seed: int | None = None) -> list[Path]:
        """List files already written for an experiment (optionally one seed)."""
        root = self.base_dir / experiment
        if seed is not None:
            root = root / str(seed)
        if not root.exists():
            return []
        return sorted(p for p in root.rglob("*") if p.is_file())

    def cleanup_empty_directories(self, experiment: str | None = None) -> int:
        """
        Remove empty directories in the output structure.

        Args:
            experiment: If given, only clean below this experiment

        Returns:
            Number of directories removed
        """
        start_path = self.base_dir / experiment if experiment else self.base_dir
        if not start_path.exists():
            return 0

        removed_count = 0
        for dirpath, dirnames, filenames in os.walk(start_path, topdown=False):
            dir_path = Path(dirpath)
            if dir_path == self.base_dir:
                continue
            if not filenames and not any((dir_path / d).exists() for d in dirnames):
                try:
                    dir_path.rmdir()
                    removed_count += 1
                except OSError as e:
                    logger.warning(f"Failed to remove directory {dir_path}: {e}")

        if removed_count:
            logger.info(
                f"Cleaned up {removed_count} empty directories", experiment=experiment
            )
        return removed_count

    def cleanup_active_experiments(self) -> int:
        """Clean up empty directories for every experiment touched this session."""
        if not self.auto_cleanup:
            return 0

        total_removed = sum(
            self.cleanup_empty_directories(name) for name in self._active_experiments
        )
        self._active_experiments.clear()
        return total_removed
