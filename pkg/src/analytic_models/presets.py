"""
Named target presets shipped with the package.
"""

import json
from functools import lru_cache
from pathlib import Path
from typing import Any

from ..rf_core.errors import InvariantViolationError
from ..shared_utilities import get_logger
from .fitting import fit_from_recipe
from .mixture import GaussianMixture

logger = get_logger(__name__)

PRESETS_FILE = Path(__file__).parent / "presets.json"


@lru_cache(maxsize=1)
def _load_documents() -> dict[str, dict[str, Any]]:
    with open(PRESETS_FILE) as f:
        return json.load(f)


def list_presets() -> list[str]:
    """Names of the shipped presets."""
    return sorted(_load_documents())


def describe_preset(name: str) -> str:
    """One-line description of a preset."""
    return _document(name).get("description", "")


def _document(name: str) -> dict[str, Any]:
    documents = _load_documents()
    if name not in documents:
        raise InvariantViolationError(
            f"unknown preset '{name}', available: {', '.join(sorted(documents))}"
        )
    return documents[name]


@lru_cache(maxsize=None)
def load_preset(name: str) -> GaussianMixture:
    """
    Build a preset mixture by name.

    Fitted presets are fitted on first use and cached for the process.
    """
    document = _document(name)
    if "fit" in document:
        logger.info("Fitting preset", preset=name, **document["fit"])
        return fit_from_recipe(document["fit"])
    return GaussianMixture.from_dict(document)


def load_mixture(path_or_name: str | Path) -> GaussianMixture:
    """
    Load a mixture from a JSON document or a preset name.

    A string that names a shipped preset wins over a file of the same name.
    """
    if isinstance(path_or_name, str) and path_or_name in _load_documents():
        return load_preset(path_or_name)

    path = Path(path_or_name)
    if not path.exists():
        raise InvariantViolationError(f"no preset or mixture file named '{path_or_name}'")
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise InvariantViolationError(f"invalid mixture document {path}: {e}") from e
    return GaussianMixture.from_dict(data)
