"""
Result serialization shared by the experiment runners.

Every format is deterministic: floats are written with ``repr`` (shortest
round-trip form) and JSON keys are sorted, so reruns with the same seeds
produce byte-identical files.
"""

import csv
import io
import json
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import asdict, is_dataclass
from typing import Any

import numpy as np
import yaml


class OutputFormat:
    """Supported output formats."""

    JSON = "json"
    JSONL = "jsonl"
    CSV = "csv"
    YAML = "yaml"


def to_builtin(value: Any) -> Any:
    """Convert numpy scalars/arrays and dataclasses into JSON-ready builtins."""
    if is_dataclass(value) and not isinstance(value, type):
        return to_builtin(asdict(value))
    if isinstance(value, Mapping):
        return {str(k): to_builtin(v) for k, v in value.items()}
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, list | tuple):
        return [to_builtin(v) for v in value]
    return value


def format_cell(value: Any) -> str:
    """Render one CSV cell."""
    if value is None:
        return ""
    if isinstance(value, bool | np.bool_):
        return "true" if value else "false"
    if isinstance(value, int | np.integer):
        return str(int(value))
    if isinstance(value, float | np.floating):
        return repr(float(value))
    return str(value)


class ResultFormatter:
    """Formats experiment records into the supported file formats."""

    def __init__(self):
        """Initialize the formatter with its format handlers."""
        self._format_handlers = {
            OutputFormat.JSON: self._format_json,
            OutputFormat.JSONL: self._format_jsonl,
            OutputFormat.CSV: self._format_csv,
            OutputFormat.YAML: self._format_yaml,
        }

    def format(self, data: Any, format_type: str = OutputFormat.JSON, **kwargs) -> str:
        """
        Format data according to the specified format type.

        Args:
            data: Mapping (json/yaml), records (jsonl/csv)
            format_type: One of OutputFormat
            **kwargs: Format-specific options (``fieldnames`` for csv)

        Returns:
            Formatted text
        """
        handler = self._format_handlers.get(format_type)
        if not handler:
            raise ValueError(f"Unsupported format type: {format_type}")
        return handler(data, **kwargs)

    def _format_json(self, data: Any, **kwargs) -> str:
        """Canonical JSON document."""
        indent = kwargs.get("indent", 2)
        return json.dumps(to_builtin(data), indent=indent, sort_keys=True) + "\n"

    def _format_jsonl(self, records: Iterable[Any], **kwargs) -> str:
        """One canonical JSON object per line."""
        lines = [
            json.dumps(to_builtin(record), sort_keys=True, separators=(",", ":"))
            for record in records
        ]
        return "".join(f"{line}\n" for line in lines)

    def _format_csv(self, rows: Sequence[Mapping[str, Any]], **kwargs) -> str:
        """CSV with an explicit column order."""
        fieldnames: list[str] | None = kwargs.get("fieldnames")
        if fieldnames is None:
            fieldnames = list(rows[0].keys()) if rows else []

        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([format_cell(row.get(name)) for name in fieldnames])
        return buffer.getvalue()

    def _format_yaml(self, data: Any, **kwargs) -> str:
        """YAML document (used to echo configs for humans)."""
        return yaml.safe_dump(to_builtin(data), default_flow_style=False, sort_keys=True)


def format_rows_csv(
    rows: Sequence[Mapping[str, Any]], fieldnames: list[str] | None = None
) -> str:
    """Convenience wrapper for CSV rendering."""
    return ResultFormatter().format(rows, OutputFormat.CSV, fieldnames=fieldnames)


def format_jsonl(records: Iterable[Any]) -> str:
    """Convenience wrapper for JSON-lines rendering."""
    return ResultFormatter().format(list(records), OutputFormat.JSONL)


def format_json(data: Any) -> str:
    """Convenience wrapper for canonical JSON rendering."""
    return ResultFormatter().format(data, OutputFormat.JSON)
