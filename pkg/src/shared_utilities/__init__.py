"""
Common utilities shared across the lab: logging, tracing, output layout.
"""

from .logging_config import configure_logging, get_logger, get_logging_manager
from .output_manager import OutputManager, write_atomic
from .telemetry import get_telemetry_manager, trace_function, trace_operation

__all__ = [
    "configure_logging",
    "get_logger",
    "get_logging_manager",
    "get_telemetry_manager",
    "trace_function",
    "trace_operation",
    "OutputManager",
    "write_atomic",
]
