"""
OpenTelemetry tracing for experiment runs and long sampler loops.
"""

import functools
import os
import time
from collections.abc import Callable
from contextlib import contextmanager
from typing import Any

try:
    from opentelemetry import trace as otel_trace  # type: ignore
    from opentelemetry.sdk.resources import Resource  # type: ignore
    from opentelemetry.sdk.trace import TracerProvider  # type: ignore
    from opentelemetry.sdk.trace.export import BatchSpanProcessor  # type: ignore
    from opentelemetry.trace import Status, StatusCode  # type: ignore

    try:
        from opentelemetry.exporter.otlp.proto.grpc.trace_exporter import (  # type: ignore
            OTLPSpanExporter,
        )

        OTLP_AVAILABLE = True
    except ImportError:
        OTLP_AVAILABLE = False

    OTEL_AVAILABLE = True
except ImportError:
    OTEL_AVAILABLE = False
    OTLP_AVAILABLE = False


SpanValue = str | bool | int | float


def span_value(value: Any) -> SpanValue:
    """Attribute value for a span: scalars keep their type, the rest is truncated text."""
    if isinstance(value, str):
        return value[:100]
    if isinstance(value, bool | int | float):
        return value
    if getattr(value, "ndim", None) == 0 and hasattr(value, "item"):
        return span_value(value.item())
    return str(value)[:100]


def config_attributes(value: Any) -> dict[str, SpanValue]:
    """Experiment name, seeds, grid and target of a config-like argument."""
    return {
        f"config.{name}": span_value(getattr(value, name))
        for name in ("experiment", "seeds", "n_steps", "target")
        if hasattr(value, name)
    }


class TelemetryManager:
    """Manages OpenTelemetry setup for the lab."""

    def __init__(self, service_name: str = "rf-overshoot"):
        """
        Initialize telemetry manager.

        Args:
            service_name: Name of the service for telemetry identification
        """
        self.service_name = service_name
        self.tracer = None
        self.enabled = OTEL_AVAILABLE

        if self.enabled:
            self._setup_telemetry()

    def _setup_telemetry(self) -> None:
        """Set up the tracer provider and the optional OTLP exporter."""
        resource = Resource.create(
            {
                "service.name": self.service_name,
                "service.version": "0.1.0",
            }
        )
        otel_trace.set_tracer_provider(TracerProvider(resource=resource))
        tracer_provider = otel_trace.get_tracer_provider()

        if OTLP_AVAILABLE:
            endpoint = os.getenv("OTEL_EXPORTER_OTLP_ENDPOINT")
            if endpoint:
                processor = BatchSpanProcessor(OTLPSpanExporter(endpoint=endpoint))
                tracer_provider.add_span_processor(processor)  # type: ignore

        self.tracer = otel_trace.get_tracer(__name__)  # type: ignore

    @contextmanager
    def trace_operation(
        self, operation_name: str, attributes: dict[str, Any] | None = None
    ):
        """
        Context manager for tracing operations.

        Args:
            operation_name: Name of the operation being traced
            attributes: Additional attributes to add to the span

        Yields:
            The current span, or None when tracing is disabled
        """
        if not self.enabled or not self.tracer:
            yield None
            return

        with self.tracer.start_as_current_span(operation_name) as span:
            if attributes:
                for key, value in attributes.items():
                    span.set_attribute(key, span_value(value))

            try:
                yield span
            except Exception as e:
                span.set_status(Status(StatusCode.ERROR, str(e)))
                span.record_exception(e)
                raise

    def trace_function(
        self,
        operation_name: str | None = None,
        include_args: bool = False,
        include_result: bool = False,
    ):
        """
        Decorator for tracing function calls.

        Args:
            operation_name: Custom operation name (defaults to function name)
            include_args: Whether to include function arguments as attributes
            include_result: Whether to include return value as attribute

        Returns:
            Decorated function
        """

        def decorator(func: Callable) -> Callable:
            if not self.enabled:
                return func

            @functools.wraps(func)
            def wrapper(*args, **kwargs):
                name = operation_name or f"{func.__module__}.{func.__name__}"

                with self.trace_operation(name) as span:
                    if span and include_args:
                        for i, arg in enumerate(args):
                            span.set_attribute(f"arg.{i}", span_value(arg))
                            for key, value in config_attributes(arg).items():
                                span.set_attribute(key, value)
                        for key, value in kwargs.items():
                            span.set_attribute(f"kwarg.{key}", span_value(value))

                    start_time = time.perf_counter()
                    result = func(*args, **kwargs)

                    if span:
                        span.set_attribute(
                            "duration_seconds", time.perf_counter() - start_time
                        )
                        if include_result and result is not None:
                            span.set_attribute("result", span_value(result))
                        # experiment summaries
                        if isinstance(getattr(result, "passed", None), bool):
                            span.set_attribute("passed", result.passed)

                    return result

            return wrapper

        return decorator


_telemetry_manager: TelemetryManager | None = None


def get_telemetry_manager() -> TelemetryManager:
    """Get or create the global telemetry manager instance."""
    global _telemetry_manager
    if _telemetry_manager is None:
        _telemetry_manager = TelemetryManager()
    return _telemetry_manager


def trace_operation(operation_name: str, attributes: dict[str, Any] | None = None):
    """Convenience wrapper around TelemetryManager.trace_operation."""
    return get_telemetry_manager().trace_operation(operation_name, attributes)


def trace_function(
    operation_name: str | None = None,
    include_args: bool = False,
    include_result: bool = False,
):
    """Convenience wrapper around TelemetryManager.trace_function."""
    return get_telemetry_manager().trace_function(
        operation_name, include_args, include_result
    )

