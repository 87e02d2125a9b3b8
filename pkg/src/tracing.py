import logging
import os

from dotenv import load_dotenv
from opentelemetry import trace
from opentelemetry.exporter.otlp.proto.http.trace_exporter import OTLPSpanExporter as OTLPHttpSpanExporter  # Explicitly HTTP
from opentelemetry.sdk.resources import Resource
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import BatchSpanProcessor
from opentelemetry.trace import Status, StatusCode

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger(__name__)

_TRACER_PROVIDER_INITIALIZED = False
_ACTUAL_TRACER_PROVIDER = None  # Store the successfully configured provider

# Span attributes for verification checks
CHECK_NAME = "check.name"
CHECK_VALUE = "check.value"
CHECK_TOLERANCE = "check.tolerance"
REPORT_NAME = "report.name"
REPORT_PASSED = "report.passed"
REPORT_CHECK_COUNT = "report.check_count"


def set_report_attributes(span, report):
    """Sets the summary attributes of a finished Report and records each failed check as a span event."""
    span.set_attribute(REPORT_NAME, report.name)
    span.set_attribute(REPORT_PASSED, bool(report.passed))
    span.set_attribute(REPORT_CHECK_COUNT, len(report.checks))
    for check in report.checks:
        if not check.passed:
            span.add_event("check_failed", {
                CHECK_NAME: check.check,
                CHECK_VALUE: float(check.value) if check.value is not None else float("nan"),
                CHECK_TOLERANCE: float(check.tolerance) if check.tolerance is not None else float("nan"),
            })
    if not report.passed:
        span.set_status(Status(StatusCode.ERROR, f"{report.name}: failed checks"))


def record_failure(span, exc):
    span.record_exception(exc)
    span.set_status(Status(StatusCode.ERROR, str(exc)))


def init_tracer_provider(service_name="repgabor"):
    global _TRACER_PROVIDER_INITIALIZED, _ACTUAL_TRACER_PROVIDER

    if _TRACER_PROVIDER_INITIALIZED:
        return _ACTUAL_TRACER_PROVIDER

    resource = Resource.create({"service.name": service_name})
    provider = TracerProvider(resource=resource)

    otlp_endpoint = os.getenv("REPGABOR_OTLP_ENDPOINT")
    otlp_api_key = os.getenv("REPGABOR_OTLP_API_KEY")

    if not otlp_endpoint:
        # Spans are created but stay in-process.
        logger.debug("REPGABOR_OTLP_ENDPOINT not set. OpenTelemetry export is not configured.")
    else:
        headers = {}
        if otlp_api_key:
            headers["Authorization"] = f"Bearer {otlp_api_key}"
            logger.info(f"OTLP Exporter: Using 'Authorization: Bearer <REPGABOR_OTLP_API_KEY>' header for endpoint: {otlp_endpoint}")
        else:
            logger.warning(f"REPGABOR_OTLP_API_KEY not set. OTLP export to {otlp_endpoint} may be unauthorized.")

        try:
            span_exporter = OTLPHttpSpanExporter(
                endpoint=otlp_endpoint,  # Full URL: e.g. "https://collector.example.com/v1/traces"
                headers=headers if headers else None,
            )
            provider.add_span_processor(BatchSpanProcessor(span_exporter))
            logger.info(f"OTLP HTTP Span Exporter configured for endpoint: {otlp_endpoint}")
        except Exception as e:
            logger.error(f"Failed to initialize OTLPHttpSpanExporter: {e}. Traces will not be exported.")

    try:
        trace.set_tracer_provider(provider)
        _ACTUAL_TRACER_PROVIDER = provider
        _TRACER_PROVIDER_INITIALIZED = True
        logger.debug(f"OpenTelemetry TracerProvider initialized for service: {service_name}.")
    except Exception as e:
        logger.warning(f"Error setting global TracerProvider: {e}. Continuing with existing provider.")
        _ACTUAL_TRACER_PROVIDER = trace.get_tracer_provider()  # Fallback to whatever is global
        _TRACER_PROVIDER_INITIALIZED = True  # Mark as initialized to prevent re-attempts

    return _ACTUAL_TRACER_PROVIDER


def get_opentelemetry_tracer(tracer_name: str, version: str = "0.1.0"):
    if not _TRACER_PROVIDER_INITIALIZED:
        init_tracer_provider()
        if not _TRACER_PROVIDER_INITIALIZED:
            raise RuntimeError("TracerProvider could not be initialized. Tracing will fail.")

    provider_to_use = trace.get_tracer_provider()
    if not provider_to_use or not hasattr(provider_to_use, "get_tracer"):
        logger.warning("Current global tracer provider is invalid. Spans may not be generated.")
        if _ACTUAL_TRACER_PROVIDER and _ACTUAL_TRACER_PROVIDER is not provider_to_use:
            return _ACTUAL_TRACER_PROVIDER.get_tracer(tracer_name, version)

    return trace.get_tracer(tracer_name, version)
