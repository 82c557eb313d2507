"""
Utility modules
"""
from .logger import MetricsWriter, StructuredLogger, configure_logging, get_structured_logger, init_structured_logger
from .tracing import add_run_metadata, end_run, get_current_run_id, start_run, traced, with_run

__all__ = [
    'MetricsWriter', 'StructuredLogger', 'configure_logging', 'get_structured_logger', 'init_structured_logger',
    'add_run_metadata', 'end_run', 'get_current_run_id', 'start_run', 'traced', 'with_run',
]
