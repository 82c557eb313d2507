"""
Structured JSON logging utility

Features:
- JSON formatted pipeline events
- Run ID support
- Performance metrics
- Error tracking
- Metrics JSON lines
"""

import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional

import config
from app.models.config_models import MetricRecord


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class StructuredLogger:
    """Structured JSON logger for pipeline-level events"""

    def __init__(self, log_file: Optional[str] = None, console: bool = True):
        self.log_file = Path(log_file or config.get_log_file())
        self.log_file.parent.mkdir(parents=True, exist_ok=True)

        # Setup logger
        self.logger = logging.getLogger("tde.events")
        self.logger.setLevel(logging.INFO)
        self.logger.propagate = False

        # Remove existing handlers
        for handler in self.logger.handlers[:]:
            self.logger.removeHandler(handler)

        # File handler (write plain message which we provide as JSON)
        file_handler = logging.FileHandler(self.log_file)
        file_handler.setLevel(logging.INFO)
        file_handler.setFormatter(logging.Formatter('%(message)s'))
        self.logger.addHandler(file_handler)

        if console:
            console_handler = logging.StreamHandler()
            console_handler.setLevel(logging.INFO)
            console_handler.setFormatter(logging.Formatter('%(message)s'))
            self.logger.addHandler(console_handler)

    def _emit(self, level: int, event: str, run_id: Optional[str], component: str, **payload: Any) -> None:
        log_data = {
            "timestamp": _now(),
            "level": logging.getLevelName(level),
            "event": event,
            "run_id": run_id,
            "component": component,
        }
        log_data.update(payload)
        self.logger.log(level, json.dumps(log_data, default=str))

    def log_run_start(self, run_id: str, command: str, config_hash: str, seed: int) -> None:
        """Log command start"""
        self._emit(logging.INFO, "run_start", run_id, "cli",
                   command=command, config_hash=config_hash, seed=seed)

    def log_run_end(self, run_id: str, success: bool, duration_ms: float,
                    error: Optional[str] = None) -> None:
        """Log command end"""
        self._emit(logging.INFO if success else logging.ERROR, "run_end", run_id, "cli",
                   success=success, duration_ms=round(duration_ms, 3), error=error)

    def log_fit(self, run_id: Optional[str], algo: str, n_samples: int, d: int,
                ranks: list, fit_time_ms: float) -> None:
        """Log a completed fit"""
        self._emit(logging.INFO, "fit_complete", run_id, "estimator",
                   algo=algo, n_samples=n_samples, d=d, ranks=ranks,
                   fit_time_ms=round(fit_time_ms, 3))

    def log_compress_core(self, run_id: Optional[str], algo: str, core: int,
                          rank: int, spectrum_head: list) -> None:
        """Log one core of a compression sweep"""
        self._emit(logging.INFO, "compress_core", run_id, "compress",
                   algo=algo, core=core, rank=rank, spectrum_head=spectrum_head)

    def log_sample(self, run_id: Optional[str], count: int, clipped_mass_mean: float,
                   aborted: int) -> None:
        """Log a conditional sampling batch"""
        level = logging.WARNING if aborted else logging.INFO
        self._emit(level, "sample_complete", run_id, "density_ops",
                   count=count, clipped_mass_mean=clipped_mass_mean, aborted=aborted)

    def log_performance_metric(self, run_id: Optional[str], metric_name: str, value: float,
                               unit: str, metadata: Optional[Dict[str, Any]] = None) -> None:
        """Log performance metrics"""
        self._emit(logging.INFO, "performance_metric", run_id, "performance_monitor",
                   metric_name=metric_name, value=value, unit=unit, metadata=metadata or {})

    def log_error(self, run_id: Optional[str], error: BaseException,
                  context: Optional[Dict[str, Any]] = None) -> None:
        """Log errors with context"""
        self._emit(logging.ERROR, "error", run_id, "error_handler",
                   error_type=type(error).__name__, error_message=str(error),
                   context=context or {})


class MetricsWriter:
    """Appends metric records as JSON lines"""

    def __init__(self, path: Optional[str] = None):
        self.path = Path(path or config.get_metrics_file())
        self.path.parent.mkdir(parents=True, exist_ok=True)

    def write(self, metric: str, value: float, config_hash: str, **extra: Any) -> MetricRecord:
        record = MetricRecord(metric=metric, value=float(value), config_hash=config_hash, extra=extra)
        line = {"metric": record.metric, "value": record.value, "config_hash": record.config_hash}
        line.update(record.extra)
        with open(self.path, "a", encoding="utf-8") as f:
            f.write(json.dumps(line, default=str) + "\n")
        return record


# Global logger instance
_structured_logger = None


def get_structured_logger() -> StructuredLogger:
    """Get the global structured logger instance"""
    global _structured_logger
    if _structured_logger is None:
        _structured_logger = StructuredLogger()
    return _structured_logger


def configure_logging(level: int = logging.INFO) -> None:
    """Basic logging configuration for module loggers"""
    logging.basicConfig(level=level, format="[%(levelname)s] %(asctime)s - %(name)s - %(message)s")


def init_structured_logger(log_file: Optional[str] = None, console: bool = True) -> StructuredLogger:
    """Replace the global structured logger (e.g. to log to another file)"""
    global _structured_logger
    _structured_logger = StructuredLogger(log_file, console)
    return _structured_logger
