"""
Run tracing utilities

Features:
- Run ID generation and management
- Context propagation
- Timing of commands and stages
"""

import time
import uuid
from contextvars import ContextVar
from dataclasses import dataclass, field
from datetime import datetime
from functools import wraps
from typing import Any, Dict, Optional

# Context variable for the active run ID
run_context: ContextVar[Optional[str]] = ContextVar('run_id', default=None)


@dataclass
class RunInfo:
    """Run information container"""
    run_id: str
    start_time: float
    command: Optional[str] = None
    config_hash: Optional[str] = None
    seed: Optional[int] = None
    metadata: Dict[str, Any] = field(default_factory=dict)


class RunTracker:
    """Tracks active runs and their metadata"""

    def __init__(self):
        self.active_runs: Dict[str, RunInfo] = {}

    def start_run(self,
                  run_id: Optional[str] = None,
                  command: Optional[str] = None,
                  config_hash: Optional[str] = None,
                  seed: Optional[int] = None,
                  metadata: Optional[Dict[str, Any]] = None) -> str:
        """Start a new run"""
        if run_id is None:
            run_id = self.generate_run_id()

        self.active_runs[run_id] = RunInfo(
            run_id=run_id,
            start_time=time.perf_counter(),
            command=command,
            config_hash=config_hash,
            seed=seed,
            metadata=dict(metadata or {}),
        )
        run_context.set(run_id)
        return run_id

    def end_run(self, run_id: str) -> Optional[Dict[str, Any]]:
        """End a run and return its summary"""
        info = self.active_runs.pop(run_id, None)
        if info is None:
            return None

        summary = {
            "run_id": run_id,
            "command": info.command,
            "config_hash": info.config_hash,
            "seed": info.seed,
            "duration_ms": (time.perf_counter() - info.start_time) * 1000,
            "metadata": info.metadata,
            "end_time": datetime.now().isoformat(),
        }

        # Clear context if this was the current run
        if run_context.get() == run_id:
            run_context.set(None)
        return summary

    def get_current_run_id(self) -> Optional[str]:
        """Get current run ID from context"""
        return run_context.get()

    def get_run_info(self, run_id: str) -> Optional[RunInfo]:
        return self.active_runs.get(run_id)

    def add_metadata(self, run_id: str, key: str, value: Any) -> bool:
        """Add metadata to a run"""
        if run_id not in self.active_runs:
            return False
        self.active_runs[run_id].metadata[key] = value
        return True

    def generate_run_id(self) -> str:
        return str(uuid.uuid4())


# Global run tracker instance
_run_tracker = None


def get_run_tracker() -> RunTracker:
    """Get the global run tracker instance"""
    global _run_tracker
    if _run_tracker is None:
        _run_tracker = RunTracker()
    return _run_tracker


def start_run(run_id: Optional[str] = None, **kwargs) -> str:
    return get_run_tracker().start_run(run_id, **kwargs)


def end_run(run_id: str) -> Optional[Dict[str, Any]]:
    return get_run_tracker().end_run(run_id)


def get_current_run_id() -> Optional[str]:
    return get_run_tracker().get_current_run_id()


def add_run_metadata(key: str, value: Any, run_id: Optional[str] = None) -> bool:
    """Add metadata to the current or specified run"""
    if run_id is None:
        run_id = get_current_run_id()
    if run_id is None:
        return False
    return get_run_tracker().add_metadata(run_id, key, value)


def traced(stage: str):
    """Decorator recording the wall time of a stage on the active run"""
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            t0 = time.perf_counter()
            try:
                return func(*args, **kwargs)
            finally:
                add_run_metadata(f"{stage}_ms", (time.perf_counter() - t0) * 1000)
        return wrapper
    return decorator


class with_run:
    """Context manager opening a run for the duration of a block"""

    def __init__(self, run_id: Optional[str] = None, **kwargs):
        self.run_id = run_id
        self.kwargs = kwargs
        self.summary: Optional[Dict[str, Any]] = None

    def __enter__(self) -> str:
        self.run_id = start_run(self.run_id, **self.kwargs)
        return self.run_id

    def __exit__(self, exc_type, exc_val, exc_tb):
        if self.run_id:
            self.summary = end_run(self.run_id)
        return False
