"""
Minimal structured logging smoke test

Run:
  python tests/test_structured_logging.py
"""
import sys
from pathlib import Path
import json
import tempfile

# Add project root to Python path
CURRENT = Path(__file__).resolve().parent
PROJECT_ROOT = CURRENT.parent
sys.path.insert(0, str(PROJECT_ROOT))

from app.errors import NumericError
from app.utils.logger import StructuredLogger
from app.utils.tracing import get_run_tracker


def _read_events(logger: StructuredLogger):
    # Flush to disk
    for h in logger.logger.handlers:
        h.flush()
    with open(logger.log_file, "r") as f:
        return [json.loads(ln) for ln in f.read().splitlines() if ln.strip()]


def _close(logger: StructuredLogger):
    for h in logger.logger.handlers[:]:
        h.close()
        logger.logger.removeHandler(h)


def test_minimal_logging():
    print("Testing minimal structured logging...")
    with tempfile.TemporaryDirectory() as tmp:
        logger = StructuredLogger(str(Path(tmp) / "tde.log"), console=False)
        run_id = get_run_tracker().generate_run_id()

        # Write two basic structured entries
        logger.log_run_start(run_id, "fit", "abc123", 7)
        logger.log_run_end(run_id, True, 123.5)

        lines = _read_events(logger)
        _close(logger)
        assert len(lines) == 2
        first, second = lines
        assert first["event"] == "run_start" and second["event"] == "run_end"
        assert first["run_id"] == run_id == second["run_id"]
        assert first["command"] == "fit" and first["seed"] == 7
        assert second["success"] is True and second["duration_ms"] == 123.5
    print("✅ Minimal structured logging works")


def test_pipeline_events():
    print("Testing pipeline events...")
    with tempfile.TemporaryDirectory() as tmp:
        logger = StructuredLogger(str(Path(tmp) / "tde.log"), console=False)
        logger.log_fit("r1", "svd_kn", 500, 3, [1, 3, 3, 1], 12.0)
        logger.log_compress_core("r1", "svd_kn", 0, 3, [2.0, 1.0, 0.5])
        logger.log_sample("r1", 100, 0.01, 2)
        logger.log_error("r1", NumericError("mass is not positive"), {"stage": "normalize"})

        events = _read_events(logger)
        _close(logger)
        assert [e["event"] for e in events] == ["fit_complete", "compress_core", "sample_complete", "error"]
        assert events[0]["ranks"] == [1, 3, 3, 1] and events[0]["component"] == "estimator"
        assert events[2]["level"] == "WARNING"
        assert events[3]["error_type"] == "NumericError"
        assert events[3]["context"] == {"stage": "normalize"}
    print("✅ Pipeline events are JSON lines")


def main():
    print("🧪 Testing Structured JSON Logging (Minimal)")
    print("=" * 50)
    tests = [test_minimal_logging, test_pipeline_events]
    passed = 0
    for test in tests:
        try:
            test()
            passed += 1
        except Exception as e:
            print(f"❌ {test.__name__} failed: {e}")
        print()
    print("=" * 50)
    if passed == len(tests):
        print("🎉 All structured logging tests passed!")
        return True
    else:
        print("❌ Some tests failed")
        return False


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
