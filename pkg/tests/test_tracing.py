"""
Test run tracing functionality

Run:
  python tests/test_tracing.py
"""
import sys
from pathlib import Path
import time

# Add project root to Python path
CURRENT = Path(__file__).resolve().parent
PROJECT_ROOT = CURRENT.parent
sys.path.insert(0, str(PROJECT_ROOT))

from app.utils.tracing import (
    RunTracker, get_run_tracker, start_run, end_run,
    get_current_run_id, add_run_metadata, traced, with_run
)


def test_run_lifecycle():
    """Test run start and end"""
    print("Testing run lifecycle...")
    tracker = RunTracker()
    assert len(tracker.active_runs) == 0

    run_id = tracker.start_run(command="fit", config_hash="abc", seed=3, metadata={"d": 4})
    assert run_id in tracker.active_runs
    info = tracker.get_run_info(run_id)
    assert info.command == "fit" and info.seed == 3
    assert info.metadata["d"] == 4

    summary = tracker.end_run(run_id)
    assert summary["run_id"] == run_id
    assert summary["config_hash"] == "abc"
    assert summary["duration_ms"] >= 0
    assert run_id not in tracker.active_runs
    assert tracker.end_run(run_id) is None
    print("✅ Run lifecycle works")


def test_run_metadata():
    """Test run metadata management"""
    print("Testing run metadata...")
    tracker = RunTracker()
    run_id = tracker.start_run()
    assert tracker.add_metadata(run_id, "algo", "svd_kn") is True
    assert tracker.add_metadata(run_id, "rank", 3) is True
    assert tracker.get_run_info(run_id).metadata == {"algo": "svd_kn", "rank": 3}

    # Invalid run ID
    assert tracker.add_metadata("invalid_id", "key", "value") is False
    tracker.end_run(run_id)
    print("✅ Run metadata works")


def test_global_functions():
    """Test global run functions"""
    print("Testing global run functions...")
    assert get_run_tracker() is get_run_tracker()

    run_id = start_run(command="gen")
    assert get_current_run_id() == run_id
    assert add_run_metadata("global_key", "global_value") is True

    summary = end_run(run_id)
    assert summary["metadata"]["global_key"] == "global_value"
    assert get_current_run_id() is None
    assert add_run_metadata("orphan", 1) is False
    print("✅ Global run functions work")


def test_traced_stage():
    """Test the stage timing decorator"""
    print("Testing traced stages...")

    @traced("compress")
    def slow_add(x, y):
        time.sleep(0.01)
        return x + y

    @traced("deconvolve")
    def failing():
        raise ValueError("Test error")

    with with_run(command="fit") as run_id:
        assert slow_add(5, 3) == 8
        try:
            failing()
        except ValueError:
            pass
        info = get_run_tracker().get_run_info(run_id)
        assert info.metadata["compress_ms"] >= 10.0
        assert "deconvolve_ms" in info.metadata
    print("✅ Stage timings land on the active run")


def test_run_context_manager():
    """Test run context manager"""
    print("Testing run context manager...")
    block = with_run(command="sample", seed=5, metadata={"count": 10})
    with block as run_id:
        assert get_current_run_id() == run_id
        add_run_metadata("clipped", 0.0)

    assert get_current_run_id() is None
    assert run_id not in get_run_tracker().active_runs
    assert block.summary["command"] == "sample" and block.summary["seed"] == 5
    assert block.summary["metadata"] == {"count": 10, "clipped": 0.0}

    # Runs are closed even when the block raises
    try:
        with with_run(command="eval") as failed_id:
            raise RuntimeError("boom")
    except RuntimeError:
        pass
    assert failed_id not in get_run_tracker().active_runs
    print("✅ Run context manager works")


def main():
    """Run all tracing tests"""
    print("🧪 Testing Run Tracing")
    print("=" * 50)

    tests = [
        test_run_lifecycle,
        test_run_metadata,
        test_global_functions,
        test_traced_stage,
        test_run_context_manager,
    ]

    passed = 0
    total = len(tests)

    for test in tests:
        try:
            test()
            passed += 1
        except Exception as e:
            print(f"❌ {test.__name__} failed: {e}")
        print()

    print("=" * 50)
    print(f"📊 Results: {passed}/{total} tests passed")

    if passed == total:
        print("🎉 All tracing tests passed!")
        return True
    else:
        print("❌ Some tests failed")
        return False


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
