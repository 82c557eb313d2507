"""
Test the command-line driver end to end (gen -> fit -> sample -> eval)

Run:
  python tests/test_cli.py
"""
import json
import sys
import tempfile
from pathlib import Path

import pandas as pd

# Add project root to Python path
CURRENT = Path(__file__).resolve().parent
PROJECT_ROOT = CURRENT.parent
sys.path.insert(0, str(PROJECT_ROOT))

from app.errors import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK
from app.main import main as tde_main
from app.storage.formats import load_model, read_manifest, read_samples


def _run(tmp: Path, *argv: str) -> int:
    return tde_main(["--log-file", str(tmp / "tde.log"), *argv])


def test_pipeline_round_trip():
    print("Testing gen -> fit -> sample -> eval...")
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        data, model, drawn = tmp / "gm.ttde", tmp / "gm.tttn", tmp / "drawn.ttde"
        metrics = tmp / "metrics.jsonl"

        assert _run(tmp, "gen", "--model", "gm", "--d", "2", "--n", "500", "--seed", "1",
                    "--out", str(data)) == EXIT_OK
        assert read_samples(data).shape == (500, 2)
        manifest = read_manifest(data)
        assert manifest["model"] == "gm" and manifest["seed"] == 1
        assert manifest["box"] == {"half_width": 1.5, "mesh": 0.1}

        assert _run(tmp, "fit", "--data", str(data), "--algo", "fast", "--rank", "2",
                    "--nbasis", "5", "--out", str(model)) == EXIT_OK
        fitted = load_model(model)
        assert fitted.d == 2 and max(fitted.coeff.ranks) <= 2

        assert _run(tmp, "sample", "--model-file", str(model), "--count", "200", "--seed", "3",
                    "--out", str(drawn)) == EXIT_OK
        assert read_samples(drawn).shape == (200, 2)
        assert "diagnostics" in read_manifest(drawn)

        assert _run(tmp, "eval", "--metric", "rel-l2", "--model-file", str(model), "--truth", "gm",
                    "--metrics-file", str(metrics)) == EXIT_OK
        assert _run(tmp, "eval", "--metric", "second-moment", "--data", str(drawn),
                    "--reference", str(data), "--metrics-file", str(metrics)) == EXIT_OK
        records = [json.loads(ln) for ln in metrics.read_text().splitlines()]
        assert [r["metric"] for r in records] == ["rel-l2", "second-moment"]
        assert all(r["value"] >= 0.0 and len(r["config_hash"]) == 16 for r in records)

        table = tmp / "marginal.csv"
        assert _run(tmp, "eval", "--metric", "marginal", "--model-file", str(model),
                    "--reference", str(data), "--out", str(table)) == EXIT_OK
        assert set(pd.read_csv(table).columns) == {"x", "model", "samples"}

        events = [json.loads(ln) for ln in (tmp / "tde.log").read_text().splitlines() if ln.strip()]
        assert {"run_start", "run_end", "sample_complete"} <= {e["event"] for e in events}
    print("✅ The full command chain succeeds")


def test_config_errors():
    print("Testing configuration exit codes...")
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        out = str(tmp / "x.ttde")
        assert _run(tmp, "gen", "--model", "cauchy", "--d", "2", "--n", "10", "--out", out) == EXIT_CONFIG
        assert _run(tmp, "gen", "--model", "gm", "--n", "10", "--out", out) == EXIT_CONFIG
        assert _run(tmp, "fit", "--data", str(tmp / "missing.ttde"), "--out", str(tmp / "m.tttn")) == EXIT_CONFIG

        assert _run(tmp, "gen", "--model", "gm", "--d", "2", "--n", "50", "--out", out) == EXIT_OK
        assert _run(tmp, "fit", "--data", out, "--algo", "bogus", "--out", str(tmp / "m.tttn")) == EXIT_CONFIG

        toml = tmp / "run.toml"
        toml.write_text("[run]\nmodel = \"gm\"\nd = 2\nn = 20\nseed = 4\n")
        assert _run(tmp, "gen", "--config", str(toml), "--out", out) == EXIT_OK
        assert read_manifest(out)["seed"] == 4
        assert read_samples(out).shape == (20, 2)
    print("✅ Bad configurations exit with code 2")


def test_numeric_errors():
    print("Testing numeric exit codes...")
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        code = _run(tmp, "gen", "--model", "harmonic", "--d", "2", "--n", "10", "--step", "3.0",
                    "--burn-in", "100", "--chains", "4", "--out", str(tmp / "h.ttde"))
        assert code == EXIT_NUMERIC
        assert not (tmp / "h.ttde").exists()

        code = _run(tmp, "gen", "--model", "harmonic", "--d", "2", "--n", "10", "--step", "3.0",
                    "--burn-in", "100", "--chains", "4", "--metropolis", "--out", str(tmp / "m.ttde"))
        assert code == EXIT_OK
        diagnostics = read_manifest(tmp / "m.ttde")["diagnostics"]
        assert diagnostics["metropolis"] is True and diagnostics["moves_accepted"] > 0
    print("✅ Diverging chains exit with code 3; Metropolis moves keep them bounded")


def main():
    print("🧪 Testing Command Line")
    print("=" * 50)
    tests = [
        test_pipeline_round_trip,
        test_config_errors,
        test_numeric_errors,
    ]
    passed = 0
    for test in tests:
        try:
            test()
            passed += 1
        except Exception as e:
            print(f"❌ {test.__name__} failed: {e}")
        print()
    print("=" * 50)
    print(f"📊 Test Results: {passed}/{len(tests)} tests passed")
    return passed == len(tests)


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
