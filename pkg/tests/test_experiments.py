"""
Test the experiment drivers at toy scale

Run:
  python tests/test_experiments.py
"""
import sys
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd

# Add project root to Python path
CURRENT = Path(__file__).resolve().parent
PROJECT_ROOT = CURRENT.parent
sys.path.insert(0, str(PROJECT_ROOT))

from app.errors import ConfigError
from app.models.config_models import GlSpec, LangevinConfig
from app.pipeline.experiments import (
    bench_slopes, bench_sweep, coefficient_error_curve, gl1d_basis_sweep, gm_error_curve,
    gm_sampler_fidelity, loglog_slope, write_table,
)


def test_loglog_slope():
    print("Testing log-log slopes...")
    x = np.array([1.0, 2.0, 4.0, 8.0])
    assert abs(loglog_slope(x, 3 * x ** 2) - 2.0) < 1e-12
    assert abs(loglog_slope(x, x ** -0.5) + 0.5) < 1e-12
    for bad in (([1.0], [1.0]), ([1.0, 2.0], [1.0, -1.0])):
        try:
            loglog_slope(*bad)
            raise AssertionError("degenerate slope input should raise")
        except ConfigError:
            pass
    print("✅ Slopes of power laws are exact")


def test_gm_error_curve():
    print("Testing the mixture error curve...")
    table = gm_error_curve(2, [200, 800], seeds=(0, 1), nbasis=5, rank=2, algo="fast")
    assert list(table.columns) == ["d", "N", "seed", "algo", "rel_l2", "fit_seconds"]
    assert len(table) == 4 and set(table["algo"]) == {"svd_fast"}
    assert (table["rel_l2"] > 0).all() and np.isfinite(table["rel_l2"]).all()
    print("✅ One row per (N, seed)")


def test_gl1d_basis_sweep():
    print("Testing the 1D lattice basis sweep...")
    spec = GlSpec.gl1d(3).model_copy(update={"mesh": 0.1})
    cfg = LangevinConfig(burn_in=200, thinning=2, n_chains=16, seed=0)
    table = gl1d_basis_sweep(3, [3, 5], 400, langevin=cfg, algo="fast", rank=2, spec=spec)
    assert list(table["n"]) == [3, 5]
    assert (table["N"] == 400).all() and (table["d"] == 3).all()
    assert np.isfinite(table["rel_l2"]).all()
    print("✅ Sweep reports one error per basis size")


def test_coefficient_error_curve():
    print("Testing coefficient error curves...")
    product = coefficient_error_curve("product", [200, 800], seeds=(0,), d=3, nbasis=3)
    assert list(product.columns) == ["kind", "d", "N", "seed", "algo", "coeff_error"]
    assert (product["coeff_error"] > 0).all() and (product["coeff_error"] < 0.1).all()
    additive = coefficient_error_curve("additive", [400], seeds=(0, 1), d=3, nbasis=3, algo="c")
    assert set(additive["algo"]) == {"svd_c"} and (additive["coeff_error"] < 0.1).all()
    try:
        coefficient_error_curve("pairwise", [100])
        raise AssertionError("unknown data kind should raise")
    except ConfigError:
        pass
    print("✅ Compressed coefficients approach the known tensors")


def test_sampler_fidelity():
    print("Testing sampler fidelity on the mixture...")
    report = gm_sampler_fidelity(2, 2000, count=1000, nbasis=7, rank=3, algo="fast")
    assert report["count"] == 1000.0
    assert 0.0 <= report["second_moment_error"] < 0.5
    assert 0.0 <= report["clipped_mass_mean"] < 1.0
    print("✅ Fidelity report has the expected fields")


def test_bench_sweep():
    print("Testing timing sweeps...")
    table = bench_sweep("N", [200, 400], algos=("fast", "kn"), d=3, nbasis=5, rank=2)
    assert len(table) == 4
    assert set(table["algo"]) == {"svd_fast", "svd_kn"}
    slopes = bench_slopes(table)
    assert set(slopes) == {"svd_fast", "svd_kn"}
    with tempfile.TemporaryDirectory() as tmp:
        path = write_table(table, Path(tmp) / "out" / "bench.csv")
        back = pd.read_csv(path)
        assert list(back.columns) == ["param_name", "param", "wall_seconds", "algo", "repeat"]
        assert list(back["param"]) == list(table["param"])
    try:
        bench_sweep("n", [1])
        raise AssertionError("unknown sweep parameter should raise")
    except ConfigError:
        pass
    print("✅ Timing tables round-trip through CSV")


def main():
    print("🧪 Testing Experiment Drivers")
    print("=" * 50)
    tests = [
        test_loglog_slope,
        test_gm_error_curve,
        test_gl1d_basis_sweep,
        test_coefficient_error_curve,
        test_sampler_fidelity,
        test_bench_sweep,
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
