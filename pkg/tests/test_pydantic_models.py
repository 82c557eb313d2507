"""
Test Pydantic models and error codes

Run:
  python tests/test_pydantic_models.py
"""
import sys
from pathlib import Path

from pydantic import ValidationError

# Add project root to Python path
CURRENT = Path(__file__).resolve().parent
PROJECT_ROOT = CURRENT.parent
sys.path.insert(0, str(PROJECT_ROOT))

import config
from app.errors import (
    EXIT_CONFIG, EXIT_NUMERIC, ConfigError, FormatError, MemoryCapError, NumericError, RankError,
    exit_code_for,
)
from app.models.config_models import (
    CompressAlgo, CompressSpec, GlSpec, GmSpec, GridSpec, LangevinConfig, LangevinReport,
    RunConfig, SamplerDiagnostics,
)


def _expect_invalid(factory, what: str):
    try:
        factory()
        raise AssertionError(f"{what} should not validate")
    except ValidationError:
        pass


def test_grid_spec():
    print("Testing grid models...")
    g = GridSpec.symmetric(1.5, 0.1)
    assert g.points == 30 and abs(g.width - 3.0) < 1e-12
    assert abs(g.nodes()[0] + 1.45) < 1e-12 and abs(g.nodes()[-1] - 1.45) < 1e-12
    assert abs(g.weights().sum() - 3.0) < 1e-12
    assert list(g.cell_index([-1.5, 1.5, 0.01])) == [0, 29, 15]
    _expect_invalid(lambda: GridSpec(lo=0.0, hi=1.0, mesh=0.3), "non-dividing mesh")
    _expect_invalid(lambda: GridSpec(lo=1.0, hi=0.0, mesh=0.1), "empty interval")
    print("✅ GridSpec model works")


def test_compress_spec():
    print("Testing compression settings...")
    spec = CompressSpec(algo="kn", ranks=3)
    assert spec.algo == CompressAlgo.SVD_KN
    assert spec.sketch_size == config.get_sketch_size("svd_kn")
    assert spec.ranks_for(4) == [3, 3, 3]
    assert CompressSpec(algo="fast").sketch_size is None
    assert CompressSpec(algo="rsvd-t", ranks=2, sketch_size=5).algo == CompressAlgo.RSVD_T
    _expect_invalid(lambda: CompressSpec(algo="rsvd", ranks=5, sketch_size=3), "thin sketch")
    _expect_invalid(lambda: CompressSpec(algo="kn", ranks=5, sketch_size=3), "thin Nystrom sketch")
    assert CompressSpec(algo="kn", ranks=3, sketch_size=3).sketch_size == 3
    _expect_invalid(lambda: CompressSpec(algo="bogus"), "unknown algorithm")
    _expect_invalid(lambda: CompressSpec(ranks=[2, 0]), "zero rank")
    try:
        CompressSpec(ranks=[2, 2]).ranks_for(4)
        raise AssertionError("rank list of the wrong length should raise")
    except ValueError:
        pass
    print("✅ CompressSpec model works")


def test_target_specs():
    print("Testing mixture and lattice specs...")
    gm = GmSpec(d=2)
    weights = [w for w, _, _ in gm.components()]
    assert len(weights) == 6 and abs(sum(weights) - 1.0) < 1e-12
    assert gm.grid().points == int(round(2 * gm.half_width / gm.mesh))
    _expect_invalid(lambda: GmSpec(d=2, outer_weights=(0.5, 0.6, -0.1)), "negative weights")

    gl = GlSpec.gl1d(5)
    assert gl.dim == 5 and abs(gl.h - 1.0 / 6.0) < 1e-15
    assert GlSpec.gl2d(4).dim == 16
    _expect_invalid(lambda: GlSpec.gl1d(3, beta=0.0), "zero beta")
    print("✅ GmSpec and GlSpec models work")


def test_langevin_models():
    print("Testing Langevin settings...")
    assert abs(LangevinConfig().step_for(0.125) - config.LANGEVIN_STEP / 0.125) < 1e-15
    assert LangevinConfig(step=0.01).step_for(4.0) == 0.01
    _expect_invalid(lambda: LangevinConfig(step=0.0), "zero step")
    report = LangevinReport(step=0.04, n_chains=4, steps_run=10, burn_in=0, thinning=1,
                            kept=30, rejected_outside=10)
    assert abs(report.acceptance - 0.75) < 1e-15
    diagnostics = SamplerDiagnostics(count=10, requested=10, clipped_mass_total=0.5)
    assert abs(diagnostics.clipped_mass_mean - 0.05) < 1e-15
    print("✅ Langevin and sampler reports work")


def test_run_config_hash():
    print("Testing run configuration hashing...")
    a = RunConfig(model="gm", d=3, algo="hier")
    b = RunConfig(model="gm", d=3, algo="svd_c_hier")
    assert a.algo == CompressAlgo.SVD_C_HIER
    assert a.config_hash() == b.config_hash() and len(a.config_hash()) == 16
    assert RunConfig(model="gm", d=3, algo="hier", seed=1).config_hash() != a.config_hash()
    spec = RunConfig(algo="rsvd", rank=3).compress_spec()
    assert spec.sketch_size == config.get_sketch_size("rsvd_t") and spec.ranks == 3
    print("✅ RunConfig hash is stable")


def test_exit_codes():
    print("Testing exit codes...")
    assert exit_code_for(ConfigError("x")) == EXIT_CONFIG
    assert exit_code_for(FormatError("x")) == EXIT_CONFIG
    assert exit_code_for(RankError("x")) == EXIT_CONFIG
    assert exit_code_for(NumericError("x")) == EXIT_NUMERIC
    assert exit_code_for(MemoryCapError("x")) == EXIT_NUMERIC
    assert exit_code_for(ZeroDivisionError()) == EXIT_NUMERIC
    assert exit_code_for(KeyError("x")) == EXIT_CONFIG
    print("✅ Errors map onto exit codes")


def main():
    print("🧪 Testing Pydantic Models")
    print("=" * 50)
    tests = [
        test_grid_spec,
        test_compress_spec,
        test_target_specs,
        test_langevin_models,
        test_run_config_hash,
        test_exit_codes,
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
