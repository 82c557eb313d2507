"""
Test the TTTN / TTDE binary formats and model persistence

Run:
  python tests/test_storage.py
"""
import struct
import sys
import tempfile
from pathlib import Path

import numpy as np

# Add project root to Python path
CURRENT = Path(__file__).resolve().parent
PROJECT_ROOT = CURRENT.parent
sys.path.insert(0, str(PROJECT_ROOT))

from app.basis.families import FourierBasis
from app.errors import FormatError
from app.estimator.density_ops import eval_points
from app.estimator.estimator import estimate_density
from app.estimator.model import SampleSet
from app.estimator.preprocess import fit_general
from app.models.config_models import CompressSpec, GeneralFitConfig, GridSpec
from app.storage.formats import (
    SAMPLE_MAGIC, TT_MAGIC, decode_tt, encode_tt, load_model, manifest_path, read_manifest,
    read_samples, save_model, write_samples, write_tt,
)
from app.tensor.tt_core import TensorTrain


def _tt(seed=0):
    rng = np.random.default_rng(seed)
    return TensorTrain([rng.standard_normal((1, 3, 2)), rng.standard_normal((2, 4, 1))])


def _expect_format_error(data: bytes, what: str):
    try:
        decode_tt(data)
        raise AssertionError(f"{what} should raise FormatError")
    except FormatError:
        pass


def test_tt_encoding():
    print("Testing TTTN encoding...")
    T = _tt()
    blob = encode_tt(T, {"note": "x", "alpha": 0.5})
    assert blob[:4] == TT_MAGIC
    assert struct.unpack("<I", blob[4:8])[0] == 1
    assert struct.unpack("<Q", blob[8:16])[0] == 2
    back, meta = decode_tt(blob)
    assert meta == {"note": "x", "alpha": 0.5}
    for a, b in zip(back.cores, T.cores):
        assert np.array_equal(a, b)
    print("✅ Tensor trains are stored exactly")


def test_tt_malformed():
    print("Testing malformed TTTN files...")
    blob = encode_tt(_tt())
    _expect_format_error(b"XXXX" + blob[4:], "bad magic")
    _expect_format_error(blob[:4] + struct.pack("<I", 2) + blob[8:], "unknown version")
    _expect_format_error(blob[:-3], "truncated file")
    _expect_format_error(blob + b"\x00", "trailing bytes")
    print("✅ Malformed files raise FormatError")


def test_samples_and_manifest():
    print("Testing TTDE sample files...")
    X = np.arange(12.0).reshape(4, 3)
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "x.ttde"
        write_samples(path, SampleSet(X), {"seed": 3, "model": "gm"})
        assert path.read_bytes()[:4] == SAMPLE_MAGIC
        assert np.array_equal(read_samples(path), X)
        assert manifest_path(path).name == "x.ttde.json"
        assert read_manifest(path) == {"seed": 3, "model": "gm"}

        bare = Path(tmp) / "y.ttde"
        write_samples(bare, X)
        assert read_manifest(bare) == {}
        bare.write_bytes(bare.read_bytes()[:-8])
        try:
            read_samples(bare)
            raise AssertionError("truncated samples should raise")
        except FormatError:
            pass
    print("✅ Sample files and manifests round-trip")


def test_model_persistence():
    print("Testing model save / load...")
    rng = np.random.default_rng(1)
    grid = GridSpec.symmetric(1.0, 0.1)
    s = SampleSet(rng.uniform(-1.0, 1.0, size=(300, 2)), grid)
    model = estimate_density(s, [FourierBasis(5, 1.0)] * 2, 0.2, CompressSpec(algo="fast", ranks=2),
                             grids=[grid] * 2)
    x = rng.uniform(-1.0, 1.0, size=(10, 2))
    with tempfile.TemporaryDirectory() as tmp:
        path = save_model(Path(tmp) / "m.tttn", model, config_hash="h1", seed=7)
        loaded = load_model(path)
        assert np.allclose(eval_points(loaded, x), eval_points(model, x), rtol=1e-14)
        assert loaded.norm_const == model.norm_const and loaded.alpha == 0.2

        general = fit_general(SampleSet(rng.standard_normal((300, 2))),
                              GeneralFitConfig(pca_dim=2, nbasis=4, alpha=0.3, mesh=0.1,
                                               compress=CompressSpec(algo="fast", ranks=2)))
        path = save_model(Path(tmp) / "g.tttn", general)
        again = load_model(path)
        z = general.pca.inverse_transform(np.zeros((1, 2)))
        assert np.allclose(eval_points(again, z), eval_points(general, z), rtol=1e-12)

        bare = write_tt(Path(tmp) / "t.tttn", _tt())
        try:
            load_model(bare)
            raise AssertionError("a bare tensor train is not a model")
        except FormatError:
            pass
    print("✅ Models reload with identical values")


def main():
    print("🧪 Testing Storage Formats")
    print("=" * 50)
    tests = [
        test_tt_encoding,
        test_tt_malformed,
        test_samples_and_manifest,
        test_model_persistence,
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
