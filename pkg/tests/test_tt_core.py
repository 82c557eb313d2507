"""
Test the tensor-train container and the SVD / eigen conventions

Run:
  python tests/test_tt_core.py
"""
import sys
from pathlib import Path

import numpy as np

# Add project root to Python path
CURRENT = Path(__file__).resolve().parent
PROJECT_ROOT = CURRENT.parent
sys.path.insert(0, str(PROJECT_ROOT))

from app.errors import MemoryCapError, NumericError, RankError, ShapeError
from app.tensor.tt_core import (
    DenseTensor, TensorTrain, full_ranks, left_stack, numerical_rank, refold, sign_fix,
    symmetric_eig, truncated_svd, tt_contract, tt_from_rank1_terms, tt_inner, tt_norm,
    tt_to_dense, unfold,
)


def _random_tt(rng, sizes, ranks):
    bounds = [1] + list(ranks) + [1]
    return TensorTrain([rng.standard_normal((bounds[j], n, bounds[j + 1])) for j, n in enumerate(sizes)])


def test_rank1_terms_match_outer_products():
    print("Testing tt_from_rank1_terms...")
    rng = np.random.default_rng(0)
    weights = np.array([0.2, 0.5, 0.3])
    vectors = [rng.standard_normal((3, n)) for n in (4, 2, 5)]
    T = tt_from_rank1_terms(weights, vectors)
    assert T.ranks == [1, 3, 3, 1]

    expected = sum(w * np.einsum("i,j,k->ijk", vectors[0][t], vectors[1][t], vectors[2][t])
                   for t, w in enumerate(weights))
    assert np.allclose(tt_to_dense(T).as_array(), expected, atol=1e-12)
    print("✅ Rank-1 sums are exact tensor trains")


def test_unfold_refold():
    print("Testing unfold / refold...")
    A = DenseTensor.from_array(np.arange(24.0).reshape(2, 3, 4))
    M = unfold(A, 2)
    assert M.shape == (6, 4)
    assert M[1, 2] == A[(0, 1, 2)]
    back = refold(M, (2, 3, 4), 2)
    assert np.array_equal(back.as_array(), A.as_array())
    try:
        refold(M, (2, 3, 4), 1)
        raise AssertionError("wrong unfolding shape should raise")
    except ShapeError:
        pass
    print("✅ Unfoldings are row-major and invertible")


def test_inner_norm_contract():
    print("Testing tt_inner, tt_norm and tt_contract...")
    rng = np.random.default_rng(1)
    A = _random_tt(rng, (3, 4, 2), (2, 3))
    B = _random_tt(rng, (3, 4, 2), (3, 2))
    dense_a = tt_to_dense(A).as_array()
    dense_b = tt_to_dense(B).as_array()
    assert abs(tt_inner(A, B) - float((dense_a * dense_b).sum())) < 1e-10
    assert abs(tt_norm(A) - np.linalg.norm(dense_a)) < 1e-10

    vectors = [rng.standard_normal(n) for n in (3, 4, 2)]
    expected = np.einsum("ijk,i,j,k->", dense_a, *vectors)
    assert abs(tt_contract(A, vectors) - expected) < 1e-10

    stack = left_stack(A, 2)
    assert stack.shape == (12, 3)
    print("✅ Contractions agree with dense oracles")


def test_tensor_train_validation():
    print("Testing tensor-train shape checks...")
    try:
        TensorTrain([np.ones((2, 3, 1))])
        raise AssertionError("boundary rank 2 should raise")
    except ShapeError:
        pass
    try:
        TensorTrain([np.ones((1, 3, 2)), np.ones((3, 3, 1))])
        raise AssertionError("rank mismatch should raise")
    except ShapeError:
        pass
    try:
        TensorTrain([np.full((1, 2, 1), np.nan)])
        raise AssertionError("NaN core should raise")
    except NumericError:
        pass
    T = TensorTrain([np.ones((1, 4, 1))] * 3)
    try:
        tt_to_dense(T, cap=10)
        raise AssertionError("memory cap should raise")
    except MemoryCapError:
        pass
    print("✅ Invalid tensor trains are rejected")


def test_truncated_svd_convention():
    print("Testing truncated SVD sign convention...")
    rng = np.random.default_rng(2)
    M = rng.standard_normal((6, 5))
    U, S, V = truncated_svd(M, 5)
    assert np.allclose(U @ np.diag(S) @ V.T, M, atol=1e-10)
    assert np.all(np.diff(S) <= 0)
    for col in U.T:
        assert col[np.argmax(np.abs(col))] > 0

    U2, _, _ = truncated_svd(-M, 2)
    assert np.allclose(np.abs(U2), np.abs(U[:, :2]), atol=1e-10)
    try:
        truncated_svd(M, 6)
        raise AssertionError("rank above min(shape) should raise")
    except RankError:
        pass
    print("✅ SVD factors are deterministic")


def test_symmetric_eig_order():
    print("Testing symmetric eigendecomposition...")
    rng = np.random.default_rng(3)
    X = rng.standard_normal((8, 4))
    A = X.T @ X
    w, V = symmetric_eig(A)
    assert np.all(np.diff(w) <= 1e-12)
    assert np.allclose(V @ np.diag(w) @ V.T, A, atol=1e-10)
    w2, V2 = symmetric_eig(A, 2)
    assert V2.shape == (4, 2)
    assert np.allclose(w2, w[:2])
    print("✅ Eigenpairs come out descending")


def test_rank_helpers():
    print("Testing rank helpers...")
    assert full_ranks([3, 3, 3, 3]) == [3, 9, 3]
    assert numerical_rank(np.array([1.0, 1e-3, 1e-9])) == 2
    assert numerical_rank(np.zeros(3)) == 1
    U, V = sign_fix(np.array([[-2.0], [1.0]]), np.array([[1.0], [1.0]]))
    assert U[0, 0] == 2.0 and V[0, 0] == -1.0
    print("✅ Rank helpers work")


def main():
    print("🧪 Testing Tensor-Train Core")
    print("=" * 50)
    tests = [
        test_rank1_terms_match_outer_products,
        test_unfold_refold,
        test_inner_norm_contract,
        test_tensor_train_validation,
        test_truncated_svd_convention,
        test_symmetric_eig_order,
        test_rank_helpers,
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
