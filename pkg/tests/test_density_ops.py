"""
Test evaluation, quadrature, marginals, moments and conditional sampling of models

Run:
  python tests/test_density_ops.py
"""
import sys
from pathlib import Path

import numpy as np

# Add project root to Python path
CURRENT = Path(__file__).resolve().parent
PROJECT_ROOT = CURRENT.parent
sys.path.insert(0, str(PROJECT_ROOT))

from app.basis.families import FourierBasis
from app.errors import ConfigError, DomainError
from app.estimator.density_ops import (
    conditional_sample, eval_point, eval_points, grid_tt, integrate, marginal, moment1, moment2,
    normalize,
)
from app.estimator.model import DensityModel
from app.models.config_models import GridSpec
from app.tensor.tt_core import tt_contract, tt_from_rank1_terms

# p(x, y) = (1 + 0.6 sin(pi x) sin(pi y)) / 4 on [-1, 1]^2
AMPLITUDE = 0.3


def _model(mesh=0.05):
    basis = FourierBasis(3, 1.0)
    unit = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    coeff = tt_from_rank1_terms([1.0, AMPLITUDE], [unit, unit])
    return DensityModel(coeff=coeff, bases=[basis] * 2, mean_fields=[basis.mean_field()] * 2,
                        grids=[GridSpec.symmetric(1.0, mesh)] * 2, alpha=1.0)


def _exact(x):
    x = np.atleast_2d(x)
    s = np.sin(np.pi * x)
    return (1.0 + 2 * AMPLITUDE * s[:, 0] * s[:, 1]) / 4.0


def test_evaluation():
    print("Testing point evaluation...")
    m = _model()
    x = np.array([[0.1, -0.3], [0.25, 0.25], [-0.9, 0.6]])
    assert np.allclose(eval_points(m, x), _exact(x), atol=1e-12)
    assert abs(eval_point(m, [0.25, 0.25]) - 0.325) < 1e-12
    try:
        eval_points(m, np.array([[1.5, 0.0]]))
        raise AssertionError("points outside the box should raise")
    except DomainError:
        pass
    print("✅ Tensor-train evaluation matches the closed form")


def test_quadrature_and_normalize():
    print("Testing grid quadrature...")
    m = _model()
    assert abs(integrate(m) - 1.0) < 1e-10
    doubled = m.with_updates(norm_const=0.5)
    assert abs(integrate(doubled) - 2.0) < 1e-10
    assert abs(integrate(normalize(doubled)) - 1.0) < 1e-10

    T = grid_tt(m)
    assert abs(tt_contract(T, [g.weights() for g in m.grids]) - 1.0) < 1e-10
    print("✅ Models integrate to one on their grid")


def test_marginal():
    print("Testing marginals...")
    m = _model()
    first = marginal(m, 1)
    assert first.d == 1
    assert abs(integrate(first) - 1.0) < 1e-10
    x = np.array([[-0.4], [0.3]])
    assert np.allclose(eval_points(first, x), 0.5, atol=1e-10)
    assert marginal(m, 2).d == 2
    try:
        marginal(m, 0)
        raise AssertionError("order 0 should raise")
    except ConfigError:
        pass
    print("✅ Integrating out coordinates leaves the uniform marginal")


def test_moments():
    print("Testing first and second moments...")
    m = _model()
    assert np.allclose(moment1(m), 0.0, atol=1e-10)
    S = moment2(m)
    assert np.allclose(np.diag(S), 1.0 / 3.0, atol=1e-3)
    assert abs(S[0, 1] - 2 * AMPLITUDE / np.pi ** 2) < 1e-3
    assert np.allclose(S, S.T)

    X = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.allclose(moment2(X), X.T @ X / 2)
    print("✅ Moments agree with the analytic values")


def test_conditional_sampling():
    print("Testing conditional sampling...")
    m = _model()
    samples, diagnostics = conditional_sample(m, 20000, seed=7, chunk=4096)
    assert samples.N == diagnostics.count == 20000
    assert diagnostics.aborted == 0
    assert diagnostics.clipped_mass_total == 0.0
    assert np.abs(samples.data).max() <= 1.0
    assert np.allclose(moment2(samples), moment2(m), atol=0.02)

    again, _ = conditional_sample(m, 20000, seed=7, chunk=4096)
    assert np.array_equal(again.data, samples.data)
    other, _ = conditional_sample(m, 100, seed=8)
    assert not np.array_equal(other.data, samples.data[:100])
    try:
        conditional_sample(m, 0)
        raise AssertionError("count 0 should raise")
    except ConfigError:
        pass
    print("✅ Conditional samples are reproducible and follow the model")


def main():
    print("🧪 Testing Density Operations")
    print("=" * 50)
    tests = [
        test_evaluation,
        test_quadrature_and_normalize,
        test_marginal,
        test_moments,
        test_conditional_sampling,
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
