"""
Test the synthetic data generators, Langevin chains and ground truths

Run:
  python tests/test_generators.py
"""
import sys
from pathlib import Path

import numpy as np

# Add project root to Python path
CURRENT = Path(__file__).resolve().parent
PROJECT_ROOT = CURRENT.parent
sys.path.insert(0, str(PROJECT_ROOT))

from app.basis.families import FourierBasis, LegendreBasis
from app.errors import ConfigError, NumericError
from app.estimator.density_ops import integrate
from app.generators import (
    GinzburgLandau, HarmonicPotential, LangevinChains, component_weights, gl1d_grid_truth,
    gl_gradient, gl_potential, gm_draw, gm_grid_truth, gm_sample, gm_truth_model, gm_truth_tt,
    langevin_run, moment_drift,
)
from app.metrics.metrics import rel_l2
from app.models.config_models import GlKind, GlSpec, GmSpec, LangevinConfig
from app.tensor.tt_core import tt_to_dense


def test_gm_sample_statistics():
    print("Testing Gaussian mixture samples...")
    spec = GmSpec(d=2)
    s = gm_sample(spec, 20000, seed=0)
    assert s.N == 20000 and s.d == 2
    assert np.abs(s.data).max() <= spec.half_width
    assert np.allclose(s.data.mean(axis=0), -1.0 / 6.0, atol=0.02)

    x, outer, inner = gm_draw(spec, 20000, np.random.default_rng(1))
    freq = np.bincount(outer, minlength=3) / outer.size
    assert np.allclose(freq, [1 / 6, 1 / 3, 1 / 2], atol=0.02)
    assert abs(np.mean(inner == 0) - 2.0 / 3.0) < 0.02
    print("✅ Mixture samples have the expected mean and labels")


def test_gm_reproducible():
    print("Testing seeded mixture draws...")
    spec = GmSpec(d=3)
    a = gm_sample(spec, 100, seed=3).data
    b = gm_sample(spec, 100, seed=3).data
    c = gm_sample(spec, 100, seed=4).data
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    try:
        gm_sample(spec, 0)
        raise AssertionError("N = 0 should raise")
    except ConfigError:
        pass
    print("✅ Same seed, same samples")


def test_gm_truth():
    print("Testing the mixture ground truth...")
    spec = GmSpec(d=3)
    weights = component_weights(spec)
    assert weights.size == 6 and abs(weights.sum() - 1.0) < 1e-12

    basis = FourierBasis(25, spec.half_width)
    truth = gm_truth_tt(spec, basis)
    assert truth.ranks == [1, 6, 6, 1]
    model = gm_truth_model(spec, basis)
    assert abs(integrate(model) - 1.0) < 1e-6
    polynomial = gm_truth_model(spec, LegendreBasis(50, -spec.half_width, spec.half_width))
    assert rel_l2(polynomial, gm_grid_truth(spec)) < 1e-2

    grid_values = tt_to_dense(gm_grid_truth(spec, sqrt_weights=False)).as_array()
    assert abs(grid_values.sum() * spec.mesh ** 3 - 1.0) < 1e-2
    try:
        gm_truth_tt(spec, FourierBasis(5, 1.0))
        raise AssertionError("basis narrower than the box should raise")
    except ConfigError:
        pass
    print("✅ Truth tensor train has rank 6 and unit mass")


def test_gl1d_potential_value():
    print("Testing the 1D Ginzburg-Landau potential...")
    spec = GlSpec.gl1d(2)
    assert abs(gl_potential(spec, np.ones(2)) - 9 * spec.lam) < 1e-12
    assert abs(gl_potential(spec, np.ones(2)) - 0.27) < 1e-12

    rng = np.random.default_rng(0)
    x = rng.uniform(-1.5, 1.5, size=(5, 6))
    spec6 = GlSpec.gl1d(6)
    assert np.allclose(gl_potential(spec6, x), gl_potential(spec6, -x))
    print("✅ Potential matches its closed-form value")


def _finite_difference(spec, x, eps=1e-6):
    grad = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = eps
        grad[i] = (gl_potential(spec, x + e) - gl_potential(spec, x - e)) / (2 * eps)
    return grad


def test_gradients():
    print("Testing analytic gradients...")
    rng = np.random.default_rng(1)
    for spec in (GlSpec.gl1d(4), GlSpec.gl2d(3)):
        x = rng.uniform(-1.0, 1.0, size=spec.dim)
        analytic = gl_gradient(spec, x)
        numeric = _finite_difference(spec, x)
        assert np.allclose(analytic, numeric, rtol=1e-4, atol=1e-4)
        batch = rng.uniform(-1.0, 1.0, size=(3, spec.dim))
        assert gl_gradient(spec, batch).shape == (3, spec.dim)
    target = GinzburgLandau(GlSpec.gl2d(3))
    assert target.dim == 9 and target.describe()["kind"] == GlKind.GL2D.value
    print("✅ Gradients match finite differences")


def test_gl1d_grid_truth():
    print("Testing the transfer-matrix truth...")
    spec = GlSpec(kind=GlKind.GL1D, size=2, lam=0.03, beta=0.125, half_width=2.5, mesh=0.25)
    T = gl1d_grid_truth(spec, sqrt_weights=False)
    x = spec.grid().nodes()
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    V = gl_potential(spec, np.stack([X1.ravel(), X2.ravel()], axis=1)).reshape(X1.shape)
    expected = np.exp(-spec.beta * V)
    expected /= expected.sum() * spec.mesh ** 2
    assert np.allclose(tt_to_dense(T).as_array(), expected, rtol=1e-10)

    weighted = gl1d_grid_truth(spec)
    assert np.allclose(tt_to_dense(weighted).as_array(), expected * spec.mesh, rtol=1e-10)
    try:
        gl1d_grid_truth(GlSpec.gl2d(2))
        raise AssertionError("2D lattice has no transfer-matrix truth")
    except ConfigError:
        pass
    print("✅ Transfer-matrix truth equals the normalized Boltzmann weights")


def test_langevin_harmonic_covariance():
    print("Testing Langevin on a harmonic potential...")
    target = HarmonicPotential(2, beta=1.0)
    cfg = LangevinConfig(step=0.01, burn_in=1000, thinning=50, n_chains=64, seed=1)
    samples, report = langevin_run(target, cfg, 4000)
    assert samples.N == 4000 and report.kept == 4000
    cov = np.cov(samples.data.T)
    assert np.allclose(cov, np.eye(2), atol=0.15)
    assert report.steps_run >= cfg.burn_in + cfg.thinning * (4000 // cfg.n_chains)
    print("✅ Langevin chains reach N(0, I)")


def test_langevin_reproducible_and_in_box():
    print("Testing Langevin reproducibility on a 1D chain...")
    spec = GlSpec.gl1d(3)
    cfg = LangevinConfig(burn_in=200, thinning=2, n_chains=16, seed=0)
    a, report = langevin_run(spec, cfg, 300)
    b, _ = langevin_run(spec, cfg, 300)
    assert np.array_equal(a.data, b.data)
    assert np.abs(a.data).max() <= spec.half_width
    assert abs(report.step - 5e-3 / spec.beta) < 1e-15
    assert 0.0 < report.acceptance <= 1.0
    print("✅ Seeded chains are reproducible and stay in the box")


def test_langevin_divergence():
    print("Testing Langevin divergence detection...")
    cfg = LangevinConfig(step=3.0, burn_in=100, thinning=1, n_chains=4, seed=0, max_norm=1e3,
                         metropolis=False)
    chains = LangevinChains(HarmonicPotential(2), cfg)
    try:
        chains.thermalize(cfg.burn_in)
        raise AssertionError("unstable step should diverge")
    except NumericError as e:
        assert "smaller" in str(e)
    print("✅ Divergence raises NumericError")


def test_metropolis_removes_step_bias():
    print("Testing Metropolis-adjusted Langevin at a coarse step...")
    target = HarmonicPotential(1, beta=1.0)
    plain = LangevinConfig(step=0.5, burn_in=200, thinning=5, n_chains=200, seed=3, metropolis=False)
    adjusted = plain.model_copy(update={"metropolis": True})
    biased, plain_report = langevin_run(target, plain, 20000)
    exact, report = langevin_run(target, adjusted, 20000)
    # plain Euler-Maruyama at step 0.5 has stationary variance 4/3
    assert np.var(biased.data) > 1.2
    assert abs(np.var(exact.data) - 1.0) < 0.06
    assert plain_report.moves_accepted is None and not plain_report.metropolis
    assert report.metropolis and 0.5 < report.moves_accepted < 1.0
    assert report.rejected_outside == 0

    again, _ = langevin_run(target, adjusted, 20000)
    assert np.array_equal(again.data, exact.data)
    print("✅ Metropolis moves sample the exact Boltzmann law")


def test_moment_drift():
    print("Testing moment drift...")
    assert moment_drift(np.ones((10, 2))) == 0.0
    X = np.vstack([np.ones((5, 2)), 2 * np.ones((5, 2))])
    assert abs(moment_drift(X) - 0.75) < 1e-12
    print("✅ Drift compares the two halves of a run")


def main():
    print("🧪 Testing Generators")
    print("=" * 50)
    tests = [
        test_gm_sample_statistics,
        test_gm_reproducible,
        test_gm_truth,
        test_gl1d_potential_value,
        test_gradients,
        test_gl1d_grid_truth,
        test_langevin_harmonic_covariance,
        test_langevin_reproducible_and_in_box,
        test_langevin_divergence,
        test_metropolis_removes_step_bias,
        test_moment_drift,
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
