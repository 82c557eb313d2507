"""
Gaussian mixture data on the box [-L, L]^d and its exact tensor-train ground truth
"""
import logging
from typing import List, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import legendre
from scipy import stats

from app.basis.families import BasisFamily
from app.errors import ConfigError
from app.estimator.model import DensityModel, SampleSet
from app.models.config_models import GmSpec, GridSpec
from app.tensor.tt_core import TensorTrain, tt_from_rank1_terms

logger = logging.getLogger(__name__)

# Gauss-Legendre nodes for the 1D coefficient integrals
QUAD_NODES = 512
MAX_REDRAW_ROUNDS = 1000


def gm_draw(spec: GmSpec, N: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rejection-sampled mixture draws with their (outer, inner) component labels"""
    if N < 1:
        raise ConfigError(f"sample count must be >= 1, got {N}")
    sigmas = np.asarray(spec.sigmas)
    means = np.asarray(spec.means)
    L = spec.half_width

    x = np.empty((N, spec.d))
    outer = np.empty(N, dtype=int)
    inner = np.empty(N, dtype=int)
    pending = np.arange(N)
    for _ in range(MAX_REDRAW_ROUNDS):
        k = pending.size
        o = rng.choice(sigmas.size, size=k, p=spec.outer_weights)
        i = rng.choice(means.size, size=k, p=spec.inner_weights)
        draw = means[i][:, None] + sigmas[o][:, None] * rng.standard_normal((k, spec.d))
        x[pending], outer[pending], inner[pending] = draw, o, i
        outside = (np.abs(draw) > L).any(axis=1)
        pending = pending[outside]
        if pending.size == 0:
            return x, outer, inner
    raise ConfigError(f"box [-{L}, {L}]^{spec.d} keeps too little of the mixture mass")


def gm_sample(spec: GmSpec, N: int, seed: int = 0) -> SampleSet:
    """N draws of the truncated mixture (PCG64 stream of the seed)"""
    x, _, _ = gm_draw(spec, N, np.random.default_rng(seed))
    return SampleSet(x, spec.grid())


def _box_mass(spec: GmSpec, mu: float, sigma: float) -> float:
    L = spec.half_width
    return float(stats.norm.cdf(L, mu, sigma) - stats.norm.cdf(-L, mu, sigma))


def component_weights(spec: GmSpec) -> np.ndarray:
    """Weights of the separable terms after truncating the whole mixture to the box"""
    raw = np.array([w * _box_mass(spec, mu, sigma) ** spec.d for w, mu, sigma in spec.components()])
    return raw / raw.sum()


def truncated_pdf(spec: GmSpec, mu: float, sigma: float, x: np.ndarray) -> np.ndarray:
    """1D Gaussian density restricted to [-L, L] and renormalized"""
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) <= spec.half_width
    return np.where(inside, stats.norm.pdf(x, mu, sigma) / _box_mass(spec, mu, sigma), 0.0)


def component_coefficients(spec: GmSpec, basis: BasisFamily) -> np.ndarray:
    """(6, n) table of integral g_c(x) phi_l(x) dx, one row per separable component"""
    if basis.lo > -spec.half_width + 1e-12 or basis.hi < spec.half_width - 1e-12:
        raise ConfigError(f"basis domain [{basis.lo}, {basis.hi}] does not cover the mixture box")
    t, w = legendre.leggauss(QUAD_NODES)
    L = spec.half_width
    x = L * t
    w = L * w
    phi = basis.evaluate(x)
    rows = [(w * truncated_pdf(spec, mu, sigma, x)) @ phi for _, mu, sigma in spec.components()]
    return np.array(rows)


def _per_dim(basis: Union[BasisFamily, Sequence[BasisFamily]], d: int) -> List[BasisFamily]:
    if isinstance(basis, BasisFamily):
        return [basis] * d
    bases = list(basis)
    if len(bases) != d:
        raise ConfigError(f"{len(bases)} bases for a {d}-dimensional mixture")
    return bases


def gm_truth_tt(spec: GmSpec, basis: Union[BasisFamily, Sequence[BasisFamily]]) -> TensorTrain:
    """Coefficient tensor train of the truncated mixture, rank = number of components"""
    bases = _per_dim(basis, spec.d)
    vectors = [component_coefficients(spec, b) for b in bases]
    truth = tt_from_rank1_terms(component_weights(spec), vectors)
    logger.debug(f"GM truth TT d={spec.d} ranks={truth.ranks}")
    return truth


def gm_truth_model(spec: GmSpec, basis: Union[BasisFamily, Sequence[BasisFamily]]) -> DensityModel:
    """Truth coefficients wrapped as a density model on the mixture grid"""
    bases = _per_dim(basis, spec.d)
    return DensityModel(
        coeff=gm_truth_tt(spec, bases),
        bases=bases,
        mean_fields=[b.mean_field() for b in bases],
        grids=[spec.grid()] * spec.d,
        alpha=1.0,
        metadata={"truth": "gaussian_mixture"},
    )


def gm_grid_truth(spec: GmSpec, grids: Sequence[GridSpec] = None,
                  sqrt_weights: bool = True) -> TensorTrain:
    """Tensor train of exact mixture values on grid nodes (optionally times sqrt(mesh))"""
    grids = [spec.grid()] * spec.d if grids is None else list(grids)
    if len(grids) != spec.d:
        raise ConfigError(f"{len(grids)} grids for a {spec.d}-dimensional mixture")
    vectors = []
    for g in grids:
        x = g.nodes()
        scale = np.sqrt(g.weights()) if sqrt_weights else 1.0
        vectors.append(np.array([truncated_pdf(spec, mu, sigma, x) * scale
                                 for _, mu, sigma in spec.components()]))
    return tt_from_rank1_terms(component_weights(spec), vectors)
