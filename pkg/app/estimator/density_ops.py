"""
Operations on fitted density models: evaluation, grid quadrature, marginals,
normalization, moments and conditional sampling.

All integrals use the model grid (cell midpoints), so marginals, the normalizer,
moments and the sampler share one discretization.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

import config
from app.errors import ConfigError, NumericError
from app.estimator.model import DensityModel, SampleSet
from app.models.config_models import GridSpec, SamplerDiagnostics
from app.tensor.tt_core import TensorTrain, tt_contract

logger = logging.getLogger(__name__)


def eval_points(m: DensityModel, x: np.ndarray) -> np.ndarray:
    """Raw (unclipped) density values at a batch of input points"""
    z = m.to_reduced(x)
    m.check_domain(z)
    message = np.ones((z.shape[0], 1))
    for j, core in enumerate(m.coeff.cores):
        F = m.univariate_factors(j, z[:, j])
        message = np.einsum("ia,anb,in->ib", message, core, F, optimize=True)
    return message[:, 0] / m.norm_const


def eval_point(m: DensityModel, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float).reshape(1, -1)
    return float(eval_points(m, x)[0])


def quadrature_vectors(m: DensityModel, power: int = 0) -> List[np.ndarray]:
    """q_j(l) = sum_g mesh mu_j(x_g) phi_l(x_g) x_g^power on each model grid"""
    vectors = []
    for j, g in enumerate(m.grids):
        x = g.nodes()
        vectors.append(m.univariate_factors(j, x).T @ (g.weights() * x ** power))
    return vectors


def tabulated_cores(m: DensityModel, sqrt_weights: bool = False) -> List[np.ndarray]:
    """C_j(a, g, b) = sum_l G_j(a, l, b) mu_j(x_g) phi_l(x_g), optionally times sqrt(mesh)"""
    cores = []
    for j, (core, g) in enumerate(zip(m.coeff.cores, m.grids)):
        F = m.univariate_factors(j, g.nodes())
        if sqrt_weights:
            F = F * np.sqrt(g.weights())[:, None]
        cores.append(np.einsum("anb,gn->agb", core, F, optimize=True))
    return cores


def grid_tt(m: DensityModel, sqrt_weights: bool = False) -> TensorTrain:
    """Tensor train of density values on the model grid (normalizer folded into core 1)"""
    cores = tabulated_cores(m, sqrt_weights)
    cores[0] = cores[0] / m.norm_const
    return TensorTrain(cores)


def integrate(m: DensityModel) -> float:
    """Total mass of the model by grid quadrature"""
    return tt_contract(m.coeff, quadrature_vectors(m)) / m.norm_const


def normalize(m: DensityModel) -> DensityModel:
    """Set Z so that the model integrates to one on its grid"""
    total = integrate(m)
    if not np.isfinite(total) or total <= 0:
        raise NumericError(f"cannot normalize a model with total mass {total}")
    return m.with_updates(norm_const=m.norm_const * total)


def marginal(m: DensityModel, k: int) -> DensityModel:
    """Model over the first k coordinates, the rest integrated out against their grids"""
    if not 1 <= k <= m.d:
        raise ConfigError(f"marginal order {k} outside [1, {m.d}]")
    if k == m.d:
        return m.with_updates()
    q = quadrature_vectors(m)
    message = np.ones(1)
    for j in range(m.d - 1, k - 1, -1):
        message = np.einsum("anb,n,b->a", m.coeff.cores[j], q[j], message)
    cores = [c.copy() for c in m.coeff.cores[:k]]
    cores[-1] = np.einsum("anb,b->an", cores[-1], message)[:, :, None]
    pca = m.pca.truncated(k) if m.pca is not None else None
    return DensityModel(
        coeff=TensorTrain(cores), bases=m.bases[:k], mean_fields=m.mean_fields[:k],
        grids=m.grids[:k], alpha=m.alpha, lam=m.lam, pca=pca,
        norm_const=m.norm_const, metadata=dict(m.metadata),
    )


def _mode_matrices(m: DensityModel, q: List[np.ndarray]) -> List[np.ndarray]:
    return [np.einsum("anb,n->ab", core, v) for core, v in zip(m.coeff.cores, q)]


def moment1(m: DensityModel) -> np.ndarray:
    """E[x] under the model (input coordinates)"""
    base = _mode_matrices(m, quadrature_vectors(m))
    first = _mode_matrices(m, quadrature_vectors(m, 1))
    left, right = _messages(base)
    mass = float(left[-1][0])
    if mass <= 0:
        raise NumericError(f"model has nonpositive mass {mass}")
    mean_z = np.array([float(left[j] @ first[j] @ right[j + 1]) for j in range(m.d)]) / mass
    if m.pca is None:
        return mean_z
    return m.pca.center + m.pca.Q @ mean_z


def _messages(mats: List[np.ndarray]) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """left[j] = prod of mats before j (row vector), right[j] = prod of mats from j on (column)"""
    d = len(mats)
    left = [np.ones(1)]
    for M in mats:
        left.append(left[-1] @ M)
    right = [None] * (d + 1)
    right[d] = np.ones(1)
    for j in range(d - 1, -1, -1):
        right[j] = mats[j] @ right[j + 1]
    return left, right


def moment2(source: Union[DensityModel, SampleSet, np.ndarray]) -> np.ndarray:
    """E[x x^T] under a model (TT quadrature) or a sample set ((1/N) X^T X)"""
    if not isinstance(source, DensityModel):
        X = source.data if isinstance(source, SampleSet) else np.atleast_2d(np.asarray(source, float))
        return X.T @ X / X.shape[0]

    m = source
    base = _mode_matrices(m, quadrature_vectors(m))
    first = _mode_matrices(m, quadrature_vectors(m, 1))
    second = _mode_matrices(m, quadrature_vectors(m, 2))
    left, right = _messages(base)
    mass = float(left[-1][0])
    if mass <= 0:
        raise NumericError(f"model has nonpositive mass {mass}")

    d = m.d
    S = np.zeros((d, d))
    for j in range(d):
        S[j, j] = float(left[j] @ second[j] @ right[j + 1])
        v = left[j] @ first[j]
        for k in range(j + 1, d):
            S[j, k] = S[k, j] = float(v @ first[k] @ right[k + 1])
            v = v @ base[k]
    S /= mass
    if m.pca is None:
        return S
    mean_z = np.array([float(left[j] @ first[j] @ right[j + 1]) for j in range(d)]) / mass
    c, Q = m.pca.center, m.pca.Q
    Qm = Q @ mean_z
    return np.outer(c, c) + np.outer(c, Qm) + np.outer(Qm, c) + Q @ S @ Q.T


@dataclass
class ConditionalSamplerState:
    """Left messages of a batch of partially drawn samples"""
    left_message: np.ndarray
    grid: GridSpec
    clipped_mass_total: float = 0.0


def _philox(seed: int, chunk_id: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, chunk_id])))


def _right_messages(cores: List[np.ndarray], grids: List[GridSpec]) -> List[np.ndarray]:
    d = len(cores)
    right = [None] * d
    right[d - 1] = np.ones(1)
    for j in range(d - 2, -1, -1):
        integrated = np.einsum("agb,g->ab", cores[j + 1], grids[j + 1].weights())
        right[j] = integrated @ right[j + 1]
    return right


def _sample_chunk(cores: List[np.ndarray], right: List[np.ndarray], grids: List[GridSpec],
                  count: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    d = len(cores)
    z = np.empty((count, d))
    clipped = np.zeros(count)
    alive = np.ones(count, dtype=bool)
    state = ConditionalSamplerState(left_message=np.ones((count, 1)), grid=grids[0])
    for j in range(d):
        g = grids[j]
        state.grid = g
        f = np.einsum("sa,agb,b->sg", state.left_message, cores[j], right[j], optimize=True)
        mesh = g.weights()
        positive = np.clip(f, 0.0, None) @ mesh
        negative = np.clip(-f, 0.0, None) @ mesh
        ok = positive > 0
        clipped += np.where(ok, negative / np.where(ok, positive + negative, 1.0), 0.0)
        alive &= ok

        pdf = np.clip(f, 0.0, None) * mesh
        cdf = np.cumsum(pdf, axis=1)
        total = np.where(ok, cdf[:, -1], 1.0)
        u = rng.random(count) * total
        cell = np.minimum((cdf <= u[:, None]).sum(axis=1), g.points - 1)
        z[:, j] = g.lo + (cell + rng.random(count)) * g.mesh

        picked = cores[j][:, cell, :]
        message = np.einsum("sa,asb->sb", state.left_message, picked)
        scale = np.abs(message).max(axis=1, keepdims=True)
        state.left_message = message / np.where(scale > 0, scale, 1.0)
    state.clipped_mass_total = float(clipped[alive].sum())
    return z, clipped, alive


def conditional_sample(m: DensityModel, count: int, seed: int = 0,
                       chunk: Optional[int] = None) -> Tuple[SampleSet, SamplerDiagnostics]:
    """Draw samples coordinate by coordinate from the grid conditionals of the model.

    Negative conditional values are clipped to zero per step and the clipped share is
    reported. Each chunk of samples uses its own Philox stream keyed by (seed, chunk id),
    so results do not depend on how chunks are scheduled.
    """
    if count < 1:
        raise ConfigError(f"sample count must be >= 1, got {count}")
    total = integrate(m)
    if abs(total - 1.0) > 1e-6:
        logger.warning(f"sampling from a model with total mass {total:.6g}")

    chunk = chunk or config.SAMPLER_CHUNK
    cores = tabulated_cores(m)
    right = _right_messages(cores, m.grids)

    parts, clipped_total, aborted = [], 0.0, 0
    for chunk_id, start in enumerate(range(0, count, chunk)):
        size = min(chunk, count - start)
        z, clipped, alive = _sample_chunk(cores, right, m.grids, size, _philox(seed, chunk_id))
        parts.append(z[alive])
        clipped_total += float(clipped[alive].sum())
        aborted += int(np.count_nonzero(~alive))

    z = np.vstack(parts)
    x = m.from_reduced(z)
    diagnostics = SamplerDiagnostics(count=x.shape[0], requested=count,
                                     clipped_mass_total=clipped_total, aborted=aborted)
    if aborted:
        logger.warning(f"{aborted} of {count} samples aborted on nonpositive conditional mass")
    if diagnostics.clipped_mass_mean > 0.05:
        logger.warning(f"mean clipped mass {diagnostics.clipped_mass_mean:.4f} per sample")
    box = m.grids if m.pca is None else None
    if x.shape[0] == 0:
        raise NumericError("every sample aborted: the model has no positive conditional mass")
    return SampleSet(x, box), diagnostics
