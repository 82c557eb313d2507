"""
General-distribution pipeline: PCA rotation, KDE marginals, orthonormalized
bases, then fit / deconvolve / normalize in the rotated coordinates.
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Union

import numpy as np
from scipy import stats

import config
from app.basis.families import MeanField, orthonormalize_wrt
from app.errors import ConfigError, NumericError, ShapeError
from app.estimator.density_ops import normalize
from app.estimator.estimator import deconvolve, fit
from app.estimator.model import DensityModel, SampleSet
from app.models.config_models import GeneralFitConfig, GridSpec, MeanFieldKind, PcaMethod
from app.tensor.tt_core import symmetric_eig
from app.utils.encoding import decode_array, encode_array

logger = logging.getLogger(__name__)


@dataclass
class PcaModel:
    """z = Q^T (x - center) with column-orthonormal Q (d x d')"""
    Q: np.ndarray
    center: np.ndarray
    eigvals: np.ndarray

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.Q.shape[0]:
            raise ShapeError(f"points have {x.shape[1]} coordinates, PCA expects {self.Q.shape[0]}")
        return (x - self.center) @ self.Q

    def inverse_transform(self, z: np.ndarray) -> np.ndarray:
        return self.center + np.atleast_2d(z) @ self.Q.T

    def truncated(self, k: int) -> "PcaModel":
        return PcaModel(self.Q[:, :k].copy(), self.center.copy(), self.eigvals[:k].copy())

    @classmethod
    def identity(cls, d: int, k: Optional[int] = None,
                 center: Optional[np.ndarray] = None) -> "PcaModel":
        k = d if k is None else k
        return cls(np.eye(d)[:, :k], np.zeros(d) if center is None else center, np.ones(k))

    def to_metadata(self) -> Dict[str, Any]:
        return {
            "Q": encode_array(self.Q),
            "center": encode_array(self.center),
            "eigvals": encode_array(self.eigvals),
        }

    @classmethod
    def from_metadata(cls, meta: Dict[str, Any]) -> "PcaModel":
        return cls(decode_array(meta["Q"]), decode_array(meta["center"]), decode_array(meta["eigvals"]))


@dataclass
class Kde1d:
    """Gaussian KDE tabulated on a grid with unit grid mass"""
    grid: GridSpec
    density: np.ndarray
    bandwidth: float

    def mean_field(self) -> MeanField:
        return MeanField.tabulated(self.grid, self.density)


def _as_array(s: Union[SampleSet, np.ndarray]) -> np.ndarray:
    return s.data if isinstance(s, SampleSet) else np.atleast_2d(np.asarray(s, dtype=float))


def streaming_moments(X: np.ndarray, chunk: int) -> tuple:
    """Mean and scatter matrix by chunked accumulation with pairwise merges in fixed order"""
    d = X.shape[1]
    count, mean, scatter = 0, np.zeros(d), np.zeros((d, d))
    for start in range(0, X.shape[0], chunk):
        block = X[start:start + chunk]
        nb = block.shape[0]
        mb = block.mean(axis=0)
        centered = block - mb
        delta = mb - mean
        total = count + nb
        scatter += centered.T @ centered + np.outer(delta, delta) * (count * nb / total)
        mean = mean + delta * (nb / total)
        count = total
    return mean, scatter


def pca_fit(s: Union[SampleSet, np.ndarray], d_reduced: Optional[int] = None,
            method: PcaMethod = PcaMethod.EXACT, center: bool = True,
            chunk: Optional[int] = None) -> PcaModel:
    """Top principal directions of the (centered) sample covariance"""
    X = _as_array(s)
    N, d = X.shape
    d_reduced = d if d_reduced is None else d_reduced
    if not 1 <= d_reduced <= d:
        raise ConfigError(f"reduced dimension {d_reduced} outside [1, {d}]")
    if N < 2:
        raise ConfigError("PCA needs at least two samples")

    if PcaMethod(method) == PcaMethod.STREAMING:
        mean, scatter = streaming_moments(X, chunk or config.SAMPLER_CHUNK)
        if not center:
            scatter = scatter + N * np.outer(mean, mean)
    else:
        mean = X.mean(axis=0)
        Xc = X - mean if center else X
        scatter = Xc.T @ Xc
    cov = scatter / (N - 1)
    if not np.trace(cov) > 0:
        raise NumericError("zero-variance data cannot be rotated")
    w, Q = symmetric_eig(cov, d_reduced)
    logger.debug(f"PCA spectrum head {w[:5]}")
    return PcaModel(Q=Q, center=mean if center else np.zeros(d), eigvals=np.clip(w, 0.0, None))


def silverman_bandwidth(x: np.ndarray) -> float:
    """1.06 sigma N^(-1/5)"""
    return 1.06 * float(np.std(x, ddof=1)) * x.size ** (-0.2)


def kde1d(samples_j: np.ndarray, grid: GridSpec, bandwidth: Optional[float] = None) -> Kde1d:
    """Gaussian kernel density estimate tabulated on grid and renormalized to unit grid mass"""
    x = np.asarray(samples_j, dtype=float).reshape(-1)
    if x.size < 2:
        raise ConfigError("KDE needs at least two samples")
    sigma = float(np.std(x, ddof=1))
    if not sigma > 0:
        raise NumericError("KDE of zero-variance data")
    h = silverman_bandwidth(x) if bandwidth is None else float(bandwidth)
    if not h > 0:
        raise ConfigError(f"KDE bandwidth must be positive, got {h}")
    kde = stats.gaussian_kde(x, bw_method=h / sigma)
    density = np.clip(kde(grid.nodes()), 0.0, None)
    mass = float(density.sum() * grid.mesh)
    if not mass > 0:
        raise NumericError("KDE has no mass on the grid")
    return Kde1d(grid=grid, density=density / mass, bandwidth=h)


def box_from_samples(z: np.ndarray, mesh: float, margin: float = 0.05) -> List[GridSpec]:
    """Per-coordinate grid covering the data padded by margin * range, snapped to the mesh"""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    grids = []
    for j in range(z.shape[1]):
        lo, hi = float(z[:, j].min()), float(z[:, j].max())
        span = hi - lo
        if not span > 0:
            raise NumericError(f"coordinate {j} has zero range")
        lo = np.floor((lo - margin * span) / mesh) * mesh
        hi = np.ceil((hi + margin * span) / mesh) * mesh
        grids.append(GridSpec(lo=float(lo), hi=float(hi), mesh=mesh))
    return grids


def fit_general(s: SampleSet, cfg: GeneralFitConfig) -> DensityModel:
    """PCA -> per-coordinate KDE -> orthonormalized bases -> fit -> deconvolve -> normalize"""
    X = s.data
    d = X.shape[1]
    d_reduced = cfg.pca_dim or d
    if cfg.rotate:
        pca = pca_fit(X, d_reduced, cfg.pca_method, center=cfg.center)
    else:
        pca = PcaModel.identity(d, d_reduced, X.mean(axis=0) if cfg.center else None)
    z = pca.transform(X)

    if cfg.uniform_half_width is not None:
        grids = [GridSpec.symmetric(cfg.uniform_half_width, cfg.mesh)] * d_reduced
    else:
        grids = box_from_samples(z, cfg.mesh, cfg.margin)

    mean_fields, bases = [], []
    for j, g in enumerate(grids):
        if cfg.mean_field == MeanFieldKind.KDE:
            weight = kde1d(z[:, j], g, cfg.kde_bandwidth).density
        else:
            weight = np.full(g.points, 1.0 / g.width)
        bases.append(orthonormalize_wrt(weight, g, cfg.nbasis))
        mean_fields.append(MeanField.tabulated(g, weight))

    reduced = SampleSet(z, grids)
    coeff = fit(reduced, bases, cfg.alpha, cfg.compress)
    model = deconvolve(coeff, cfg.alpha, cfg.lam, bases, mean_fields, grids)
    model = model.with_updates(pca=pca, metadata={"pipeline": "general",
                                                  "mean_field": cfg.mean_field.value})
    logger.info(f"fit_general d={d} d'={d_reduced} nbasis={cfg.nbasis} ranks={coeff.ranks}")
    return normalize(model)
