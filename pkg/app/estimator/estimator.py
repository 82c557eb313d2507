"""
Convolution, compression and deconvolution steps of the tensor-train density estimator
"""
import logging
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np

import config
from app.basis.families import (
    BasisFamily, MeanField, feature_blocks, integral_vector,
)
from app.compress.common import CoreCallback, block_matrices, dense_coefficients
from app.compress.dispatch import compress
from app.errors import ConfigError, ShapeError
from app.estimator.density_ops import normalize
from app.estimator.model import DensityModel, SampleSet
from app.models.config_models import CompressSpec, GridSpec
from app.tensor.tt_core import DEFAULT_CONVENTION, DenseTensor, SvdConvention, TensorTrain
from app.utils.logger import get_structured_logger
from app.utils.tracing import add_run_metadata, get_current_run_id

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SoftWeight:
    """alpha^k on every k-cluster coefficient"""
    alpha: float
    d: int
    n: int

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigError(f"soft weight needs alpha > 0, got {self.alpha}")

    def weight(self, l: Sequence[int]) -> float:
        return float(self.alpha ** sum(1 for v in l if v))

    def order_weights(self) -> np.ndarray:
        """Squared weight of a coefficient as a function of its cluster order"""
        return self.alpha ** (2.0 * np.arange(self.d + 1))


@dataclass(frozen=True)
class HardWeight:
    """Indicator of the coefficients with at most K non-constant factors"""
    K: int
    d: int
    n: int

    def __post_init__(self):
        if self.K < 0:
            raise ConfigError(f"hard weight needs K >= 0, got {self.K}")

    def weight(self, l: Sequence[int]) -> float:
        return 1.0 if sum(1 for v in l if v) <= self.K else 0.0

    def order_weights(self) -> np.ndarray:
        return (np.arange(self.d + 1) <= self.K).astype(float)


Weight = Union[SoftWeight, HardWeight]


def alpha_default(n: int, d: int, C: Optional[float] = None) -> float:
    """alpha = sqrt(C / ((n - 1) n d))"""
    C = config.DEFAULT_ALPHA_C if C is None else C
    if n < 2:
        raise ConfigError(f"alpha_default needs n >= 2, got {n}")
    if d < 1 or C <= 0:
        raise ConfigError(f"alpha_default needs d >= 1 and C > 0, got d={d}, C={C}")
    return float(np.sqrt(C / ((n - 1) * n * d)))


def _check_bases(s: SampleSet, bases: Sequence[BasisFamily]) -> None:
    if len(bases) != s.d:
        raise ShapeError(f"{len(bases)} bases for {s.d}-dimensional samples")


def coeff_entry_oracle(s: SampleSet, l: Sequence[int], w: Weight,
                       bases: Sequence[BasisFamily]) -> float:
    """Brute-force w(l) (1/N) sum_i prod_j phi_{l_j}(x_ij) for a 0-based multi-index l"""
    _check_bases(s, bases)
    if len(l) != s.d:
        raise ShapeError(f"multi-index of length {len(l)} for d={s.d}")
    terms = np.ones(s.N)
    for j, (b, lj) in enumerate(zip(bases, l)):
        if not 0 <= lj < b.n:
            raise ShapeError(f"index {lj} outside basis {j} of size {b.n}")
        if lj:
            terms *= b.evaluate(s.data[:, j])[:, lj]
    return w.weight(l) * float(terms.mean())


def fit(s: SampleSet, bases: Sequence[BasisFamily], alpha: float, spec: CompressSpec,
        conv: SvdConvention = DEFAULT_CONVENTION,
        on_core: Optional[CoreCallback] = None) -> TensorTrain:
    """c_tilde = TT-compress(diag(w_alpha) Phi^T p_hat)"""
    _check_bases(s, bases)
    run_id = get_current_run_id()
    if on_core is None and run_id is not None:
        events = get_structured_logger()

        def on_core(j: int, rank: int, spectrum: np.ndarray) -> None:
            events.log_compress_core(run_id, spec.algo.value, j, rank,
                                     [float(v) for v in spectrum[:5]])

    t0 = time.perf_counter()
    blocks = feature_blocks(s.data, list(bases), alpha)
    coeff = compress(blocks, spec, conv, on_core)
    elapsed_ms = (time.perf_counter() - t0) * 1000
    logger.info(f"fit algo={spec.algo.value} N={s.N} d={s.d} ranks={coeff.ranks} "
                f"in {elapsed_ms:.1f} ms")
    add_run_metadata("fit_ms", elapsed_ms)
    if run_id is not None:
        get_structured_logger().log_fit(run_id, spec.algo.value, s.N, s.d, coeff.ranks, elapsed_ms)
    return coeff


def deconvolution_weights(c: TensorTrain, alpha: float, lam: float = 0.0) -> List[np.ndarray]:
    if lam < 0:
        raise ConfigError(f"lambda must be >= 0, got {lam}")
    if alpha + lam <= 0:
        raise ConfigError("alpha + lambda must be positive")
    weights = []
    for n in c.mode_sizes:
        w = np.full(n, 1.0 / (alpha + lam))
        w[0] = 1.0 / (1.0 + lam)
        weights.append(w)
    return weights


def deconvolve(c: TensorTrain, alpha: float, lam: float, bases: Sequence[BasisFamily],
               mean_fields: Optional[Sequence[MeanField]] = None,
               grids: Optional[Sequence[GridSpec]] = None) -> DensityModel:
    """Undo the alpha weighting: index 0 scaled by 1/(1+lam), the rest by 1/(alpha+lam)"""
    if len(bases) != c.d:
        raise ShapeError(f"{len(bases)} bases for a {c.d}-core tensor train")
    coeff = c.scale_modes(deconvolution_weights(c, alpha, lam))
    mean_fields = [b.mean_field() for b in bases] if mean_fields is None else list(mean_fields)
    grids = [b.native_grid() for b in bases] if grids is None else list(grids)
    return DensityModel(coeff=coeff, bases=list(bases), mean_fields=mean_fields,
                        grids=grids, alpha=float(alpha), lam=float(lam))


def hard_project_oracle(s: SampleSet, K: int, bases: Sequence[BasisFamily],
                        cap: Optional[int] = None) -> DenseTensor:
    """Full coefficient tensor of the hard-threshold estimator of cluster order K"""
    _check_bases(s, bases)
    full = dense_coefficients(feature_blocks(s.data, list(bases), 1.0), cap)
    A = full.as_array()
    order = np.zeros(A.shape, dtype=int)
    for j, n in enumerate(A.shape):
        shape = [1] * A.ndim
        shape[j] = n
        order = order + (np.arange(n) > 0).reshape(shape)
    return DenseTensor(full.mode_sizes, np.where(order <= K, A, 0.0).reshape(-1))


def _order_sums(c0: np.ndarray, c1: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """sum_k omega_k e_k, e_k the t^k coefficient of prod_j (c0_j + c1_j t), over the last axis"""
    K = omega.size - 1
    poly = np.zeros(c0.shape[:-1] + (K + 1,))
    poly[..., 0] = 1.0
    for j in range(c0.shape[-1]):
        a = c0[..., j, None]
        b = c1[..., j, None]
        shifted = np.concatenate([np.zeros_like(poly[..., :1]), poly[..., :-1]], axis=-1)
        poly = a * poly + b * shifted
    return poly @ omega


def weighted_projection_error(s: SampleSet, bases: Sequence[BasisFamily], weight: Weight,
                              truth_means: Optional[Sequence[np.ndarray]] = None,
                              block: int = 256) -> float:
    """||diag(w) Phi^T (p_hat - p*)||_F^2 for a product-form truth p*.

    Args:
        s: samples
        bases: one family per dimension
        weight: SoftWeight or HardWeight
        truth_means: E_{p*_j}[phi_l] per dimension (default: the mean-field of each basis)
        block: row block of the O(N^2) pair sums

    Returns:
        Squared weighted Frobenius error, computed without forming any n^d tensor
    """
    _check_bases(s, bases)
    if truth_means is None:
        truth_means = [integral_vector(b) for b in bases]
    omega = weight.order_weights()
    mats = block_matrices(feature_blocks(s.data, list(bases), 1.0))
    N, d = s.N, s.d
    tails = [m[:, 1:] for m in mats]
    m0 = np.array([m[0] for m in truth_means])
    m_tail = [np.asarray(m, dtype=float)[1:] for m in truth_means]

    self_sum = 0.0
    for start in range(0, N, block):
        stop = min(start + block, N)
        c1 = np.stack([t[start:stop] @ t.T for t in tails], axis=-1)
        self_sum += float(_order_sums(np.ones_like(c1), c1, omega).sum())

    c1_cross = np.stack([t @ mt for t, mt in zip(tails, m_tail)], axis=-1)
    c0_cross = np.broadcast_to(m0, c1_cross.shape)
    cross = float(_order_sums(c0_cross, c1_cross, omega).mean())

    c1_truth = np.array([mt @ mt for mt in m_tail])
    truth = float(_order_sums(m0 ** 2, c1_truth, omega))

    return self_sum / (N * N) - 2.0 * cross + truth


def estimate_density(s: SampleSet, bases: Sequence[BasisFamily], alpha: float,
                     spec: CompressSpec, lam: float = 0.0,
                     mean_fields: Optional[Sequence[MeanField]] = None,
                     grids: Optional[Sequence[GridSpec]] = None,
                     conv: SvdConvention = DEFAULT_CONVENTION) -> DensityModel:
    """fit, deconvolve and normalize in one call"""
    coeff = fit(s, bases, alpha, spec, conv)
    model = deconvolve(coeff, alpha, lam, bases, mean_fields, grids)
    return normalize(model)
