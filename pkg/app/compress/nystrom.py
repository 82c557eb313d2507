"""
TT-SVD-kn: the sample kernel E_j is replaced by its Nystrom cross approximation
M_j W_j^+ M_j^T built on one fixed set of r_tilde sampled sample-indices.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

import config
from app.compress.common import (
    BlockLike, CoreCallback, SuffixRecursion, block_matrices, core_from_gram, sweep,
    validate_ranks,
)
from app.errors import NumericError, RankError
from app.tensor.tt_core import DEFAULT_CONVENTION, SvdConvention, TensorTrain

logger = logging.getLogger(__name__)


def sample_index_set(N: int, size: int, seed: int) -> np.ndarray:
    """Sorted indices drawn uniformly without replacement"""
    if size > N:
        raise RankError(f"sketch size {size} exceeds the sample count {N}")
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(N, size=size, replace=False))


@dataclass
class NystromFactors:
    """Columns M = E[:, I] and core W = E[I, I] of a symmetric kernel"""
    I: np.ndarray
    M: np.ndarray
    W: np.ndarray

    @classmethod
    def from_columns(cls, I: np.ndarray, M: np.ndarray) -> "NystromFactors":
        W = M[I]
        return cls(I=I, M=M, W=0.5 * (W + W.T))

    def pinv_factor(self, rel_tol: float) -> np.ndarray:
        """F with W^+ = F F^T, keeping eigenvalues above rel_tol * lambda_max"""
        w, V = linalg.eigh(self.W)
        top = w.max() if w.size else 0.0
        if not top > 0:
            raise NumericError("Nystrom core W is numerically zero")
        keep = w > rel_tol * top
        return V[:, keep] / np.sqrt(w[keep])

    def approx(self, rel_tol: float = 1e-10) -> np.ndarray:
        """M W^+ M^T"""
        X = self.M @ self.pinv_factor(rel_tol)
        return X @ X.T

    def projected_gram(self, D: np.ndarray, rel_tol: float) -> np.ndarray:
        """(1/N^2) D^T M W^+ M^T D"""
        N = D.shape[0]
        X = (D.T @ self.M) @ self.pinv_factor(rel_tol)
        return (X @ X.T) / (N * N)


def kernel_columns(mats: Sequence[np.ndarray], I: np.ndarray) -> SuffixRecursion:
    """M_j = Hadamard product over m > j of Phi_m Phi_m[I]^T, all-ones for j = d-1"""
    N = mats[0].shape[0]
    d = len(mats)

    def step(j: int, M: np.ndarray) -> np.ndarray:
        phi = mats[j + 1]
        return M * (phi @ phi[I].T)

    return SuffixRecursion(d, lambda: np.ones((N, I.size)), step)


def tt_svd_kn(blocks: Sequence[BlockLike], ranks: Sequence[int],
              sketch_size: Optional[int] = None, seed: int = 0,
              pinv_rel_tol: Optional[float] = None,
              conv: SvdConvention = DEFAULT_CONVENTION,
              on_core: Optional[CoreCallback] = None) -> TensorTrain:
    """TT-SVD with the Nystrom kernel; the same index set serves every core"""
    mats = block_matrices(blocks)
    N = mats[0].shape[0]
    sketch_size = sketch_size or config.get_sketch_size("svd_kn")
    pinv_rel_tol = config.PINV_REL_TOL if pinv_rel_tol is None else pinv_rel_tol
    if len(mats) == 1:
        return sweep(mats, ranks, None)
    ranks = validate_ranks(ranks, [m.shape[1] for m in mats])

    I = sample_index_set(N, sketch_size, seed)
    columns = kernel_columns(mats, I)

    def left_basis(j: int, D: np.ndarray, rank: int) -> np.ndarray:
        factors = NystromFactors.from_columns(I, columns[j])
        return core_from_gram(factors.projected_gram(D, pinv_rel_tol), rank, j, conv, on_core)

    return sweep(mats, ranks, left_basis)
