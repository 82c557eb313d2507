"""
Shared pieces of the TT-compress sweeps: the left D_j recursion, rank checks,
core extraction from Gram matrices or sketched unfoldings, and the checkpointed
suffix recursion used by the linear-time right factors.
"""
import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np

import config
from app.basis.families import FeatureBlock
from app.errors import RankError, ShapeError
from app.tensor.tt_core import (
    DEFAULT_CONVENTION, DenseTensor, SvdConvention, TensorTrain,
    check_memory, numerical_rank, symmetric_eig, truncated_svd,
)

logger = logging.getLogger(__name__)

CoreCallback = Callable[[int, int, np.ndarray], None]
BlockLike = Union[FeatureBlock, np.ndarray]


def block_matrices(blocks: Sequence[BlockLike]) -> List[np.ndarray]:
    """Feature matrices Phi_j (N x n_j) with a common sample count"""
    if len(blocks) == 0:
        raise ShapeError("at least one feature block is required")
    mats = [np.asarray(b.matrix if isinstance(b, FeatureBlock) else b, dtype=float)
            for b in blocks]
    N = mats[0].shape[0]
    for j, m in enumerate(mats):
        if m.ndim != 2:
            raise ShapeError(f"feature block {j} must be a matrix, got shape {m.shape}")
        if m.shape[0] != N:
            raise ShapeError(f"feature block {j} has {m.shape[0]} rows, expected {N}")
    if N < 1:
        raise ShapeError("feature blocks need at least one sample")
    return mats


def validate_ranks(ranks: Sequence[int], mode_sizes: Sequence[int]) -> List[int]:
    """Check r_j <= n_j r_{j-1} and r_j <= n_{j+1}...n_d for every interior cut"""
    d = len(mode_sizes)
    ranks = [int(r) for r in ranks]
    if len(ranks) != d - 1:
        raise ShapeError(f"expected {d - 1} ranks for d={d}, got {len(ranks)}")
    prev = 1
    for j, r in enumerate(ranks):
        if r < 1:
            raise RankError(f"rank {r} at cut {j + 1} must be >= 1")
        rows = prev * mode_sizes[j]
        cols = int(np.prod(mode_sizes[j + 1:], dtype=np.int64))
        if r > rows or r > cols:
            raise RankError(
                f"rank {r} at cut {j + 1} exceeds the unfolding dimensions {rows} x {cols}"
            )
        prev = r
    return ranks


def coefficient_tensor_chunks(mats: Sequence[np.ndarray], chunk: int):
    """Yield, per sample chunk, the row-wise Kronecker products of all feature rows"""
    N = mats[0].shape[0]
    for start in range(0, N, chunk):
        rows = mats[0][start:start + chunk]
        for m in mats[1:]:
            part = m[start:start + chunk]
            rows = (rows[:, :, None] * part[:, None, :]).reshape(rows.shape[0], -1)
        yield rows


def dense_coefficients(blocks: Sequence[BlockLike], cap: Optional[int] = None) -> DenseTensor:
    """Brute-force c_hat = (1/N) sum_i Phi_1^(i) x ... x Phi_d^(i)"""
    mats = block_matrices(blocks)
    sizes = [m.shape[1] for m in mats]
    total = int(np.prod(sizes, dtype=np.int64))
    cap = config.get_memory_cap() if cap is None else cap
    check_memory(total, "dense coefficient tensor", cap)
    chunk = max(1, cap // max(total, 1))
    acc = np.zeros(total)
    for rows in coefficient_tensor_chunks(mats, chunk):
        acc += rows.sum(axis=0)
    return DenseTensor(sizes, acc / mats[0].shape[0])


def advance_left(D: np.ndarray, U: np.ndarray, phi_next: np.ndarray) -> np.ndarray:
    """D_{j+1}^(i) = (U^T D_j^(i)) kron Phi_{j+1}^(i)"""
    P = D @ U
    N = D.shape[0]
    return (P[:, :, None] * phi_next[:, None, :]).reshape(N, -1)


def last_core(D: np.ndarray, r_prev: int, n_last: int) -> np.ndarray:
    return D.mean(axis=0).reshape(r_prev, n_last, 1)


def single_core(mats: Sequence[np.ndarray]) -> TensorTrain:
    return TensorTrain([mats[0].mean(axis=0)[None, :, None]])


def core_from_gram(A: np.ndarray, rank: int, j: int,
                   conv: SvdConvention = DEFAULT_CONVENTION,
                   on_core: Optional[CoreCallback] = None) -> np.ndarray:
    """Leading eigenvectors of a Gram matrix, trimmed to its numerical rank"""
    rank = min(rank, A.shape[0])
    w, V = symmetric_eig(A, rank, conv)
    singular = np.sqrt(np.clip(w, 0.0, None))
    keep = numerical_rank(singular, conv)
    if keep < rank:
        logger.debug(f"core {j}: numerical rank {keep} below requested {rank}")
    if on_core is not None:
        on_core(j, keep, singular[:keep])
    return V[:, :keep]


def core_from_matrix(B: np.ndarray, rank: int, j: int,
                     conv: SvdConvention = DEFAULT_CONVENTION,
                     on_core: Optional[CoreCallback] = None) -> np.ndarray:
    """Leading left singular vectors of a (sketched) unfolding, trimmed to its numerical rank"""
    rank = min(rank, min(B.shape))
    U, S, _ = truncated_svd(B, rank, conv)
    keep = numerical_rank(S, conv)
    if keep < rank:
        logger.debug(f"core {j}: numerical rank {keep} below requested {rank}")
    if on_core is not None:
        on_core(j, keep, S[:keep])
    return U[:, :keep]


def sweep(mats: Sequence[np.ndarray], ranks: Sequence[int],
          left_basis: Callable[[int, np.ndarray, int], np.ndarray]) -> TensorTrain:
    """Left-to-right sweep shared by all sample-based compressors.

    Args:
        mats: feature matrices Phi_1..Phi_d
        ranks: requested interior ranks
        left_basis: (j, D_j, r_j) -> orthonormal columns (n_j r_{j-1} x r_j) for core j

    Returns:
        TensorTrain with left-orthonormal interior cores
    """
    d = len(mats)
    if d == 1:
        return single_core(mats)
    cores = []
    D = mats[0]
    r_prev = 1
    for j in range(d - 1):
        U = left_basis(j, D, ranks[j])
        cores.append(U.reshape(r_prev, mats[j].shape[1], U.shape[1]))
        r_prev = U.shape[1]
        D = advance_left(D, U, mats[j + 1])
    cores.append(last_core(D, r_prev, mats[-1].shape[1]))
    return TensorTrain(cores)


class SuffixRecursion:
    """Right objects R(j) = step(j, R(j+1)), R(d-1) = base(), served in forward order.

    Only every stride-th R is kept after one backward pass; the segment holding a
    requested index is recomputed from the checkpoint above it, so memory holds
    about 2 sqrt(d) arrays instead of d.
    """

    def __init__(self, d: int, base: Callable[[], np.ndarray],
                 step: Callable[[int, np.ndarray], np.ndarray], stride: Optional[int] = None):
        self.d = d
        self.step = step
        self.stride = stride or max(1, math.ceil(math.sqrt(d)))
        self._checkpoints: Dict[int, np.ndarray] = {}
        self._segment: Dict[int, np.ndarray] = {}

        R = base()
        self._checkpoints[d - 1] = R
        for j in range(d - 2, -1, -1):
            R = step(j, R)
            if j % self.stride == 0:
                self._checkpoints[j] = R

    def __getitem__(self, j: int) -> np.ndarray:
        if not 0 <= j <= self.d - 1:
            raise IndexError(j)
        if j in self._segment:
            return self._segment[j]
        if j in self._checkpoints:
            return self._checkpoints[j]
        low = (j // self.stride) * self.stride
        top = min(low + self.stride, self.d - 1)
        R = self._checkpoints[top]
        segment = {}
        for k in range(top - 1, low - 1, -1):
            R = self.step(k, R)
            segment[k] = R
        self._segment = segment
        return segment[j]
