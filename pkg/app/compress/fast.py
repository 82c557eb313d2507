"""
Exact fast TT-SVD on feature blocks: A_j = (1/N^2) D_j^T E_j D_j with the
sample kernel E_j evaluated block by block, never stored whole.
"""
import logging
from typing import Optional, Sequence

import numpy as np

import config
from app.compress.common import (
    BlockLike, CoreCallback, block_matrices, core_from_gram, sweep, validate_ranks,
)
from app.tensor.tt_core import DEFAULT_CONVENTION, SvdConvention, TensorTrain, check_memory

logger = logging.getLogger(__name__)


def kernel_rows(mats: Sequence[np.ndarray], j: int, rows: slice) -> np.ndarray:
    """Rows of E_j = Hadamard product of Phi_m Phi_m^T over m > j (all-ones when empty)"""
    N = mats[0].shape[0]
    E = np.ones((len(range(*rows.indices(N))), N))
    for m in range(j + 1, len(mats)):
        E *= mats[m][rows] @ mats[m].T
    return E


def gram_fast(mats: Sequence[np.ndarray], j: int, D: np.ndarray,
              block_size: Optional[int] = None) -> np.ndarray:
    N = D.shape[0]
    block_size = block_size or config.FAST_BLOCK_SIZE
    block_size = max(1, min(block_size, N))
    check_memory(block_size * N, "svd_fast kernel block")
    A = np.zeros((D.shape[1], D.shape[1]))
    for start in range(0, N, block_size):
        rows = slice(start, min(start + block_size, N))
        E = kernel_rows(mats, j, rows)
        A += D[rows].T @ (E @ D)
    return A / (N * N)


def tt_svd_fast(blocks: Sequence[BlockLike], ranks: Sequence[int],
                conv: SvdConvention = DEFAULT_CONVENTION,
                on_core: Optional[CoreCallback] = None,
                block_size: Optional[int] = None) -> TensorTrain:
    """Fast TT-SVD: same output as tt_svd_naive on the coefficient tensor"""
    mats = block_matrices(blocks)
    if len(mats) > 1:
        ranks = validate_ranks(ranks, [m.shape[1] for m in mats])

    def left_basis(j: int, D: np.ndarray, rank: int) -> np.ndarray:
        return core_from_gram(gram_fast(mats, j, D, block_size), rank, j, conv, on_core)

    return sweep(mats, ranks, left_basis)
