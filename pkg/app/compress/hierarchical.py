"""
Hierarchical TT-SVD-c: 1-cluster sketches compressed further by a dyadic tree of
off-diagonal covariance summaries.

Every internal node v = (S, T) of the tree keeps V'_v, the leading right singular
vectors of the covariance block M_{S,T} between the non-constant features of its
left part S and right part T. Core j is sketched by the constant column plus
Phi_T V'_v for every node in the dyadic cover of the suffix j+1..d.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from app.compress.common import (
    BlockLike, CoreCallback, block_matrices, core_from_matrix, sweep, validate_ranks,
)
from app.errors import ConfigError
from app.tensor.tt_core import DEFAULT_CONVENTION, SvdConvention, TensorTrain, sign_fix

logger = logging.getLogger(__name__)

Interval = Tuple[int, int]


def split(interval: Interval) -> Tuple[Interval, Interval]:
    """[a, b) into a left part of ceil(len/2) and a right part of floor(len/2)"""
    a, b = interval
    mid = a + (b - a + 1) // 2
    return (a, mid), (mid, b)


def dyadic_cover(d: int, j: int) -> List[Interval]:
    """Right siblings along the root-to-leaf path of j; together they tile j+1..d-1 (0-based)"""
    if not 0 <= j < d:
        raise ConfigError(f"dimension {j} outside [0, {d})")
    cover = []
    node = (0, d)
    while node[1] - node[0] > 1:
        left, right = split(node)
        if j < left[1]:
            cover.append(right)
            node = left
        else:
            node = right
    return sorted(cover)


def non_constant_features(mats: Sequence[np.ndarray], interval: Interval) -> np.ndarray:
    a, b = interval
    return np.hstack([mats[m][:, 1:] for m in range(a, b)])


def cur_right_vectors(F_S: np.ndarray, F_T: np.ndarray, width: int,
                      rng: np.random.Generator, rel_tol: float) -> np.ndarray:
    """Leading right singular vectors of M = F_S^T F_T / N from a CUR estimate of M.

    Only r sampled rows and columns of M are formed: M ~ C W^+ R.
    """
    N = F_S.shape[0]
    rows_total, cols_total = F_S.shape[1], F_T.shape[1]
    if cols_total <= width:
        return np.eye(cols_total)
    r_rows = min(width, rows_total)
    rows = np.sort(rng.choice(rows_total, size=r_rows, replace=False))
    cols = np.sort(rng.choice(cols_total, size=width, replace=False))
    C = F_S.T @ F_T[:, cols] / N
    R = F_S[:, rows].T @ F_T / N
    W = C[rows]
    Q, R_c = linalg.qr(C, mode="economic")
    core = R_c @ linalg.pinv(W, rtol=rel_tol) @ R
    _, S, Vt = linalg.svd(core, full_matrices=False)
    keep = min(width, int(np.count_nonzero(S > rel_tol * S[0])) if S.size and S[0] > 0 else 0)
    if keep == 0:
        return np.zeros((cols_total, 0))
    V, _ = sign_fix(Vt[:keep].T)
    return V


@dataclass
class DyadicCovTree:
    """Per right-child interval, the orthonormal summary V'_v of its parent's off-diagonal block"""
    d: int
    width: int
    summaries: Dict[Interval, np.ndarray] = field(default_factory=dict)

    @classmethod
    def build(cls, mats: Sequence[np.ndarray], width: int, seed: int,
              rel_tol: float = 1e-10) -> "DyadicCovTree":
        d = len(mats)
        tree = cls(d=d, width=width)
        rng = np.random.default_rng(seed)
        stack = [(0, d)]
        while stack:
            node = stack.pop()
            if node[1] - node[0] < 2:
                continue
            left, right = split(node)
            F_S = non_constant_features(mats, left)
            F_T = non_constant_features(mats, right)
            tree.summaries[right] = cur_right_vectors(F_S, F_T, width, rng, rel_tol)
            stack.extend([right, left])
        return tree

    def intervals(self) -> List[Interval]:
        return sorted(self.summaries)

    def sketch_columns(self, mats: Sequence[np.ndarray]) -> Dict[Interval, np.ndarray]:
        """Z_v = Phi_T V'_v for every summarized interval"""
        return {iv: non_constant_features(mats, iv) @ V for iv, V in self.summaries.items()}


def tt_svd_c_hier(blocks: Sequence[BlockLike], ranks: Sequence[int],
                  sketch_size: int = 10, seed: int = 0, pinv_rel_tol: float = 1e-10,
                  conv: SvdConvention = DEFAULT_CONVENTION,
                  on_core: Optional[CoreCallback] = None) -> TensorTrain:
    """TT-SVD with hierarchically compressed 1-cluster sketches"""
    mats = block_matrices(blocks)
    d = len(mats)
    if d < 2:
        raise ConfigError("hierarchical sketching needs d >= 2")
    ranks = validate_ranks(ranks, [m.shape[1] for m in mats])
    N = mats[0].shape[0]

    tree = DyadicCovTree.build(mats, sketch_size, seed, pinv_rel_tol)
    Z = tree.sketch_columns(mats)
    ones = np.ones((N, 1))

    def left_basis(j: int, D: np.ndarray, rank: int) -> np.ndarray:
        E = np.hstack([ones] + [Z[iv] for iv in dyadic_cover(d, j)])
        if E.shape[1] < rank:
            logger.debug(f"core {j}: hierarchical sketch has {E.shape[1]} columns for rank {rank}")
        return core_from_matrix(D.T @ E / N, rank, j, conv, on_core)

    return sweep(mats, ranks, left_basis)
