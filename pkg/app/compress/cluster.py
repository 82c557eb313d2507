"""
TT-SVD-c: the unfolding is sketched by the columns of all multi-indices with at
most K non-constant entries, B'_j = (1/N) D_j^T E_j.
"""
import logging
from math import comb
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from app.compress.common import (
    BlockLike, CoreCallback, block_matrices, core_from_matrix, sweep, validate_ranks,
)
from app.errors import ConfigError, RankError
from app.tensor.tt_core import DEFAULT_CONVENTION, SvdConvention, TensorTrain, check_memory

logger = logging.getLogger(__name__)


class ClusterIndexSet:
    """Multi-indices in {0..n-1}^d with exactly k nonzero entries, lexicographic order"""

    def __init__(self, k: int, d: int, n: int):
        if k < 0 or d < 0 or n < 1:
            raise ConfigError(f"invalid cluster set k={k}, d={d}, n={n}")
        self.k = k
        self.d = d
        self.n = n

    def __len__(self) -> int:
        if self.k > self.d:
            return 0
        return comb(self.d, self.k) * (self.n - 1) ** self.k

    def __iter__(self) -> Iterator[Tuple[int, ...]]:
        return self._indices(0, self.k)

    def _indices(self, pos: int, remaining: int) -> Iterator[Tuple[int, ...]]:
        if pos == self.d:
            if remaining == 0:
                yield ()
            return
        if self.d - pos > remaining:
            for rest in self._indices(pos + 1, remaining):
                yield (0,) + rest
        if remaining > 0:
            for v in range(1, self.n):
                for rest in self._indices(pos + 1, remaining - 1):
                    yield (v,) + rest


def cluster_sketch_size(sizes: Sequence[int], K: int) -> int:
    """Number of multi-indices with at most K nonzero entries for the given mode sizes"""
    # elementary symmetric polynomials of (n_m - 1)
    e = [1] + [0] * K
    for n in sizes:
        for k in range(K, 0, -1):
            e[k] += e[k - 1] * (n - 1)
    return int(sum(e))


def cluster_features(mats: Sequence[np.ndarray], start: int, K: int) -> np.ndarray:
    """Columns prod over support(l) of Phi_m(l_m) for every l on dims start.. with <= K clusters.

    Built by the recursion E^(k)_p = [E^(k)_{p+1}, Phi_p[:, v] * E^(k-1)_{p+1} for v >= 1],
    which lists each order k in lexicographic index order.
    """
    N = mats[0].shape[0]
    levels: Dict[int, np.ndarray] = {0: np.ones((N, 1))}
    for k in range(1, K + 1):
        levels[k] = np.zeros((N, 0))
    for p in range(len(mats) - 1, start - 1, -1):
        phi = mats[p]
        updated = {}
        for k in range(K + 1):
            parts: List[np.ndarray] = [levels[k]]
            if k > 0 and levels[k - 1].shape[1]:
                parts += [phi[:, v:v + 1] * levels[k - 1] for v in range(1, phi.shape[1])]
            updated[k] = np.hstack(parts)
        levels = updated
    return np.hstack([levels[k] for k in range(K + 1)])


def tt_svd_c(blocks: Sequence[BlockLike], ranks: Sequence[int], cluster_order: int = 1,
             conv: SvdConvention = DEFAULT_CONVENTION,
             on_core: Optional[CoreCallback] = None) -> TensorTrain:
    """TT-SVD on the cluster-sketched unfoldings"""
    if cluster_order < 0:
        raise ConfigError(f"cluster order must be >= 0, got {cluster_order}")
    mats = block_matrices(blocks)
    d = len(mats)
    N = mats[0].shape[0]
    if d == 1:
        return sweep(mats, ranks, None)
    ranks = validate_ranks(ranks, [m.shape[1] for m in mats])

    sketch_sizes = []
    for j in range(d - 1):
        width = cluster_sketch_size([m.shape[1] for m in mats[j + 1:]], cluster_order)
        if width < ranks[j]:
            raise RankError(
                f"cluster sketch of order {cluster_order} has {width} columns at cut {j + 1}, "
                f"thinner than rank {ranks[j]}"
            )
        sketch_sizes.append(width)
    check_memory(N * max(sketch_sizes), "svd_c sketch")
    logger.debug(f"svd_c sketch sizes {sketch_sizes}")

    def left_basis(j: int, D: np.ndarray, rank: int) -> np.ndarray:
        E = cluster_features(mats, j + 1, cluster_order)
        return core_from_matrix(D.T @ E / N, rank, j, conv, on_core)

    return sweep(mats, ranks, left_basis)
