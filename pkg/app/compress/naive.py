"""
Sequential truncated SVD of a dense tensor (oracle-scale reference compressor)
"""
import logging
from typing import Optional, Sequence

from app.compress.common import CoreCallback, core_from_matrix, validate_ranks
from app.tensor.tt_core import (
    DEFAULT_CONVENTION, DenseTensor, SvdConvention, TensorTrain, check_memory, unfold,
)

logger = logging.getLogger(__name__)


def tt_svd_naive(A: DenseTensor, ranks: Sequence[int],
                 conv: SvdConvention = DEFAULT_CONVENTION,
                 on_core: Optional[CoreCallback] = None,
                 cap: Optional[int] = None) -> TensorTrain:
    """TT-SVD: core j from the top left singular vectors of the current remainder"""
    sizes = list(A.mode_sizes)
    d = len(sizes)
    check_memory(A.entries.size, "tt_svd_naive", cap)
    if d == 1:
        return TensorTrain([A.entries.reshape(1, sizes[0], 1)])
    ranks = validate_ranks(ranks, sizes)

    cores = []
    B = unfold(A, 1)
    r_prev = 1
    for j in range(d - 1):
        B = B.reshape(r_prev * sizes[j], -1)
        U = core_from_matrix(B, ranks[j], j, conv, on_core)
        r = U.shape[1]
        cores.append(U.reshape(r_prev, sizes[j], r))
        B = U.T @ B
        r_prev = r
    cores.append(B.reshape(r_prev, sizes[-1], 1))
    logger.debug(f"tt_svd_naive ranks {[c.shape[2] for c in cores[:-1]]}")
    return TensorTrain(cores)
