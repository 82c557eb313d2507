"""
Algorithm dispatch for TT-compress
"""
import logging
from typing import Optional, Sequence

from app.compress.cluster import tt_svd_c
from app.compress.common import BlockLike, CoreCallback, block_matrices, dense_coefficients
from app.compress.fast import tt_svd_fast
from app.compress.hierarchical import tt_svd_c_hier
from app.compress.naive import tt_svd_naive
from app.compress.nystrom import tt_svd_kn
from app.compress.randomized import tt_rsvd_t
from app.errors import ConfigError
from app.models.config_models import CompressAlgo, CompressSpec
from app.tensor.tt_core import DEFAULT_CONVENTION, SvdConvention, TensorTrain
from app.utils.tracing import traced

logger = logging.getLogger(__name__)


@traced("compress")
def compress(blocks: Sequence[BlockLike], spec: CompressSpec,
             conv: SvdConvention = DEFAULT_CONVENTION,
             on_core: Optional[CoreCallback] = None) -> TensorTrain:
    """Compress the coefficient tensor of the feature blocks with the configured algorithm"""
    mats = block_matrices(blocks)
    d = len(mats)
    ranks = spec.ranks_for(d) if d > 1 else []
    algo = CompressAlgo(spec.algo)
    logger.info(f"compress algo={algo.value} d={d} N={mats[0].shape[0]} ranks={ranks}")

    if algo == CompressAlgo.NAIVE:
        return tt_svd_naive(dense_coefficients(mats), ranks, conv, on_core)
    if algo == CompressAlgo.SVD_FAST:
        return tt_svd_fast(mats, ranks, conv, on_core)
    if algo == CompressAlgo.SVD_KN:
        return tt_svd_kn(mats, ranks, spec.sketch_size, spec.seed, spec.pinv_rel_tol, conv, on_core)
    if algo == CompressAlgo.SVD_C:
        return tt_svd_c(mats, ranks, spec.cluster_order, conv, on_core)
    if algo == CompressAlgo.SVD_C_HIER:
        return tt_svd_c_hier(mats, ranks, spec.sketch_size, spec.seed, spec.pinv_rel_tol,
                             conv, on_core)
    if algo == CompressAlgo.RSVD_T:
        return tt_rsvd_t(mats, ranks, spec.sketch_size, spec.seed, spec.sketch_law, conv, on_core)
    raise ConfigError(f"unknown compression algorithm: {spec.algo}")
