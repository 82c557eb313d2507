"""
TT-compress algorithms on feature blocks
"""
from .cluster import ClusterIndexSet, cluster_features, cluster_sketch_size, tt_svd_c
from .common import SuffixRecursion, dense_coefficients, validate_ranks
from .dispatch import compress
from .fast import tt_svd_fast
from .hierarchical import DyadicCovTree, dyadic_cover, tt_svd_c_hier
from .naive import tt_svd_naive
from .nystrom import NystromFactors, sample_index_set, tt_svd_kn
from .randomized import RandomTTSketch, tt_rsvd_t

__all__ = [
    'ClusterIndexSet', 'cluster_features', 'cluster_sketch_size', 'tt_svd_c',
    'SuffixRecursion', 'dense_coefficients', 'validate_ranks',
    'compress', 'tt_svd_fast',
    'DyadicCovTree', 'dyadic_cover', 'tt_svd_c_hier',
    'tt_svd_naive',
    'NystromFactors', 'sample_index_set', 'tt_svd_kn',
    'RandomTTSketch', 'tt_rsvd_t',
]
