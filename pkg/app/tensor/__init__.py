"""
Tensor-train core algebra
"""
from .tt_core import (
    DEFAULT_CONVENTION, DenseTensor, SvdConvention, TensorTrain,
    check_memory, full_ranks, left_stack, numerical_rank, refold, sign_fix,
    symmetric_eig, truncated_svd, tt_contract, tt_from_rank1_terms, tt_inner,
    tt_norm, tt_to_dense, unfold,
)

__all__ = [
    'DEFAULT_CONVENTION', 'DenseTensor', 'SvdConvention', 'TensorTrain',
    'check_memory', 'full_ranks', 'left_stack', 'numerical_rank', 'refold', 'sign_fix',
    'symmetric_eig', 'truncated_svd', 'tt_contract', 'tt_from_rank1_terms', 'tt_inner',
    'tt_norm', 'tt_to_dense', 'unfold',
]
