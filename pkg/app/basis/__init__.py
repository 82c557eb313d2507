"""
Univariate basis families and feature blocks
"""
from .families import (
    LEBESGUE, MEAN_FIELD, BasisFamily, FeatureBlock, FourierBasis, LegendreBasis,
    MeanField, TabulatedBasis, basis_from_metadata, check_alpha, feature_block,
    feature_blocks, fourier_eval, gram_check, integral_vector, orthonormalize_wrt,
)

__all__ = [
    'LEBESGUE', 'MEAN_FIELD', 'BasisFamily', 'FeatureBlock', 'FourierBasis', 'LegendreBasis',
    'MeanField', 'TabulatedBasis', 'basis_from_metadata', 'check_alpha', 'feature_block',
    'feature_blocks', 'fourier_eval', 'gram_check', 'integral_vector', 'orthonormalize_wrt',
]
