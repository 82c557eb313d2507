"""
Density estimator: convolution, compression, deconvolution and model operations
"""
from .density_ops import (
    ConditionalSamplerState, conditional_sample, eval_point, eval_points, grid_tt,
    integrate, marginal, moment1, moment2, normalize, quadrature_vectors, tabulated_cores,
)
from .estimator import (
    HardWeight, SoftWeight, alpha_default, coeff_entry_oracle, deconvolution_weights,
    deconvolve, estimate_density, fit, hard_project_oracle, weighted_projection_error,
)
from .model import DensityModel, SampleSet
from .preprocess import (
    Kde1d, PcaModel, box_from_samples, fit_general, kde1d, pca_fit, silverman_bandwidth,
)
from app.compress.common import dense_coefficients

__all__ = [
    'ConditionalSamplerState', 'conditional_sample', 'eval_point', 'eval_points', 'grid_tt',
    'integrate', 'marginal', 'moment1', 'moment2', 'normalize', 'quadrature_vectors',
    'tabulated_cores',
    'HardWeight', 'SoftWeight', 'alpha_default', 'coeff_entry_oracle', 'deconvolution_weights',
    'deconvolve', 'estimate_density', 'fit', 'hard_project_oracle', 'weighted_projection_error',
    'DensityModel', 'SampleSet',
    'Kde1d', 'PcaModel', 'box_from_samples', 'fit_general', 'kde1d', 'pca_fit',
    'silverman_bandwidth', 'dense_coefficients',
]
