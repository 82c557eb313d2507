"""
Density and sample error metrics
"""
from .metrics import marginal_density_1d, marginal_histogram, record_metric, rel_l2, second_moment_error

__all__ = ['marginal_density_1d', 'marginal_histogram', 'record_metric', 'rel_l2', 'second_moment_error']
