"""
Synthetic data generators and ground truths
"""
from .gaussian_mixture import (
    component_coefficients, component_weights, gm_draw, gm_grid_truth,
    gm_sample, gm_truth_model, gm_truth_tt, truncated_pdf,
)
from .ginzburg_landau import GinzburgLandau, HarmonicPotential, gl1d_grid_truth, gl_gradient, gl_potential
from .langevin import LangevinChains, langevin_run, langevin_sample, moment_drift

__all__ = [
    'component_coefficients', 'component_weights', 'gm_draw', 'gm_grid_truth',
    'gm_sample', 'gm_truth_model', 'gm_truth_tt', 'truncated_pdf',
    'GinzburgLandau', 'HarmonicPotential', 'gl1d_grid_truth', 'gl_gradient', 'gl_potential',
    'LangevinChains', 'langevin_run', 'langevin_sample', 'moment_drift',
]
