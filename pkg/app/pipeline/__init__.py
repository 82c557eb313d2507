"""
Experiment drivers behind the CLI
"""
from .experiments import (
    bench_slopes, bench_sweep, fit_fourier_model, gl1d_basis_sweep, gl2d_sampler_fidelity,
    gm_error_curve, gm_sampler_fidelity, loglog_slope, sampler_fidelity, write_table,
)

__all__ = [
    'bench_slopes', 'bench_sweep', 'fit_fourier_model', 'gl1d_basis_sweep', 'gl2d_sampler_fidelity',
    'gm_error_curve', 'gm_sampler_fidelity', 'loglog_slope', 'sampler_fidelity', 'write_table',
]
