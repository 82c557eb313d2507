"""
Pydantic models for configuration and reports
"""
from .config_models import (
    CompressAlgo, CompressSpec, SketchLaw, GridSpec,
    GmSpec, GlSpec, GlKind, LangevinConfig,
    GeneralFitConfig, MeanFieldKind, PcaMethod,
    LangevinReport, SamplerDiagnostics, MetricRecord, BenchRecord, RunConfig,
)

__all__ = [
    'CompressAlgo', 'CompressSpec', 'SketchLaw', 'GridSpec',
    'GmSpec', 'GlSpec', 'GlKind', 'LangevinConfig',
    'GeneralFitConfig', 'MeanFieldKind', 'PcaMethod',
    'LangevinReport', 'SamplerDiagnostics', 'MetricRecord', 'BenchRecord', 'RunConfig',
]
