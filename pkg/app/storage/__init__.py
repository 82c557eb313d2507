"""
TTTN / TTDE file formats and manifests
"""
from .formats import (
    FORMAT_VERSION, SAMPLE_MAGIC, TT_MAGIC,
    decode_tt, encode_tt, load_model, manifest_path, model_metadata,
    read_manifest, read_samples, read_tt, save_model, write_samples, write_tt,
)

__all__ = [
    'FORMAT_VERSION', 'SAMPLE_MAGIC', 'TT_MAGIC',
    'decode_tt', 'encode_tt', 'load_model', 'manifest_path', 'model_metadata',
    'read_manifest', 'read_samples', 'read_tt', 'save_model', 'write_samples', 'write_tt',
]
