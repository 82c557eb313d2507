"""
Binary file formats.

TTTN (tensor trains and density models):
    b"TTTN" | u32 version | u64 d | u64 x d mode sizes | u64 x (d+1) ranks |
    cores as <f8 row-major | u64 metadata length | UTF-8 JSON metadata

TTDE (sample sets):
    b"TTDE" | u32 version | u64 N | u64 d | <f8 row-major data

Sample files carry a JSON manifest next to them at `<file>.json`.
"""
import json
import logging
import struct
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from app.basis.families import MeanField, basis_from_metadata
from app.errors import FormatError
from app.estimator.model import DensityModel, SampleSet
from app.estimator.preprocess import PcaModel
from app.models.config_models import GridSpec
from app.tensor.tt_core import TensorTrain

logger = logging.getLogger(__name__)

TT_MAGIC = b"TTTN"
SAMPLE_MAGIC = b"TTDE"
FORMAT_VERSION = 1

PathLike = Union[str, Path]


class _Reader:
    """Cursor over a byte buffer raising FormatError on truncation"""

    def __init__(self, data: bytes, what: str):
        self.data = data
        self.pos = 0
        self.what = what

    def take(self, size: int) -> bytes:
        if size < 0 or self.pos + size > len(self.data):
            raise FormatError(f"truncated {self.what} file at byte {self.pos}")
        chunk = self.data[self.pos:self.pos + size]
        self.pos += size
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64s(self, count: int) -> Tuple[int, ...]:
        return struct.unpack(f"<{count}Q", self.take(8 * count))

    def f8(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * count), dtype="<f8").astype(float)


def _check_header(reader: _Reader, magic: bytes) -> None:
    found = reader.take(len(magic))
    if found != magic:
        raise FormatError(f"bad magic {found!r}, expected {magic!r}")
    version = reader.u32()
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported {magic.decode()} version {version}")


def encode_tt(T: TensorTrain, metadata: Optional[Dict[str, Any]] = None) -> bytes:
    parts = [TT_MAGIC, struct.pack("<I", FORMAT_VERSION), struct.pack("<Q", T.d)]
    parts.append(struct.pack(f"<{T.d}Q", *T.mode_sizes))
    parts.append(struct.pack(f"<{T.d + 1}Q", *T.ranks))
    for core in T.cores:
        parts.append(np.ascontiguousarray(core, dtype="<f8").tobytes())
    blob = json.dumps(metadata or {}, sort_keys=True).encode("utf-8")
    parts.append(struct.pack("<Q", len(blob)))
    parts.append(blob)
    return b"".join(parts)


def decode_tt(data: bytes) -> Tuple[TensorTrain, Dict[str, Any]]:
    reader = _Reader(data, "TTTN")
    _check_header(reader, TT_MAGIC)
    (d,) = reader.u64s(1)
    if d < 1:
        raise FormatError("tensor train with zero cores")
    sizes = reader.u64s(d)
    ranks = reader.u64s(d + 1)
    if ranks[0] != 1 or ranks[-1] != 1:
        raise FormatError(f"boundary ranks must be 1, got {ranks[0]} and {ranks[-1]}")
    cores = []
    for j in range(d):
        shape = (ranks[j], sizes[j], ranks[j + 1])
        cores.append(reader.f8(int(np.prod(shape))).reshape(shape))
    (length,) = reader.u64s(1)
    try:
        metadata = json.loads(reader.take(length).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FormatError(f"unreadable TTTN metadata: {e}") from e
    if reader.pos != len(data):
        raise FormatError(f"{len(data) - reader.pos} trailing bytes after TTTN metadata")
    return TensorTrain(cores), metadata


def write_tt(path: PathLike, T: TensorTrain, metadata: Optional[Dict[str, Any]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_tt(T, metadata))
    return path


def read_tt(path: PathLike) -> Tuple[TensorTrain, Dict[str, Any]]:
    return decode_tt(Path(path).read_bytes())


def model_metadata(m: DensityModel, config_hash: str = "", seed: Optional[int] = None,
                   extra: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    meta = {
        "kind": "density_model",
        "alpha": m.alpha,
        "lambda": m.lam,
        "Z": m.norm_const,
        "bases": [b.to_metadata() for b in m.bases],
        "mean_fields": [mf.to_metadata() for mf in m.mean_fields],
        "grids": [g.model_dump() for g in m.grids],
        "pca": m.pca.to_metadata() if m.pca is not None else None,
        "config_hash": config_hash,
        "seed": seed,
        "model_metadata": m.metadata,
    }
    if extra:
        meta.update(extra)
    return meta


def save_model(path: PathLike, m: DensityModel, config_hash: str = "", seed: Optional[int] = None,
               extra: Optional[Dict[str, Any]] = None) -> Path:
    """Write a density model as TTTN with everything needed to evaluate it in the metadata"""
    path = write_tt(path, m.coeff, model_metadata(m, config_hash, seed, extra))
    logger.info(f"saved model d={m.d} ranks={m.coeff.ranks} to {path}")
    return path


def load_model(path: PathLike) -> DensityModel:
    T, meta = read_tt(path)
    if meta.get("kind") != "density_model":
        raise FormatError(f"{path} holds a bare tensor train, not a density model")
    try:
        return DensityModel(
            coeff=T,
            bases=[basis_from_metadata(b) for b in meta["bases"]],
            mean_fields=[MeanField.from_metadata(mf) for mf in meta["mean_fields"]],
            grids=[GridSpec(**g) for g in meta["grids"]],
            alpha=float(meta["alpha"]),
            lam=float(meta["lambda"]),
            pca=PcaModel.from_metadata(meta["pca"]) if meta.get("pca") else None,
            norm_const=float(meta["Z"]),
            metadata=dict(meta.get("model_metadata") or {}),
        )
    except KeyError as e:
        raise FormatError(f"model metadata is missing {e}") from e


def manifest_path(path: PathLike) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_samples(path: PathLike, samples: Union[SampleSet, np.ndarray],
                  manifest: Optional[Dict[str, Any]] = None) -> Path:
    """Write TTDE data and, when given, its JSON manifest sidecar"""
    X = samples.data if isinstance(samples, SampleSet) else np.atleast_2d(np.asarray(samples, float))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = SAMPLE_MAGIC + struct.pack("<I", FORMAT_VERSION) + struct.pack("<2Q", *X.shape)
    path.write_bytes(header + np.ascontiguousarray(X, dtype="<f8").tobytes())
    if manifest is not None:
        manifest_path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str),
                                       encoding="utf-8")
    logger.info(f"wrote {X.shape[0]} x {X.shape[1]} samples to {path}")
    return path


def read_samples(path: PathLike) -> np.ndarray:
    data = Path(path).read_bytes()
    reader = _Reader(data, "TTDE")
    _check_header(reader, SAMPLE_MAGIC)
    N, d = reader.u64s(2)
    X = reader.f8(N * d).reshape(N, d)
    if reader.pos != len(data):
        raise FormatError(f"{len(data) - reader.pos} trailing bytes after TTDE data")
    return X


def read_manifest(path: PathLike) -> Dict[str, Any]:
    """Manifest sidecar of a sample file ({} when absent)"""
    side = manifest_path(path)
    if not side.exists():
        return {}
    try:
        return json.loads(side.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise FormatError(f"unreadable manifest {side}: {e}") from e
