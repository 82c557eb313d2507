"""
Base64 little-endian float64 encoding for arrays embedded in JSON metadata
"""
import base64
from typing import Any, Dict, Sequence

import numpy as np

from app.errors import FormatError


def encode_array(array: np.ndarray) -> Dict[str, Any]:
    array = np.ascontiguousarray(array, dtype="<f8")
    return {
        "shape": list(array.shape),
        "data": base64.b64encode(array.tobytes()).decode("ascii"),
    }


def decode_array(payload: Dict[str, Any]) -> np.ndarray:
    try:
        shape: Sequence[int] = payload["shape"]
        raw = base64.b64decode(payload["data"])
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"malformed array payload: {e}") from e
    array = np.frombuffer(raw, dtype="<f8")
    if array.size != int(np.prod(shape, dtype=np.int64)):
        raise FormatError(f"array payload has {array.size} values for shape {tuple(shape)}")
    return array.reshape(shape).astype(float)
