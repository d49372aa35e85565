"""GSEB embedding files, the byte layout the goldenbench toolkit reads.

Header: "GSEB", u32 version 1, u32 frame_count, u32 dim, all little
endian; then frame_count * dim float32 values, row-major.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

_HEADER = struct.Struct("<4sIII")
MAGIC = b"GSEB"
VERSION = 1


def pack(values: np.ndarray) -> bytes:
    arr = np.ascontiguousarray(values, dtype="<f4")
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"embedding must be a nonempty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("refusing to pack non-finite values")
    return _HEADER.pack(MAGIC, VERSION, arr.shape[0], arr.shape[1]) + arr.tobytes()


def unpack(data: bytes) -> np.ndarray:
    magic, version, frame_count, dim = _HEADER.unpack_from(data)
    if magic != MAGIC or version != VERSION:
        raise ValueError(f"not a version-{VERSION} GSEB payload")
    expected = _HEADER.size + 4 * frame_count * dim
    if len(data) != expected:
        raise ValueError(f"expected {expected} bytes, got {len(data)}")
    flat = np.frombuffer(data, dtype="<f4", offset=_HEADER.size)
    return flat.reshape(frame_count, dim).copy()


def save(values: np.ndarray, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(pack(values))
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
