"""Minimal CIGR raster I/O.

Self-contained copy of the interchange format so this package runs without
the picking toolkit installed: 16-byte header (magic "CIGR", uint32
version 1, uint32 rows, uint32 cols, little-endian) followed by row-major
float32 little-endian values.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"CIGR"
VERSION = 1
_HEADER = struct.Struct("<4sIII")


def write_raster(raster, path) -> None:
    a = np.ascontiguousarray(np.asarray(raster, dtype=np.float32))
    if a.ndim != 2:
        raise ValueError("raster must be 2-D")
    if not np.all(np.isfinite(a)):
        raise ValueError("raster must be finite")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, a.shape[0], a.shape[1]))
        fh.write(a.astype("<f4").tobytes())


def read_raster(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, version, n_rows, n_cols = _HEADER.unpack(header)
        if magic != MAGIC or version != VERSION:
            raise ValueError(f"{path}: not a CIGR v1 raster")
        payload = fh.read(4 * n_rows * n_cols)
    if len(payload) < 4 * n_rows * n_cols:
        raise ValueError(f"{path}: truncated payload")
    return np.frombuffer(payload, dtype="<f4").reshape(n_rows, n_cols).copy()
