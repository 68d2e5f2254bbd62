"""Core data model and serialization for CIG rasters and picked curves.

A gather is a 2-D amplitude panel (depth rows x offset columns).  All raster
types share one binary container, the "CIGR" format:

    bytes 0..3   magic "CIGR" (ASCII)
    bytes 4..7   version, uint32 little-endian (currently 1)
    bytes 8..11  n_rows, uint32 little-endian
    bytes 12..15 n_cols, uint32 little-endian
    then         n_rows * n_cols float32 little-endian values, row-major

Curves are stored as plain CSV (`curve_id,offset_index,depth`) with depths
printed to 9 significant digits, which round-trips float32 exactly.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

RASTER_MAGIC = b"CIGR"
RASTER_VERSION = 1
_HEADER = struct.Struct("<4sIII")
# Guard against corrupt headers asking for absurd allocations.
_MAX_CELLS = 2**31

CURVE_HEADER = "curve_id,offset_index,depth"


class GridIOError(Exception):
    """Base class for raster / curve serialization failures."""


class BadMagicError(GridIOError):
    """File does not start with the CIGR magic."""


class TruncatedHeaderError(GridIOError):
    """File ends before the 16-byte header is complete."""


class TruncatedPayloadError(GridIOError):
    """Header promises more values than the file contains."""


class DimensionOverflowError(GridIOError):
    """Header dimensions are zero or exceed the supported cell count."""


class CurveFormatError(GridIOError):
    """Curve CSV is malformed or violates curve invariants."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


def _require_finite(a: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{what} contains non-finite values")


@dataclass(frozen=True)
class Gather:
    """One common-image gather: amplitudes indexed [depth_row, offset_col]."""

    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=np.float32)
        if a.ndim != 2:
            raise ValueError("gather amplitudes must be 2-D")
        if a.shape[0] < 2 or a.shape[1] < 2:
            raise ValueError("gather needs at least 2 depth samples and 2 traces")
        _require_finite(a, "gather")
        object.__setattr__(self, "amplitudes", _freeze(a))

    @property
    def n_depth(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def n_offset(self) -> int:
        return self.amplitudes.shape[1]

    @classmethod
    def load(cls, path) -> "Gather":
        return cls(read_raster(path))

    def save(self, path) -> None:
        write_raster(self.amplitudes, path)


@dataclass(frozen=True)
class SegMap:
    """Per-pixel curvature probability in [0, 1], aligned with a gather."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float32)
        if v.ndim != 2:
            raise ValueError("segmentation map must be 2-D")
        _require_finite(v, "segmentation map")
        v = np.clip(v, 0.0, 1.0)
        object.__setattr__(self, "values", _freeze(v))

    @property
    def n_depth(self) -> int:
        return self.values.shape[0]

    @property
    def n_offset(self) -> int:
        return self.values.shape[1]

    def save(self, path) -> None:
        write_raster(self.values, path)


@dataclass(frozen=True)
class Curve:
    """One RMO pick: at most one depth per offset column, offsets increasing.

    Depths are float32 row coordinates; fractional values appear after
    regression refinement.  Gaps in offset coverage are allowed.
    """

    offsets: np.ndarray
    depths: np.ndarray

    def __post_init__(self):
        o = np.asarray(self.offsets, dtype=np.int64)
        d = np.asarray(self.depths, dtype=np.float32)
        if o.ndim != 1 or d.ndim != 1 or o.shape != d.shape:
            raise ValueError("offsets and depths must be matching 1-D arrays")
        if o.size and np.any(np.diff(o) <= 0):
            raise ValueError("curve offsets must be strictly increasing")
        _require_finite(d, "curve depths")
        object.__setattr__(self, "offsets", _freeze(o))
        object.__setattr__(self, "depths", _freeze(d))

    def __len__(self) -> int:
        return int(self.offsets.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Curve):
            return NotImplemented
        return np.array_equal(self.offsets, other.offsets) and np.array_equal(
            self.depths, other.depths
        )

    def __hash__(self):
        return hash((self.offsets.tobytes(), self.depths.tobytes()))

    @property
    def left(self) -> tuple[float, float]:
        """(offset, depth) of the first point."""
        return float(self.offsets[0]), float(self.depths[0])

    @property
    def right(self) -> tuple[float, float]:
        """(offset, depth) of the last point."""
        return float(self.offsets[-1]), float(self.depths[-1])

    def points(self):
        """Iterate (offset_index, depth) pairs."""
        return zip(self.offsets.tolist(), self.depths.tolist())

    @classmethod
    def from_points(cls, pts) -> "Curve":
        pts = list(pts)
        if not pts:
            return cls(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float32))
        o, d = zip(*pts)
        return cls(np.asarray(o), np.asarray(d))


@dataclass(frozen=True)
class SlopeField:
    """Kernel-smoothed local event dip on a coarse (offset, depth) grid.

    `values[i, j]` is the slope (depth samples per trace) of the cell whose
    pixel footprint is offsets [i*cell_offset, (i+1)*cell_offset) and depths
    [j*cell_depth, (j+1)*cell_depth).
    """

    values: np.ndarray
    cell_offset: int
    cell_depth: int
    h_prior: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError("slope field grid must be at least 1x1")
        _require_finite(v, "slope field")
        if self.cell_offset < 1 or self.cell_depth < 1:
            raise ValueError("cell sizes must be >= 1 pixel")
        object.__setattr__(self, "values", _freeze(v))

    @property
    def n_offset_cells(self) -> int:
        return self.values.shape[0]

    @property
    def n_depth_cells(self) -> int:
        return self.values.shape[1]

    def lookup(self, offset: float, depth: float) -> float:
        """Slope of the cell containing pixel (offset, depth); edges clamp."""
        i = min(max(int(offset // self.cell_offset), 0), self.n_offset_cells - 1)
        j = min(max(int(depth // self.cell_depth), 0), self.n_depth_cells - 1)
        return float(self.values[i, j])

    def save(self, path) -> None:
        # exported with offset cells as rows
        write_raster(self.values.astype(np.float32), path)


def write_raster(raster, path) -> None:
    """Write a 2-D float raster in CIGR format (bit-exact round-trip)."""
    a = np.asarray(raster, dtype=np.float32)
    if a.ndim != 2:
        raise ValueError("raster must be 2-D")
    _require_finite(a, "raster")
    n_rows, n_cols = a.shape
    if n_rows == 0 or n_cols == 0 or n_rows * n_cols > _MAX_CELLS:
        raise DimensionOverflowError(f"unsupported raster dims {n_rows}x{n_cols}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(RASTER_MAGIC, RASTER_VERSION, n_rows, n_cols))
        fh.write(np.ascontiguousarray(a).astype("<f4").tobytes())


def read_raster(path) -> np.ndarray:
    """Read a CIGR raster back as a float32 array."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise TruncatedHeaderError(f"{path}: truncated header ({len(header)} bytes)")
        magic, version, n_rows, n_cols = _HEADER.unpack(header)
        if magic != RASTER_MAGIC:
            raise BadMagicError(f"{path}: bad magic {magic!r}")
        if version != RASTER_VERSION:
            raise GridIOError(f"{path}: unsupported version {version}")
        if n_rows == 0 or n_cols == 0 or n_rows * n_cols > _MAX_CELLS:
            raise DimensionOverflowError(f"{path}: bad dims {n_rows}x{n_cols}")
        payload = fh.read(4 * n_rows * n_cols)
    if len(payload) < 4 * n_rows * n_cols:
        raise TruncatedPayloadError(
            f"{path}: expected {n_rows * n_cols} values, got {len(payload) // 4}"
        )
    return np.frombuffer(payload, dtype="<f4").reshape(n_rows, n_cols).copy()


def write_curves(curves, path) -> None:
    """Write curves as CSV records `curve_id,offset_index,depth`.

    Curve ids are list positions.  Empty curves produce no records and are
    therefore not recoverable on read.
    """
    lines = [CURVE_HEADER]
    for cid, curve in enumerate(curves):
        for o, d in curve.points():
            lines.append(f"{cid},{o},{format(d, '.9g')}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_curves(path) -> list[Curve]:
    """Read a curve CSV; returns curves ordered by curve id."""
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.strip() for ln in fh]
    lines = [ln for ln in lines if ln]
    if not lines or lines[0] != CURVE_HEADER:
        raise CurveFormatError(f"{path}: missing header line")
    per_id: dict[int, list[tuple[int, float]]] = {}
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 3:
            raise CurveFormatError(f"{path}: malformed record {ln!r}")
        try:
            cid, o, d = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as exc:
            raise CurveFormatError(f"{path}: malformed record {ln!r}") from exc
        per_id.setdefault(cid, []).append((o, d))
    curves = []
    for cid in sorted(per_id):
        pts = per_id[cid]
        offs = [p[0] for p in pts]
        if any(b <= a for a, b in zip(offs, offs[1:])):
            raise CurveFormatError(
                f"{path}: offsets not strictly increasing within curve {cid}"
            )
        curves.append(Curve.from_points(pts))
    return curves
