"""Stage 2: split a segmentation map into preliminary curves.

Binarize the probability map, trace the outer border of every 8-connected
blob, rasterize each border into a filled region mask, and pick the
strongest pixel per offset column inside each region.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .gridio import Curve, SegMap

CONN8 = np.ones((3, 3), dtype=np.uint8)

# Clockwise neighbour ring (row down), starting west.
_RING = ((0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1))


@dataclass(frozen=True)
class Contour:
    """Closed outer border of one blob: consecutive pixels are 8-adjacent."""

    pixels: tuple

    def __post_init__(self):
        px = tuple((int(r), int(c)) for r, c in self.pixels)
        if not px:
            raise ValueError("contour must be non-empty")
        for (r1, c1), (r2, c2) in zip(px, px[1:] + (px[0],)):
            if len(px) > 1 and max(abs(r1 - r2), abs(c1 - c2)) > 1:
                raise ValueError("contour pixels must be 8-adjacent and closed")
        object.__setattr__(self, "pixels", px)

    def __len__(self):
        return len(self.pixels)


@dataclass(frozen=True)
class RegionMask:
    """Filled footprint of one contour (border pixels included)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2 or not np.isin(v, (0, 1)).all():
            raise ValueError("region mask must be a binary 2-D raster")
        v = np.ascontiguousarray(v.astype(np.uint8))
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


def binarize(values, t_seg: float):
    """Below-threshold pixels to 0, the rest (including exactly t_seg) to 1."""
    if not 0.0 < t_seg < 1.0:
        raise ValueError("t_seg must lie in (0, 1)")
    v = np.asarray(values)
    return (~(v < t_seg)).astype(np.uint8)


def _trace_border(component: np.ndarray, start: tuple) -> list:
    """Moore border following around one 8-connected component.

    `start` must be the component's top-left-most pixel so its west and
    north neighbours are guaranteed background.  Terminates when the first
    move out of `start` repeats (handles thin shapes that revisit pixels).
    """
    rows, cols = component.shape

    def fg(r, c):
        return 0 <= r < rows and 0 <= c < cols and component[r, c]

    contour = [start]
    cur = start
    back_dir = 0  # direction from cur to its backtrack pixel; west initially
    first_move = None
    budget = 8 * int(component.sum()) + 8
    for _ in range(budget):
        nxt = None
        for step in range(1, 9):
            d = (back_dir + step) % 8
            r, c = cur[0] + _RING[d][0], cur[1] + _RING[d][1]
            if fg(r, c):
                nxt = (r, c)
                prev = (back_dir + step - 1) % 8
                backtrack = (cur[0] + _RING[prev][0], cur[1] + _RING[prev][1])
                break
        if nxt is None:
            return contour  # isolated pixel
        move = (cur, nxt)
        if first_move is None:
            first_move = move
        elif move == first_move:
            if contour[-1] == start:
                contour.pop()
            return contour
        contour.append(nxt)
        cur = nxt
        # direction from the new current pixel back to the last background
        # pixel scanned; consecutive ring cells are always 8-adjacent.
        dr, dc = backtrack[0] - cur[0], backtrack[1] - cur[1]
        back_dir = _RING.index((dr, dc))
    raise RuntimeError("border trace failed to close")  # pragma: no cover


def find_contours(binary) -> list[Contour]:
    """Outer contour of every 8-connected component, top-left-most first."""
    b = np.asarray(binary)
    labels, n = ndimage.label(b, structure=CONN8)
    if n == 0:
        return []
    flat = labels.ravel()
    order = []
    first_seen = {}
    for idx in np.flatnonzero(flat):
        lab = flat[idx]
        if lab not in first_seen:
            first_seen[lab] = idx
            order.append(lab)
            if len(first_seen) == n:
                break
    contours = []
    for lab in order:
        start_flat = first_seen[lab]
        start = (start_flat // b.shape[1], start_flat % b.shape[1])
        contours.append(Contour(tuple(_trace_border(labels == lab, start))))
    return contours


def region_mask(contour: Contour, dims: tuple[int, int]) -> RegionMask:
    """Fill a contour: border pixels plus everything they enclose."""
    grid = np.zeros(dims, dtype=bool)
    rr = np.array([p[0] for p in contour.pixels])
    cc = np.array([p[1] for p in contour.pixels])
    if rr.min() < 0 or cc.min() < 0 or rr.max() >= dims[0] or cc.max() >= dims[1]:
        raise ValueError("contour exceeds raster dims")
    # fill on a padded bounding box so the exterior stays border-connected
    r0, r1 = rr.min(), rr.max()
    c0, c1 = cc.min(), cc.max()
    local = np.zeros((r1 - r0 + 3, c1 - c0 + 3), dtype=bool)
    local[rr - r0 + 1, cc - c0 + 1] = True
    filled = ndimage.binary_fill_holes(local)
    grid[r0 : r1 + 1, c0 : c1 + 1] = filled[1:-1, 1:-1]
    return RegionMask(grid.astype(np.uint8))


def extract_raw_curve(seg_values, mask: RegionMask) -> Curve:
    """Strongest masked pixel per offset column; all-zero columns skipped."""
    seg = np.asarray(seg_values, dtype=np.float64)
    if seg.shape != mask.values.shape:
        raise ValueError("mask dims must match the segmentation map")
    product = seg * mask.values
    col_max = product.max(axis=0)
    cols = np.flatnonzero(col_max > 0)
    if cols.size == 0:
        return Curve.from_points([])
    rows = product[:, cols].argmax(axis=0)  # argmax ties break to smaller depth
    return Curve(cols.astype(np.int64), rows.astype(np.float32))


def extract_all(segmap: SegMap, t_seg: float) -> list[Curve]:
    """Full stage-2 cascade: binarize, trace, fill, pick per region."""
    values = segmap.values
    binary = binarize(values, t_seg)
    curves = []
    for contour in find_contours(binary):
        mask = region_mask(contour, values.shape)
        curve = extract_raw_curve(values, mask)
        if len(curve):
            curves.append(curve)
    return curves
