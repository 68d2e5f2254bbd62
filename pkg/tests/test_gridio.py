import numpy as np
import pytest

from rmopick.gridio import (
    BadMagicError,
    Curve,
    CurveFormatError,
    DimensionOverflowError,
    Gather,
    SegMap,
    SlopeField,
    TruncatedHeaderError,
    TruncatedPayloadError,
    read_curves,
    read_raster,
    write_curves,
    write_raster,
)


def test_raster_round_trip_small(tmp_path):
    path = tmp_path / "a.cigr"
    data = np.array([[0.0, 1.0], [2.0, 3.0]], dtype=np.float32)
    write_raster(data, path)
    assert path.stat().st_size == 16 + 16
    back = read_raster(path)
    assert back.dtype == np.float32
    assert np.array_equal(back, data)


def test_raster_round_trip_random_bitwise(tmp_path):
    rng = np.random.default_rng(0)
    for trial in range(20):
        shape = (rng.integers(1, 40), rng.integers(1, 40))
        data = rng.normal(scale=1e3, size=shape).astype(np.float32)
        path = tmp_path / f"r{trial}.cigr"
        write_raster(data, path)
        assert read_raster(path).tobytes() == data.tobytes()


def test_empty_file_is_truncated_header(tmp_path):
    path = tmp_path / "empty.cigr"
    path.write_bytes(b"")
    with pytest.raises(TruncatedHeaderError):
        read_raster(path)


def test_short_payload_is_truncated(tmp_path):
    path = tmp_path / "short.cigr"
    write_raster(np.zeros((3, 3), dtype=np.float32), path)
    raw = path.read_bytes()
    path.write_bytes(raw[: 16 + 4 * 4])  # header promises 9 values, file has 4
    with pytest.raises(TruncatedPayloadError):
        read_raster(path)


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.cigr"
    write_raster(np.zeros((2, 2), dtype=np.float32), path)
    raw = bytearray(path.read_bytes())
    raw[:4] = b"NOPE"
    path.write_bytes(bytes(raw))
    with pytest.raises(BadMagicError):
        read_raster(path)


def test_dimension_overflow(tmp_path):
    import struct

    path = tmp_path / "huge.cigr"
    path.write_bytes(struct.pack("<4sIII", b"CIGR", 1, 2**30, 2**30))
    with pytest.raises(DimensionOverflowError):
        read_raster(path)


def test_write_rejects_non_finite(tmp_path):
    with pytest.raises(ValueError):
        write_raster(np.array([[np.nan, 0.0], [0.0, 0.0]]), tmp_path / "x.cigr")


def test_curve_round_trip_two_points(tmp_path):
    path = tmp_path / "c.csv"
    curve = Curve.from_points([(0, 10.5), (1, 11.0)])
    write_curves([curve], path)
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 3  # header + 2 records
    back = read_curves(path)
    assert back == [curve]


def test_curve_round_trip_random(tmp_path):
    rng = np.random.default_rng(1)
    curves = []
    for _ in range(10):
        n = int(rng.integers(1, 30))
        offsets = np.sort(rng.choice(200, size=n, replace=False))
        depths = rng.uniform(0, 999, size=n).astype(np.float32)
        curves.append(Curve(offsets, depths))
    path = tmp_path / "curves.csv"
    write_curves(curves, path)
    assert read_curves(path) == curves


def test_curve_repeated_offset_rejected(tmp_path):
    path = tmp_path / "dup.csv"
    path.write_text("curve_id,offset_index,depth\n0,3,10.0\n0,3,11.0\n")
    with pytest.raises(CurveFormatError):
        read_curves(path)


def test_curve_malformed_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("curve_id,offset_index,depth\n0,notanint,1.0\n")
    with pytest.raises(CurveFormatError):
        read_curves(path)


def test_empty_curve_list_round_trip(tmp_path):
    path = tmp_path / "none.csv"
    write_curves([], path)
    assert path.read_text().strip() == "curve_id,offset_index,depth"
    assert read_curves(path) == []


def test_gather_invariants():
    with pytest.raises(ValueError):
        Gather(np.ones((1, 5)))
    with pytest.raises(ValueError):
        Gather(np.full((3, 3), np.inf))
    g = Gather(np.zeros((3, 4)))
    assert (g.n_depth, g.n_offset) == (3, 4)
    with pytest.raises(ValueError):
        g.amplitudes[0, 0] = 1.0  # frozen


def test_segmap_clamps_and_validates():
    s = SegMap(np.array([[1.5, -0.2], [0.3, 0.7]]))
    assert s.values.max() <= 1.0 and s.values.min() >= 0.0
    with pytest.raises(ValueError):
        SegMap(np.array([[np.nan, 0.0]]))


def test_curve_invariants():
    with pytest.raises(ValueError):
        Curve(np.array([3, 3]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        Curve(np.array([1, 0]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        Curve(np.array([0]), np.array([np.inf]))
    empty = Curve.from_points([])
    assert len(empty) == 0


def test_slope_field_lookup_clamps():
    field = SlopeField(np.arange(6, dtype=float).reshape(2, 3), 2, 10, 5.0)
    assert field.lookup(0, 0) == 0.0
    assert field.lookup(3, 25) == 5.0
    assert field.lookup(99, 999) == 5.0  # clamps to last cell
    with pytest.raises(ValueError):
        SlopeField(np.zeros((0, 2)), 2, 10, 5.0)
