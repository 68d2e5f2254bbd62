"""Contract tests against the picking toolkit's external interfaces.

The toolkit is driven through its CLI and file formats only; these tests
confirm the two packages agree on the CIGR format and on the feature
definitions.
"""

import subprocess
import sys

import numpy as np
import pytest
import torch

from ifsn.cigr import read_raster, write_raster
from ifsn.features import FeatureParams, feature_tensor
from ifsn.infer import infer_export, segment_gather
from ifsn.model import NetConfig, SegNet

rmopick = pytest.importorskip("rmopick")


def _run_cli(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "rmopick.cli", *args],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("data")
    _run_cli("synth", "--out", str(out), "--count", "10=3", "--seed", "31",
             "--n-depth", "256", "--n-offset", "48", "--d-max", "200")
    return out


def test_cigr_round_trip_between_packages(tmp_path):
    rng = np.random.default_rng(0)
    data = rng.normal(size=(30, 20)).astype(np.float32)
    ours = tmp_path / "ours.cigr"
    write_raster(data, ours)
    assert np.array_equal(rmopick.read_raster(ours), data)
    theirs = tmp_path / "theirs.cigr"
    rmopick.write_raster(data, theirs)
    assert np.array_equal(read_raster(theirs), data)


def test_feature_channels_match_toolkit_export(dataset, tmp_path):
    picks = tmp_path / "picks"
    _run_cli("pick", "--gathers", str(dataset), "--out", str(picks),
             "--export-features", "--set", "n_min=5")
    for stem in ("cig_00000", "cig_00001", "cig_00002"):
        amps = read_raster(dataset / f"{stem}.cigr")
        mine = feature_tensor(amps, FeatureParams())
        for i, chan in enumerate(("agc1", "agc2", "bandpass", "peaks")):
            theirs = read_raster(picks / f"{stem}_feat_{chan}.cigr")
            assert np.max(np.abs(mine[i] - theirs)) <= 1e-5, chan


def test_exported_maps_load_in_toolkit(dataset, tmp_path):
    torch.manual_seed(7)
    net = SegNet(NetConfig(widths=(8, 16, 32, 64), cbam_reduction=8))
    net.eval()
    gathers = sorted(p for p in dataset.glob("*.cigr")
                     if not p.stem.endswith(("_mask", "_seg")))
    out = tmp_path / "maps"
    written = infer_export(net, gathers, out)
    assert [p.name for p in written] == [p.stem + "_seg.cigr" for p in gathers]
    from rmopick.segmenters import load_segmentation

    for gather_path, seg_path in zip(gathers, written):
        amps = read_raster(gather_path)
        seg = load_segmentation(seg_path, amps.shape)
        assert seg.values.shape == amps.shape
        assert float(seg.values.min()) >= 0.0
        assert float(seg.values.max()) <= 1.0


def test_exported_maps_drive_toolkit_pick(dataset, tmp_path):
    torch.manual_seed(8)
    net = SegNet(NetConfig(widths=(8, 16, 32, 64), cbam_reduction=8))
    net.eval()
    gathers = sorted(p for p in dataset.glob("*.cigr")
                     if not p.stem.endswith(("_mask", "_seg")))
    infer_export(net, gathers, dataset)  # drop _seg.cigr next to the gathers
    picks = tmp_path / "picks"
    _run_cli("pick", "--gathers", str(dataset), "--out", str(picks),
             "--segmenter", "external", "--set", "n_min=2")
    import json

    run = json.loads((picks / "run_manifest.json").read_text())
    assert run["errors"] == {}


def test_segment_gather_clamps():
    torch.manual_seed(9)
    net = SegNet(NetConfig(widths=(8, 16, 32, 64), cbam_reduction=8))
    net.eval()
    rng = np.random.default_rng(1)
    seg = segment_gather(net, rng.normal(size=(40, 24)).astype(np.float32))
    assert seg.dtype == np.float32
    assert seg.min() >= 0.0 and seg.max() <= 1.0
