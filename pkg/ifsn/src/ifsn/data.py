"""Dataset loading: CIGR gather/mask pairs listed by a JSON manifest."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch

from .cigr import read_raster
from .features import FeatureParams, feature_tensor


def load_manifest(data_dir) -> list[dict]:
    path = Path(data_dir) / "manifest.json"
    with open(path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    return manifest["samples"]


def load_pairs(data_dir, samples, params: FeatureParams = FeatureParams()):
    """Feature and label tensors for the given manifest records.

    Returns (x, y): x is (N, 4, H, W) float32, y is (N, H, W) float32 in
    {0, 1}.  All gathers must share one shape.
    """
    data_dir = Path(data_dir)
    xs = []
    ys = []
    for rec in samples:
        amps = read_raster(data_dir / rec["gather"])
        mask = read_raster(data_dir / rec["mask"])
        if mask.shape != amps.shape:
            raise ValueError(f"{rec['gather']}: mask shape mismatch")
        xs.append(feature_tensor(amps, params))
        ys.append(np.rint(mask).astype(np.float32))
    x = torch.from_numpy(np.stack(xs))
    y = torch.from_numpy(np.stack(ys))
    return x, y


def load_dataset(data_dir, limit: int | None = None,
                 params: FeatureParams = FeatureParams()):
    samples = load_manifest(data_dir)
    if limit is not None:
        samples = samples[:limit]
    return load_pairs(data_dir, samples, params)
