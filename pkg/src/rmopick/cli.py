"""Batch command-line front-end.

Subcommands:
    synth   generate a labeled synthetic dataset
    pick    run the picking cascade over gathers
    eval    score automatic picks against reference picks
    plot    render a gather with curve overlays to a PPM image
    sweep   vary one hyperparameter and tabulate metrics

File naming contract (dataset directory):
    <stem>.cigr        gather raster
    <stem>_mask.cigr   ground-truth label mask (oracle segmenter input)
    <stem>_seg.cigr    externally produced segmentation map
    <stem>_truth.csv   ground-truth curves
    <stem>_picks.csv   picked curves (written by `pick`)
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import PipelineConfig, config_from_flat, load_config_file, preset_config
from .features import feature_stack
from .gridio import Gather, read_curves, read_raster, write_curves
from .metrics import mean_semblance, report, slope_mse, track_rate
from .refine import pick_stages
from .segmenters import SegmenterKind, load_segmentation, segment_baseline, segment_oracle
from .synthgen import LabelMask, SynthSpec, generate_dataset


def _resolve_config(args) -> PipelineConfig:
    cfg = preset_config(args.preset) if args.preset else PipelineConfig()
    if getattr(args, "config", None):
        cfg = load_config_file(args.config, base=cfg)
    overrides = {}
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise SystemExit(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    if overrides:
        cfg = config_from_flat(overrides, base=cfg)
    return cfg


def _add_config_flags(p):
    p.add_argument("--preset", choices=("bp", "fa", "fb"),
                   help="named per-dataset hyperparameter preset to start from")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a single config field (repeatable)")


def _gather_stems(gather_dir: Path):
    stems = []
    for path in sorted(gather_dir.glob("*.cigr")):
        stem = path.stem
        if stem.endswith(("_mask", "_seg", "_field")) or "_feat_" in stem:
            continue
        stems.append(stem)
    return stems


# ---------------------------------------------------------------- synth

def cmd_synth(args) -> int:
    counts = {}
    for item in args.count or []:
        try:
            k, n = item.split("=")
            counts[int(k)] = int(n)
        except ValueError:
            raise SystemExit(f"--count expects K=N, got {item!r}")
    if not counts:
        raise SystemExit("synth: at least one --count K=N is required")
    spec = SynthSpec(
        d_max=args.d_max, n_depth=args.n_depth, n_offset=args.n_offset,
        r_c=args.r_c, o_0=args.o_0, noise_frac=args.noise_frac,
        f_start=args.f_start, f_end=args.f_end,
        seed=args.seed, ladder_jitter=args.ladder_jitter,
    )
    manifest = generate_dataset(spec, counts, args.out,
                                write_truth=not args.no_truth)
    print(f"wrote {len(manifest['samples'])} gathers to {args.out}")
    return 0


# ----------------------------------------------------------------- pick

def _load_mask(path) -> LabelMask:
    return LabelMask(np.rint(read_raster(path)).astype(np.uint8))


def _segment(gather: Gather, stem: str, gather_dir: Path,
             kind: SegmenterKind, cfg: PipelineConfig):
    if kind.name == "oracle":
        mask_path = gather_dir / f"{stem}_mask.cigr"
        if not mask_path.exists():
            raise FileNotFoundError(f"missing label mask {mask_path}")
        return segment_oracle(_load_mask(mask_path), kind.blur_sigma)
    if kind.name == "baseline":
        return segment_baseline(feature_stack(gather, cfg.features))
    seg_dir = Path(kind.external_dir) if kind.external_dir else gather_dir
    seg_path = seg_dir / f"{stem}_seg.cigr"
    if not seg_path.exists():
        raise FileNotFoundError(f"missing external map {seg_path}")
    return load_segmentation(seg_path, (gather.n_depth, gather.n_offset))


def _pick_one(task):
    """Worker: pick one gather; returns (stem, record)."""
    stem, gather_dir, out_dir, kind, cfg, export_features, export_field = task
    gather_dir, out_dir = Path(gather_dir), Path(out_dir)
    try:
        gather = Gather.load(gather_dir / f"{stem}.cigr")
        if export_features:
            feature_stack(gather, cfg.features).save(out_dir / f"{stem}_feat")
        segmap = _segment(gather, stem, gather_dir, kind, cfg)
        result = pick_stages(segmap, cfg)
        picks_path = out_dir / f"{stem}_picks.csv"
        write_curves(result.final, picks_path)
        record = {"picks": picks_path.name, **result.counts}
        if export_field and result.field is not None:
            result.field.save(out_dir / f"{stem}_field.cigr")
            record["field"] = f"{stem}_field.cigr"
        return stem, record
    except Exception as exc:  # per-gather soft failure
        return stem, {"error": f"{type(exc).__name__}: {exc}"}


def cmd_pick(args) -> int:
    cfg = _resolve_config(args)
    gather_dir = Path(args.gathers)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stems = args.stem or _gather_stems(gather_dir)
    if not stems:
        raise SystemExit(f"pick: no gathers found in {gather_dir}")
    kind = SegmenterKind(args.segmenter, blur_sigma=args.blur_sigma,
                         external_dir=args.external_dir)
    tasks = [(s, str(gather_dir), str(out_dir), kind, cfg,
              args.export_features, args.export_field) for s in stems]
    t0 = time.perf_counter()
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_pick_one, tasks))
    else:
        results = [_pick_one(t) for t in tasks]
    elapsed = time.perf_counter() - t0

    records = dict(results)
    errors = {s: r["error"] for s, r in records.items() if "error" in r}
    manifest = {
        "inputs": {"gathers": str(gather_dir), "stems": stems,
                   "segmenter": kind.name},
        "config": {k: v for k, v in sorted(cfg.flat().items())},
        "outputs": records,
        "errors": errors,
        "elapsed_seconds": elapsed,
    }
    with open(out_dir / "run_manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    for stem in stems:
        rec = records[stem]
        if "error" in rec:
            print(f"{stem}: ERROR {rec['error']}", file=sys.stderr)
        else:
            print(f"{stem}: raw={rec['raw']} merged={rec['merged']} "
                  f"final={rec['final']}")
    return 0


# ----------------------------------------------------------------- eval

def _load_reference(manual_dir: Path, stem: str):
    for suffix in ("_truth.csv", "_picks.csv"):
        path = manual_dir / f"{stem}{suffix}"
        if path.exists():
            return read_curves(path)
    return None


def _eval_entries(args):
    gather_dir = Path(args.gathers)
    auto_dir = Path(args.auto)
    manual_dir = Path(args.manual)
    entries = []
    for stem in _gather_stems(gather_dir):
        manuals = _load_reference(manual_dir, stem)
        if manuals is None:
            continue
        gather = Gather.load(gather_dir / f"{stem}.cigr")
        auto_path = auto_dir / f"{stem}_picks.csv"
        autos = read_curves(auto_path) if auto_path.exists() else []
        entries.append((stem, gather, autos, manuals))
    return entries


def cmd_eval(args) -> int:
    cfg = _resolve_config(args)
    entries = _eval_entries(args)
    if not entries:
        raise SystemExit("eval: no gather/reference pairs found")
    text = report(entries, cfg)
    if args.out:
        Path(args.out).write_text(text, encoding="ascii")
    else:
        sys.stdout.write(text)
    return 0


# ----------------------------------------------------------------- plot

def _gray_image(amplitudes) -> np.ndarray:
    peak = float(np.abs(amplitudes).max())
    scale = 127.5 / peak if peak > 0 else 0.0
    gray = np.clip(127.5 + amplitudes * scale, 0, 255).astype(np.uint8)
    return np.repeat(gray[:, :, None], 3, axis=2)


def _field_image(field_values, dims) -> np.ndarray:
    # resample cells to pixel resolution; blue negative, red positive slopes
    n_depth, n_offset = dims
    peak = float(np.abs(field_values).max()) or 1.0
    img = np.zeros((n_depth, n_offset, 3), dtype=np.uint8)
    n_oc, n_dc = field_values.shape
    oi = np.minimum(np.arange(n_offset) * n_oc // max(n_offset, 1), n_oc - 1)
    di = np.minimum(np.arange(n_depth) * n_dc // max(n_depth, 1), n_dc - 1)
    v = field_values[oi[None, :], di[:, None]] / peak  # (depth, offset)
    img[..., 0] = np.clip(127.5 + 127.5 * v, 0, 255).astype(np.uint8)
    img[..., 2] = np.clip(127.5 - 127.5 * v, 0, 255).astype(np.uint8)
    img[..., 1] = 127
    return img


def write_ppm(image: np.ndarray, path) -> None:
    h, w, _ = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(image.tobytes())


def cmd_plot(args) -> int:
    gather = Gather.load(args.gather)
    image = _gray_image(gather.amplitudes.astype(np.float64))
    for curves_path in args.curves or []:
        for curve in read_curves(curves_path):
            rows = np.clip(np.rint(curve.depths).astype(int), 0, gather.n_depth - 1)
            image[rows, curve.offsets] = (255, 32, 32)
    if args.field:
        field_values = read_raster(args.field).astype(np.float64)
        panel = _field_image(field_values, (gather.n_depth, gather.n_offset))
        gap = np.full((gather.n_depth, 2, 3), 255, dtype=np.uint8)
        image = np.concatenate([image, gap, panel], axis=1)
    write_ppm(image, args.out)
    print(f"wrote {args.out}")
    return 0


# ---------------------------------------------------------------- sweep

SWEEP_HEADER = ("param,value,n_raw,n_merged,n_final,"
                "semblance,track_rate,slope_mse")


def _sweep_once(entries, cfg: PipelineConfig):
    """entries: (stem, gather, segmap, manuals); returns aggregate row."""
    n_raw = n_merged = n_final = 0
    sem = []
    tr = []
    mse = []
    for _, gather, segmap, manuals in entries:
        result = pick_stages(segmap, cfg)
        n_raw += len(result.raw)
        n_merged += len(result.merged)
        n_final += len(result.final)
        sem.append(mean_semblance(gather, result.final, cfg.metric.h_s))
        tr.append(track_rate(result.final, manuals, cfg.metric.d_t))
        mse.append(slope_mse(result.final, manuals, cfg,
                             (gather.n_depth, gather.n_offset)))
    return {
        "n_raw": n_raw, "n_merged": n_merged, "n_final": n_final,
        "semblance": float(np.mean(sem)), "track_rate": float(np.mean(tr)),
        "slope_mse": float(np.mean(mse)),
    }


def cmd_sweep(args) -> int:
    base = _resolve_config(args)
    gather_dir = Path(args.gathers)
    manual_dir = Path(args.manual) if args.manual else gather_dir
    kind = SegmenterKind(args.segmenter, blur_sigma=args.blur_sigma,
                         external_dir=args.external_dir)
    entries = []
    for stem in _gather_stems(gather_dir):
        manuals = _load_reference(manual_dir, stem)
        if manuals is None:
            continue
        gather = Gather.load(gather_dir / f"{stem}.cigr")
        segmap = _segment(gather, stem, gather_dir, kind, base)
        entries.append((stem, gather, segmap, manuals))
    if not entries:
        raise SystemExit("sweep: no gather/reference pairs found")

    values = [v.strip() for v in args.values.split(",") if v.strip()]
    lines = [SWEEP_HEADER]
    for value in values:
        cfg = config_from_flat({args.param: value}, base=base)
        row = _sweep_once(entries, cfg)
        lines.append(
            f"{args.param},{value},{row['n_raw']},{row['n_merged']},"
            f"{row['n_final']},{row['semblance']:.6f},"
            f"{row['track_rate']:.6f},{row['slope_mse']:.8f}"
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="ascii")
    else:
        sys.stdout.write(text)
    return 0


# ----------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rmopick",
        description="Residual-moveout picking toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate labeled synthetic gathers")
    p.add_argument("--out", required=True)
    p.add_argument("--count", action="append", metavar="K=N",
                   help="N gathers with K events (repeatable)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-depth", type=int, default=1000)
    p.add_argument("--n-offset", type=int, default=100)
    p.add_argument("--d-max", type=int, default=1000)
    p.add_argument("--r-c", type=float, default=0.04)
    p.add_argument("--o-0", type=float, default=None)
    p.add_argument("--noise-frac", type=float, default=0.05)
    p.add_argument("--f-start", type=float, default=16.0 / 1000.0)
    p.add_argument("--f-end", type=float, default=4.0 / 1000.0)
    p.add_argument("--ladder-jitter", type=float, default=0.0125)
    p.add_argument("--no-truth", action="store_true",
                   help="skip writing ground-truth curve files")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("pick", help="run the picking cascade")
    p.add_argument("--gathers", required=True, help="directory of .cigr gathers")
    p.add_argument("--out", required=True, help="output directory for picks")
    p.add_argument("--stem", action="append",
                   help="pick only these gather stems (repeatable)")
    p.add_argument("--segmenter", choices=("oracle", "baseline", "external"),
                   default="oracle")
    p.add_argument("--blur-sigma", type=float, default=1.0,
                   help="oracle blur; 0 reproduces the mask exactly")
    p.add_argument("--external-dir",
                   help="directory of <stem>_seg.cigr maps (default: gathers dir)")
    p.add_argument("--export-features", action="store_true",
                   help="also write the 4 feature channels as CIGR rasters")
    p.add_argument("--export-field", action="store_true",
                   help="also write the slope field as <stem>_field.cigr")
    p.add_argument("--jobs", type=int, default=1)
    _add_config_flags(p)
    p.set_defaults(func=cmd_pick)

    p = sub.add_parser("eval", help="score picks against references")
    p.add_argument("--gathers", required=True)
    p.add_argument("--auto", required=True, help="directory of <stem>_picks.csv")
    p.add_argument("--manual", required=True,
                   help="directory of <stem>_truth.csv or <stem>_picks.csv")
    p.add_argument("--out", help="report path (default: stdout)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("plot", help="render gather + curves to a P6 PPM")
    p.add_argument("--gather", required=True)
    p.add_argument("--curves", action="append", help="curve CSV (repeatable)")
    p.add_argument("--field", help="slope-field raster to show alongside")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("sweep", help="vary one hyperparameter, tabulate metrics")
    p.add_argument("--param", required=True, help="config field to vary")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--gathers", required=True)
    p.add_argument("--manual", help="reference curve dir (default: gathers dir)")
    p.add_argument("--segmenter", choices=("oracle", "baseline", "external"),
                   default="oracle")
    p.add_argument("--blur-sigma", type=float, default=1.0)
    p.add_argument("--external-dir")
    p.add_argument("--out", help="table path (default: stdout)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
