"""Command line: train on a labeled dataset, export maps for gathers."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .data import load_dataset
from .infer import infer_export
from .model import NetConfig
from .train import TrainConfig, load_checkpoint, save_checkpoint, train


def cmd_train(args) -> int:
    x_train, y_train = load_dataset(args.data, limit=args.limit)
    x_val, y_val = load_dataset(args.val_data, limit=args.val_limit)
    net_config = NetConfig(cbam_reduction=args.cbam_reduction)
    train_config = TrainConfig(
        lr=args.lr, batch_size=args.batch_size, max_epochs=args.max_epochs,
        patience=args.patience, seed=args.seed,
    )
    state, history = train(x_train, y_train, x_val, y_val,
                           net_config, train_config, verbose=True)
    save_checkpoint(args.out, state, net_config, train_config, history)
    best = max(h["val_miou"] for h in history)
    print(f"best validation MIOU {best:.4f} over {len(history)} epochs")
    if args.history:
        Path(args.history).write_text(json.dumps(history, indent=2) + "\n")
    return 0


def cmd_infer(args) -> int:
    net, _ = load_checkpoint(args.checkpoint)
    gather_dir = Path(args.gathers)
    paths = [p for p in sorted(gather_dir.glob("*.cigr"))
             if not p.stem.endswith(("_mask", "_seg"))]
    if args.stem:
        keep = set(args.stem)
        paths = [p for p in paths if p.stem in keep]
    if not paths:
        raise SystemExit(f"infer: no gathers found in {gather_dir}")
    written = infer_export(net, paths, args.out)
    print(f"wrote {len(written)} segmentation maps to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ifsn", description="Curvature segmentation network"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train on a labeled CIGR dataset")
    p.add_argument("--data", required=True, help="training dataset directory")
    p.add_argument("--val-data", required=True, help="validation dataset directory")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--history", help="optional JSON path for the epoch history")
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--val-limit", type=int, default=None)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--max-epochs", type=int, default=50)
    p.add_argument("--patience", type=int, default=5)
    p.add_argument("--cbam-reduction", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="export segmentation maps")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--gathers", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--stem", action="append",
                   help="restrict to these gather stems (repeatable)")
    p.set_defaults(func=cmd_infer)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
