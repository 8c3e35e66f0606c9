"""CLI: train a query model and export the artifact bundle."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .errors import ExporterError
from .export import export_run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="score-exporter",
        description="Train a small query model on a synthetic dataset and export "
        "telemetry, embeddings, gradient-norm scores, and class recalls.",
    )
    parser.add_argument(
        "--dataset",
        required=True,
        help='e.g. "blobs:classes=10,dim=8,train=100,test=40" or '
        '"mixture1d:mu0=-1,mu1=1,sigma0=0.5,sigma1=1"',
    )
    parser.add_argument(
        "--epochs", type=int, default=10,
        help="query-model budget; default 10, i.e. 10%% of a nominal 100-epoch schedule",
    )
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", required=True)
    parser.add_argument("--arch", choices=["linear", "mlp"], default="linear")
    parser.add_argument("--hidden", type=int, default=32)
    parser.add_argument("--lr", type=float, default=0.5)
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--val-fraction", type=float, default=0.5)
    parser.add_argument(
        "--data-seed", type=int, default=None,
        help="pin the dataset draw separately from the training seed",
    )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        bundle = export_run(
            dataset_spec=args.dataset,
            epochs=args.epochs,
            seed=args.seed,
            out_dir=args.out_dir,
            arch=args.arch,
            hidden=args.hidden,
            lr=args.lr,
            batch_size=args.batch_size,
            val_fraction=args.val_fraction,
            data_seed=args.data_seed,
        )
    except (ExporterError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 1
    print(
        json.dumps(
            {
                "command": "export",
                "bundle": bundle.bundle,
                "final_train_accuracy": bundle.final_train_accuracy,
            }
        )
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
