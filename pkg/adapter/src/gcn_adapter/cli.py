"""Command line wrapper: one instance in, one probability-matrix file out."""

from __future__ import annotations

import argparse
import sys

from .export import MODEL_SIZES, AdapterError, export_probabilities


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gcn-adapter")
    sub = parser.add_subparsers(dest="command", required=True)
    e = sub.add_parser("export", help="write the edge-probability heatmap of one instance")
    e.add_argument("--instance", required=True, help="EUC_2D TSPLIB file")
    e.add_argument("--size", type=int, required=True, choices=list(MODEL_SIZES),
                   help="dimension the pretrained model was built for")
    e.add_argument("--checkpoint", required=True, help="model checkpoint path")
    e.add_argument("--out", required=True, help="probability-matrix output file")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = export_probabilities(args.instance, args.size, args.checkpoint, args.out)
    except AdapterError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
