"""CLI for the reference consumer."""

from __future__ import annotations

import argparse
import sys

from .report import ImageMismatchError, adaptivity_report
from .seqreader import SequenceReadError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dsa-consumer",
        description="Run the toy transformer over .dsa sequences and report "
        "attention adaptivity between two scans of one image.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("adaptivity", help="compare two scans of one image")
    p.add_argument("--seq-a", required=True)
    p.add_argument("--seq-b", required=True)
    p.add_argument("--image", help="optional reference image to verify ids")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--model-seed", type=int, default=0)
    args = parser.parse_args(argv)

    try:
        result = adaptivity_report(
            args.seq_a, args.seq_b, args.out_dir,
            image_path=args.image, model_seed=args.model_seed,
        )
    except (SequenceReadError, ImageMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    print(f"seeds: {result.seeds[0]} vs {result.seeds[1]}")
    print(f"pixel-attention L1 distance: {result.distance:.6f}")
    print(f"report: {result.report_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
