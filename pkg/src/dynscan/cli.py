"""Command-line surface: saliency export, scanning, frequency maps, ablations.

Every subcommand is a deterministic function of its flags and input files;
resolved seeds are printed so any artifact can be regenerated.  Exit codes:
0 success, 2 configuration error, 3 I/O error, 4 format error.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from pathlib import Path

from . import analysis, report, seqfile
from .errors import ConfigError, PnmDecodeError
from .image import (
    Image,
    decode_pnm,
    encode_pnm,
    gray_to_image,
    to_grayscale,
    write_image,
)
from .saliency import compute_saliency
from .scanner import (
    ScanConfig,
    ScanVariant,
    SeedPolicy,
    derive_scan_seed,
    grid_patch_count,
    scan,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_FORMAT = 4

_SEED_FREE = (ScanVariant.SALIENT_PATCHES, ScanVariant.SALIENT_TRACING,
              ScanVariant.SYSTEMATIC)


def image_id_of(image: Image) -> str:
    """Content id: sha256 of the canonical PNM encoding (rename-proof)."""
    return hashlib.sha256(encode_pnm(image)).hexdigest()


def _variant(token: str) -> ScanVariant:
    try:
        return ScanVariant(token)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"unknown variant {token!r} (choose rp, rt, sp, st, systematic)"
        ) from None


def _variant_list(token: str) -> list[ScanVariant]:
    return [_variant(t) for t in token.split(",") if t]


def _int_list(token: str) -> list[int]:
    try:
        return [int(t) for t in token.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {token!r}") from None


def _read_image(path: str) -> Image:
    return decode_pnm(Path(path).read_bytes())


def _resolve_num_patches(value: str, height: int, width: int, patch_size: int) -> int:
    if value == "auto":
        return grid_patch_count(height, width, patch_size)
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"--num-patches must be an integer or 'auto', got {value!r}")


def _scan_from_args(image: Image, image_id: str, args):
    if args.variant is None or args.patch_size is None:
        raise ConfigError("scanning an image needs --variant and --patch-size")
    num = _resolve_num_patches(args.num_patches, image.height, image.width,
                               args.patch_size)
    config = ScanConfig(args.variant, args.patch_size, num)
    ctx = None
    if args.variant not in _SEED_FREE:
        policy = SeedPolicy(args.seed_policy)
        ctx = derive_scan_seed(args.seed, image_id, args.scan_index, policy)
    return scan(image, image_id, config, ctx=ctx)


def cmd_saliency(args) -> int:
    image = _read_image(args.input)
    saliency = compute_saliency(to_grayscale(image))
    write_image(args.output, gray_to_image(saliency))
    print(f"saliency map ({image.height}x{image.width}) -> {args.output}")
    return EXIT_OK


def cmd_scan(args) -> int:
    image = _read_image(args.input)
    image_id = image_id_of(image)
    sequence = _scan_from_args(image, image_id, args)
    seqfile.write_sequence_file(args.output, sequence)
    prov = sequence.provenance
    seed_note = (
        f"resolved_seed={prov.resolved_seed}"
        if prov.resolved_seed is not None
        else "seed-free"
    )
    print(
        f"scan variant={prov.config.variant.value} N={prov.config.num_patches} "
        f"P={prov.config.patch_size} {seed_note} image_id={image_id[:12]} "
        f"-> {args.output}"
    )
    return EXIT_OK


def cmd_freqmap(args) -> int:
    head = Path(args.input).read_bytes()[:4]
    source_image = None
    if head == seqfile.MAGIC:
        sequence = seqfile.read_sequence_file(args.input)
        if args.image:
            source_image = _read_image(args.image)
    else:
        source_image = _read_image(args.input)
        sequence = _scan_from_args(source_image, image_id_of(source_image), args)
    if args.overlay and source_image is None:
        raise ConfigError("--overlay on a .dsa input needs --image for the source")
    freq = analysis.frequency_map(sequence)
    n = sequence.provenance.config.num_patches
    p = sequence.provenance.config.patch_size
    total = int(freq.counts.sum())
    write_image(args.output, gray_to_image(analysis.freq_to_gray(freq)))
    print(f"frequency map -> {args.output}")
    print(f"pixel visits: {total} (= N*P^2 = {n}*{p}^2 = {n * p * p})")
    if args.overlay:
        write_image(args.overlay, analysis.overlay(freq, source_image))
        print(f"overlay -> {args.overlay}")
    if sequence.provenance.resolved_seed is not None:
        print(f"resolved_seed={sequence.provenance.resolved_seed}")
    return EXIT_OK


def cmd_ablate(args) -> int:
    corpus_dir = Path(args.input)
    paths = sorted(
        p
        for p in corpus_dir.iterdir()
        if p.suffix.lower() in (".pnm", ".pgm", ".ppm")
    )
    if not paths:
        raise ConfigError(f"no PNM images found in {corpus_dir}")
    corpus = []
    for path in paths:
        image = decode_pnm(path.read_bytes())
        corpus.append((image_id_of(image), image))
    rows = analysis.ablation_sweep(
        corpus,
        variants=args.variant,
        patch_sizes=[args.patch_size],
        n_values=args.n_list,
        trials=args.trials,
        global_seed=args.seed,
        jobs=args.jobs,
    )
    csv_text = analysis.rows_to_csv(rows)
    Path(args.output).write_bytes(csv_text.encode())
    figure_path = Path(args.output).with_suffix(".png")
    report.coverage_figure(rows, figure_path)
    print(f"{len(rows)} rows ({len(corpus)} images, trials={args.trials}, "
          f"seed={args.seed}) -> {args.output}")
    print(f"coverage figure -> {figure_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dynscan",
        description="Dynamic patch scanning: saliency maps, patch sequences, "
        "coverage analyses.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_scan_flags(p, required=True):
        p.add_argument("--variant", type=_variant, required=required,
                       help="rp | rt | sp | st | systematic")
        p.add_argument("--patch-size", type=int, required=required,
                       help="odd patch size P")
        p.add_argument("--num-patches", default="auto",
                       help="patch count N, or 'auto' for the systematic grid count")
        p.add_argument("--seed", type=int, default=0,
                       help="64-bit global seed (random variants)")
        p.add_argument("--seed-policy", default="stochastic",
                       choices=[policy.value for policy in SeedPolicy])
        p.add_argument("--scan-index", type=int, default=0,
                       help="scan counter mixed into stochastic seeds")

    p = sub.add_parser("saliency", help="export the saliency map as PGM")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_saliency)

    p = sub.add_parser("scan", help="scan one image into a .dsa sequence")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    add_scan_flags(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser(
        "freqmap", help="frequency map (and overlay) from a .dsa file or image"
    )
    p.add_argument("--input", required=True, help="a .dsa file or a PNM image")
    p.add_argument("--output", required=True, help="count map PGM path")
    p.add_argument("--overlay", help="optional overlay PPM path")
    p.add_argument("--image", help="source image for overlay when input is .dsa")
    add_scan_flags(p, required=False)  # scan flags only apply to image inputs
    p.set_defaults(func=cmd_freqmap)

    p = sub.add_parser("ablate", help="coverage sweep over a corpus directory")
    p.add_argument("--input", required=True, help="directory of PNM images")
    p.add_argument("--output", required=True, help="CSV path (figure saved as .png)")
    p.add_argument("--variant", type=_variant_list, required=True,
                   help="comma-separated variants, e.g. rp,rt,sp,st")
    p.add_argument("--patch-size", type=int, required=True)
    p.add_argument("--n-list", type=_int_list, required=True,
                   help="comma-separated patch counts")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_ablate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PnmDecodeError, seqfile.SequenceFormatError) as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
