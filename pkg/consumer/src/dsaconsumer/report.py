"""Adaptivity reports: how attention moves between two scans of one image."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import ToyTransformer
from .pnm import content_id, read_pnm, write_pgm
from .rollout import pixel_attention_map
from .seqreader import ParsedSequence, read_sequence_file


class ImageMismatchError(ValueError):
    """The two sequences (or the reference image) disagree on the image."""


@dataclass
class AdaptivityResult:
    distance: float  # L1 between the two normalized pixel-attention maps
    seeds: tuple[int | None, int | None]
    map_paths: tuple[Path, Path]
    report_path: Path


def _check_same_image(a: ParsedSequence, b: ParsedSequence) -> None:
    if a.image_id != b.image_id:
        raise ImageMismatchError(
            f"sequences come from different images: {a.image_id[:12]} vs "
            f"{b.image_id[:12]}"
        )
    if (a.height, a.width, a.channels) != (b.height, b.width, b.channels):
        raise ImageMismatchError("sequences disagree on image geometry")


def adaptivity_report(
    seq_path_a: str | Path,
    seq_path_b: str | Path,
    out_dir: str | Path,
    image_path: str | Path | None = None,
    model_seed: int = 0,
) -> AdaptivityResult:
    """Compare class-token attention rollouts of two scans of one image.

    Both sequences are embedded and run through the same seed-fixed model;
    the rollouts are projected to pixel space and written as PGM maps, and
    the plain-text report records both resolved seeds and the L1 distance.
    An optional reference image is verified against the recorded image id.
    """
    seq_a = read_sequence_file(seq_path_a)
    seq_b = read_sequence_file(seq_path_b)
    _check_same_image(seq_a, seq_b)
    if image_path is not None:
        image = read_pnm(image_path)
        if content_id(image) != seq_a.image_id:
            raise ImageMismatchError(
                f"{image_path} does not match the sequences' image id"
            )

    model = ToyTransformer.for_sequence(seq_a, seed=model_seed)
    maps = []
    for seq in (seq_a, seq_b):
        result = model.forward(model.embed(seq))
        maps.append(pixel_attention_map(result.attention, seq))
    distance = float(np.abs(maps[0] - maps[1]).sum())

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    map_paths = (out_dir / "attention_a.pgm", out_dir / "attention_b.pgm")
    for path, attention in zip(map_paths, maps):
        peak = attention.max()
        write_pgm(path, attention / peak if peak > 0 else attention)

    report_path = out_dir / "report.txt"
    lines = [
        "adaptivity report",
        f"image_id: {seq_a.image_id}",
        f"scan_a: variant={seq_a.variant} policy={seq_a.seed_policy} "
        f"resolved_seed={seq_a.resolved_seed}",
        f"scan_b: variant={seq_b.variant} policy={seq_b.seed_policy} "
        f"resolved_seed={seq_b.resolved_seed}",
        f"num_patches: {seq_a.num_patches} / {seq_b.num_patches}",
        f"pixel_attention_l1_distance: {distance:.6f}",
        f"maps: {map_paths[0].name}, {map_paths[1].name}",
    ]
    report_path.write_text("\n".join(lines) + "\n")
    return AdaptivityResult(
        distance=distance,
        seeds=(seq_a.resolved_seed, seq_b.resolved_seed),
        map_paths=map_paths,
        report_path=report_path,
    )
