"""Coverage analytics: frequency maps, distinct-pixel coverage, ablations.

A frequency map counts, per pixel, how many patch windows of a sequence
covered it; coverage is the fraction of pixels with a nonzero count.  The
analytic `expected_coverage_rp` gives the exact expectation of coverage for
uniform random patch centers with clamped windows and serves as the oracle
for the random-patches scanner and the coverage curves.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError
from .image import GrayImage, Image, PixelCoord, round_half_up, to_grayscale
from .saliency import compute_saliency, rank_pixels
from .scanner import (
    PatchSequence,
    ScanVariant,
    SeedPolicy,
    derive_scan_seed,
    grid_patch_count,
    random_tracing_centers,
    salient_patch_centers,
    salient_tracing_centers,
    systematic_centers,
)


@dataclass
class FrequencyMap:
    height: int
    width: int
    counts: np.ndarray  # int64, shape (height, width)


@dataclass(frozen=True)
class CoverageStats:
    covered_pixels: int
    total_pixels: int

    @property
    def fraction(self) -> float:
        return self.covered_pixels / self.total_pixels


@dataclass(frozen=True)
class AblationRow:
    variant: ScanVariant
    patch_size: int
    num_patches: int
    trials: int
    mean_coverage: float
    std_coverage: float


CSV_HEADER = "variant,patch_size,num_patches,trials,mean_coverage,std_coverage"


def _window_counts(
    rows: np.ndarray, cols: np.ndarray, height: int, width: int, patch_size: int
) -> np.ndarray:
    """Vectorized per-pixel visit counts; clamping matches window_origin."""
    half = patch_size // 2
    r0 = np.clip(rows - half, 0, height - patch_size)
    c0 = np.clip(cols - half, 0, width - patch_size)
    offs = np.arange(patch_size)
    pix = (r0[:, None] + offs)[:, :, None] * width + (c0[:, None] + offs)[:, None, :]
    counts = np.bincount(pix.ravel(), minlength=height * width)
    return counts.reshape(height, width).astype(np.int64)


def frequency_from_centers(
    centers: Iterable[PixelCoord], height: int, width: int, patch_size: int
) -> FrequencyMap:
    """Per-pixel count of covering windows for the given patch centers."""
    arr = np.asarray(list(centers), dtype=np.int64).reshape(-1, 2)
    counts = _window_counts(arr[:, 0], arr[:, 1], height, width, patch_size)
    return FrequencyMap(height, width, counts)


def frequency_map(sequence: PatchSequence) -> FrequencyMap:
    """Frequency map of a scanned sequence over its source image dims.

    Windows are always exactly P x P (clamping shifts, never shrinks), so
    the counts sum to N * P**2 for every variant.
    """
    prov = sequence.provenance
    return frequency_from_centers(
        sequence.centers(),
        prov.image_height,
        prov.image_width,
        prov.config.patch_size,
    )


def coverage_fraction(freq: FrequencyMap) -> CoverageStats:
    covered = int(np.count_nonzero(freq.counts))
    return CoverageStats(covered, freq.height * freq.width)


def freq_to_gray(freq: FrequencyMap) -> GrayImage:
    """Counts normalized by the maximum count, for PGM export."""
    cap = max(int(freq.counts.max()), 1)
    return GrayImage(freq.height, freq.width, freq.counts / cap)


def overlay(freq: FrequencyMap, image: Image) -> Image:
    """50/50 blend of the image with the max-normalized frequency map.

    The normalized count (as a 0..255 gray level) is blended into every
    channel, then rounded half-up; dimensions must match.
    """
    if (freq.height, freq.width) != (image.height, image.width):
        raise ValueError(
            f"frequency map {freq.height}x{freq.width} does not match "
            f"image {image.height}x{image.width}"
        )
    cap = max(int(freq.counts.max()), 1)
    gray = 255.0 * np.minimum(freq.counts, cap) / cap
    blended = 0.5 * image.samples.astype(np.float64) + 0.5 * gray[:, :, np.newaxis]
    return Image(image.height, image.width, image.channels, round_half_up(blended))


# ---------------------------------------------------------------------------
# Analytic coverage oracle for random patches
# ---------------------------------------------------------------------------


def _axis_cover_counts(dim: int, patch_size: int) -> np.ndarray:
    """counts[i] = number of centers (along one axis) whose clamped window
    covers coordinate i."""
    counts = np.zeros(dim, dtype=np.int64)
    half = patch_size // 2
    for r in range(dim):
        r0 = min(max(r - half, 0), dim - patch_size)
        counts[r0 : r0 + patch_size] += 1
    return counts


def expected_coverage_rp(height: int, width: int, patch_size: int, n: int) -> float:
    """Exact expected coverage fraction for n uniform clamped-window patches.

    For pixel q let c_q be the number of the H*W possible centers whose
    window covers q; each of the n independent draws misses q with
    probability 1 - c_q/(H*W), so
        E[coverage] = mean over q of 1 - (1 - c_q/(H*W))**n.
    """
    if patch_size % 2 == 0 or patch_size < 1:
        raise ConfigError(f"patch size must be odd and positive, got {patch_size}")
    if patch_size > min(height, width):
        raise ConfigError(
            f"patch size {patch_size} exceeds image {height}x{width}"
        )
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return 0.0
    cover = np.outer(
        _axis_cover_counts(height, patch_size),
        _axis_cover_counts(width, patch_size),
    )
    miss = 1.0 - cover / float(height * width)
    return float(np.mean(1.0 - miss**n))


# ---------------------------------------------------------------------------
# Ablation sweep
# ---------------------------------------------------------------------------


def _cell_seed_ctx(global_seed, image_id, variant, patch_size, n, trial):
    """Independent stream per (image, variant, P, N, trial) sweep cell."""
    cell_id = f"{image_id}/{variant.value}/P{patch_size}/N{n}"
    return derive_scan_seed(global_seed, cell_id, trial, SeedPolicy.STOCHASTIC)


def _cell_coverages(
    corpus: Sequence[tuple[str, Image]],
    variant: ScanVariant,
    patch_size: int,
    n: int,
    trials: int,
    global_seed: int,
) -> list[float]:
    """Coverage values for one sweep cell, pooled over images x trials.

    Salient and systematic scans carry no randomness, so each image is
    scanned once and that value stands for all of its trials; the pooled
    mean and population std are identical to running every trial.
    """
    values: list[float] = []
    for image_id, image in corpus:
        h, w = image.height, image.width
        if patch_size > min(h, w):
            raise ConfigError(
                f"patch size {patch_size} exceeds corpus image {h}x{w}"
            )
        if variant is ScanVariant.RANDOM_PATCHES:
            # Consumes the same draw stream as random_patch_centers, but
            # stays in flat indices to keep large sweeps cheap.
            for trial in range(trials):
                ctx = _cell_seed_ctx(
                    global_seed, image_id, variant, patch_size, n, trial
                )
                draws = np.asarray(ctx.randbelow_many(h * w, n), dtype=np.int64)
                counts = _window_counts(draws // w, draws % w, h, w, patch_size)
                values.append(np.count_nonzero(counts) / (h * w))
        elif variant is ScanVariant.RANDOM_TRACING:
            for trial in range(trials):
                ctx = _cell_seed_ctx(
                    global_seed, image_id, variant, patch_size, n, trial
                )
                centers = random_tracing_centers(h, w, n, ctx)
                freq = frequency_from_centers(centers, h, w, patch_size)
                values.append(coverage_fraction(freq).fraction)
        else:
            if variant is ScanVariant.SYSTEMATIC:
                expected = grid_patch_count(h, w, patch_size)
                if n != expected:
                    raise ConfigError(
                        f"systematic cell needs N={expected} for {h}x{w}, "
                        f"P={patch_size}; got N={n}"
                    )
                centers = systematic_centers(h, w, patch_size)
            else:
                ranking = rank_pixels(compute_saliency(to_grayscale(image)))
                if variant is ScanVariant.SALIENT_PATCHES:
                    centers = salient_patch_centers(ranking, n)
                else:
                    centers = salient_tracing_centers(ranking, n)
            freq = frequency_from_centers(centers, h, w, patch_size)
            values.extend([coverage_fraction(freq).fraction] * trials)
    return values


def _run_cell(args) -> AblationRow:
    corpus, variant, patch_size, n, trials, global_seed = args
    values = np.asarray(
        _cell_coverages(corpus, variant, patch_size, n, trials, global_seed)
    )
    return AblationRow(
        variant=variant,
        patch_size=patch_size,
        num_patches=n,
        trials=trials,
        mean_coverage=float(values.mean()),
        std_coverage=float(values.std()),
    )


def ablation_sweep(
    corpus: Sequence[tuple[str, Image]],
    variants: Sequence[ScanVariant],
    patch_sizes: Sequence[int],
    n_values: Sequence[int],
    trials: int,
    global_seed: int,
    jobs: int = 1,
) -> list[AblationRow]:
    """Coverage statistics over the (variant, P, N) grid.

    Each cell pools `trials` stochastic scans of every corpus image; every
    cell derives its own seed from the global seed, so the result does not
    depend on scheduling and reruns are byte-reproducible.  Row order is the
    given variant order, then P, then N.
    """
    if not corpus:
        raise ConfigError("ablation corpus is empty")
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    corpus = list(corpus)
    tasks = [
        (corpus, variant, p, n, trials, global_seed)
        for variant in variants
        for p in patch_sizes
        for n in n_values
    ]
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_cell, tasks))
    return [_run_cell(task) for task in tasks]


def rows_to_csv(rows: Sequence[AblationRow]) -> str:
    """Fixed-point CSV (6 decimals, LF endings) of sweep rows."""
    lines = [CSV_HEADER]
    for row in rows:
        lines.append(
            f"{row.variant.value},{row.patch_size},{row.num_patches},"
            f"{row.trials},{row.mean_coverage:.6f},{row.std_coverage:.6f}"
        )
    return "\n".join(lines) + "\n"
