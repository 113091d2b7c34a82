"""Patch scanners: four dynamic variants plus the systematic raster baseline.

Every scan turns an image into an ordered sequence of exactly N patches,
each a P x P x C pixel block identified by its (requested) center pixel and
a row-major position index.  The random variants consume a SeedContext and
are bit-reproducible from its resolved seed; the salient variants are pure
functions of (image, saliency map, config) with no randomness at all.

Randomness contract (also documented in the README format section):

* Stream generator: xoshiro256** (Blackman & Vigna), state seeded from the
  resolved 64-bit seed via the splitmix64 sequence, per the generator
  authors' recommendation.
* Seed mixing: the splitmix64 finalizer over (global seed, image id bytes
  in 8-byte little-endian chunks, id length, and - for the stochastic
  policy only - the scan index).
* Bounded draws: 64-bit rejection sampling, so uniform integers carry no
  modulo bias and streams are byte-identical on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError
from .image import Image, PixelCoord, crop_patch, to_grayscale
from .saliency import PixelRanking, SaliencyMap, compute_saliency, rank_pixels

_M64 = (1 << 64) - 1


class ScanVariant(str, Enum):
    RANDOM_PATCHES = "rp"
    RANDOM_TRACING = "rt"
    SALIENT_PATCHES = "sp"
    SALIENT_TRACING = "st"
    SYSTEMATIC = "systematic"


RANDOM_VARIANTS = (ScanVariant.RANDOM_PATCHES, ScanVariant.RANDOM_TRACING)
SALIENT_VARIANTS = (ScanVariant.SALIENT_PATCHES, ScanVariant.SALIENT_TRACING)
DYNAMIC_VARIANTS = RANDOM_VARIANTS + SALIENT_VARIANTS


class SeedPolicy(str, Enum):
    """Whether repeated scans of one image draw fresh randomness.

    STOCHASTIC mixes the scan index into the seed, so every scan differs;
    FIXED_PER_IMAGE ignores the index, so one image always scans the same
    way while different images still differ.
    """

    STOCHASTIC = "stochastic"
    FIXED_PER_IMAGE = "fixed-per-image"


@dataclass(frozen=True)
class ScanConfig:
    variant: ScanVariant
    patch_size: int
    num_patches: int

    def __post_init__(self):
        if self.patch_size < 1 or self.patch_size % 2 == 0:
            raise ConfigError(
                f"patch size must be odd and positive, got {self.patch_size}"
            )
        if self.num_patches < 1:
            raise ConfigError(f"num patches must be >= 1, got {self.num_patches}")


@dataclass(frozen=True)
class Provenance:
    """Everything needed to regenerate or validate a sequence."""

    image_id: str
    image_height: int
    image_width: int
    channels: int
    config: ScanConfig
    seed_policy: SeedPolicy | None
    resolved_seed: int | None


@dataclass
class Patch:
    center: PixelCoord  # requested center, recorded pre-clamp
    pixels: np.ndarray  # uint8, shape (P, P, C)
    position: int

    def __eq__(self, other):
        if not isinstance(other, Patch):
            return NotImplemented
        return (
            self.center == other.center
            and self.position == other.position
            and np.array_equal(self.pixels, other.pixels)
        )


@dataclass
class PatchSequence:
    patches: list[Patch]
    provenance: Provenance

    def __post_init__(self):
        if len(self.patches) != self.provenance.config.num_patches:
            raise ValueError(
                f"sequence length {len(self.patches)} != configured "
                f"{self.provenance.config.num_patches}"
            )

    def __len__(self) -> int:
        return len(self.patches)

    def centers(self) -> list[PixelCoord]:
        return [p.center for p in self.patches]


# ---------------------------------------------------------------------------
# Seeding and the deterministic generator
# ---------------------------------------------------------------------------


def _mix64(x: int) -> int:
    """splitmix64 finalizer; a documented, well-dispersing 64-bit mix."""
    x = (x + 0x9E3779B97F4A7C15) & _M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


class SeedContext:
    """Resolved seed plus a running xoshiro256** stream.

    Identical resolved seeds produce identical streams; scans own their
    context exclusively, so concurrent scans never share generator state.
    """

    __slots__ = ("seed", "policy", "_s")

    def __init__(self, resolved_seed: int, policy: SeedPolicy | None = None):
        self.seed = resolved_seed & _M64
        self.policy = policy
        # Seed the four state words from the splitmix64 sequence.
        state = self.seed
        s = []
        for _ in range(4):
            state = (state + 0x9E3779B97F4A7C15) & _M64
            z = state
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
            s.append(z ^ (z >> 31))
        if not any(s):  # all-zero state is the one invalid xoshiro state
            s[0] = 1
        self._s = s

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        x = (s1 * 5) & _M64
        result = (((x << 7) | (x >> 57)) & _M64) * 9 & _M64
        t = (s1 << 17) & _M64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & _M64
        self._s = [s0, s1, s2, s3]
        return result

    def randbelow(self, bound: int) -> int:
        """Uniform integer in [0, bound) by rejection (no modulo bias)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = ((1 << 64) // bound) * bound
        while True:
            draw = self.next_u64()
            if draw < limit:
                return draw % bound

    def randbelow_many(self, bound: int, count: int) -> list[int]:
        """Batch of `count` unbiased draws; same stream as repeated randbelow."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = ((1 << 64) // bound) * bound
        s0, s1, s2, s3 = self._s
        out = []
        append = out.append
        while len(out) < count:
            x = (s1 * 5) & _M64
            draw = (((x << 7) | (x >> 57)) & _M64) * 9 & _M64
            t = (s1 << 17) & _M64
            s2 ^= s0
            s3 ^= s1
            s1 ^= s2
            s0 ^= s3
            s2 ^= t
            s3 = ((s3 << 45) | (s3 >> 19)) & _M64
            if draw < limit:
                append(draw % bound)
        self._s = [s0, s1, s2, s3]
        return out


def derive_scan_seed(
    global_seed: int,
    image_id: str | bytes,
    scan_index: int,
    policy: SeedPolicy,
) -> SeedContext:
    """Resolve the 64-bit scan seed from (global seed, image id, scan index).

    The stochastic policy mixes all three, so every scan index yields a new
    stream; the fixed-per-image policy mixes only the global seed and image
    id, so every scan of one image replays the same stream while scans of
    different images still differ.
    """
    if isinstance(image_id, str):
        image_id = image_id.encode("utf-8")
    h = _mix64(global_seed & _M64)
    for off in range(0, len(image_id), 8):
        chunk = int.from_bytes(image_id[off : off + 8], "little")
        h = _mix64(h ^ chunk)
    h = _mix64(h ^ len(image_id))
    if policy is SeedPolicy.STOCHASTIC:
        h = _mix64(h ^ (scan_index & _M64))
    return SeedContext(h, policy)


# ---------------------------------------------------------------------------
# Positional encoding and patch-count defaults
# ---------------------------------------------------------------------------


def position_index(center: PixelCoord, width: int) -> int:
    """Row-major center index shifted by one: row*width + col + 1.

    Index 0 is reserved for the class token of downstream consumers, so
    scan positions always lie in [1, H*W].
    """
    return center.row * width + center.col + 1


def default_num_patches(image_size: int, patch_size: int) -> int:
    """Patch count of the systematic baseline: ceil(S/P) squared."""
    if not 1 <= patch_size <= image_size:
        raise ConfigError(
            f"need image size >= patch size >= 1, got {image_size}, {patch_size}"
        )
    return (-(-image_size // patch_size)) ** 2


def grid_patch_count(height: int, width: int, patch_size: int) -> int:
    """Systematic window count for possibly non-square images."""
    return (-(-height // patch_size)) * (-(-width // patch_size))


# ---------------------------------------------------------------------------
# Line tracing
# ---------------------------------------------------------------------------


def trace_line(a: PixelCoord, b: PixelCoord) -> list[PixelCoord]:
    """Bresenham line from a to b, inclusive of both endpoints, 8-connected.

    Frozen variant for reproducibility: drive along the major axis with the
    error term initialized to floor(dx/2); endpoints are swapped so the
    major coordinate increases, and the result is reversed afterwards, so
    tracing a->b yields exactly the reverse of b->a.
    """
    x0, y0 = a
    x1, y1 = b
    steep = abs(y1 - y0) > abs(x1 - x0)
    if steep:
        x0, y0 = y0, x0
        x1, y1 = y1, x1
    swapped = x0 > x1
    if swapped:
        x0, x1 = x1, x0
        y0, y1 = y1, y0
    dx = x1 - x0
    dy = abs(y1 - y0)
    err = dx // 2
    ystep = 1 if y0 < y1 else -1
    y = y0
    points: list[PixelCoord] = []
    for x in range(x0, x1 + 1):
        points.append(PixelCoord(y, x) if steep else PixelCoord(x, y))
        err -= dy
        if err < 0:
            y += ystep
            err += dx
    if swapped:
        points.reverse()
    return points


# ---------------------------------------------------------------------------
# Center streams (shared by full scans and the coverage sweep)
# ---------------------------------------------------------------------------


def random_patch_centers(
    height: int, width: int, count: int, ctx: SeedContext
) -> list[PixelCoord]:
    """count i.i.d. uniform centers over the full pixel grid, draw order."""
    draws = ctx.randbelow_many(height * width, count)
    return [PixelCoord(d // width, d % width) for d in draws]


def random_tracing_centers(
    height: int, width: int, count: int, ctx: SeedContext
) -> list[PixelCoord]:
    """Centers along random rays, endpoint-inclusive, truncated to count."""
    cells = height * width
    centers: list[PixelCoord] = []
    while len(centers) < count:
        a = ctx.randbelow(cells)
        b = ctx.randbelow(cells)
        centers.extend(
            trace_line(
                PixelCoord(a // width, a % width),
                PixelCoord(b // width, b % width),
            )
        )
    return centers[:count]


def salient_patch_centers(ranking: PixelRanking, count: int) -> list[PixelCoord]:
    """The count most salient pixels in rank order (cycling past the end)."""
    total = len(ranking)
    return [ranking.coord(i % total) for i in range(count)]


def salient_tracing_centers(ranking: PixelRanking, count: int) -> list[PixelCoord]:
    """Rays between saliency-rank neighbors, endpoint-inclusive.

    Ray k runs from rank k to rank k+1, and each ray re-emits its start, so
    shared endpoints appear twice in the sequence.  If the ranking runs out
    before count patches accumulate, pairing restarts from the top.
    """
    total = len(ranking)
    if total == 1:
        return [ranking.coord(0)] * count
    centers: list[PixelCoord] = []
    rank = 0
    while len(centers) < count:
        if rank + 1 >= total:
            rank = 0
        centers.extend(trace_line(ranking.coord(rank), ranking.coord(rank + 1)))
        rank += 1
    return centers[:count]


def systematic_centers(height: int, width: int, patch_size: int) -> list[PixelCoord]:
    """Window centers of the raster grid, last row/column clamped inward."""
    half = patch_size // 2
    row_starts = [
        min(i * patch_size, height - patch_size)
        for i in range(-(-height // patch_size))
    ]
    col_starts = [
        min(j * patch_size, width - patch_size)
        for j in range(-(-width // patch_size))
    ]
    return [
        PixelCoord(r + half, c + half) for r in row_starts for c in col_starts
    ]


# ---------------------------------------------------------------------------
# Full scans
# ---------------------------------------------------------------------------


def validate_config(config: ScanConfig, height: int, width: int) -> None:
    if config.patch_size > min(height, width):
        raise ConfigError(
            f"patch size {config.patch_size} exceeds image {height}x{width}"
        )
    if config.variant is ScanVariant.SYSTEMATIC:
        expected = grid_patch_count(height, width, config.patch_size)
        if config.num_patches != expected:
            raise ConfigError(
                f"systematic scan of {height}x{width} with P="
                f"{config.patch_size} has exactly {expected} patches, "
                f"got N={config.num_patches}"
            )


def _assemble(
    image: Image,
    image_id: str,
    config: ScanConfig,
    centers: list[PixelCoord],
    ctx: SeedContext | None,
) -> PatchSequence:
    patches = [
        Patch(
            center=c,
            pixels=crop_patch(image, c, config.patch_size),
            position=position_index(c, image.width),
        )
        for c in centers
    ]
    prov = Provenance(
        image_id=image_id,
        image_height=image.height,
        image_width=image.width,
        channels=image.channels,
        config=config,
        seed_policy=ctx.policy if ctx is not None else None,
        resolved_seed=ctx.seed if ctx is not None else None,
    )
    return PatchSequence(patches, prov)


def scan_random_patches(
    image: Image, config: ScanConfig, ctx: SeedContext, image_id: str = ""
) -> PatchSequence:
    if config.variant is not ScanVariant.RANDOM_PATCHES:
        raise ConfigError(f"wrong variant {config.variant} for random patches")
    validate_config(config, image.height, image.width)
    centers = random_patch_centers(image.height, image.width, config.num_patches, ctx)
    return _assemble(image, image_id, config, centers, ctx)


def scan_random_tracing(
    image: Image, config: ScanConfig, ctx: SeedContext, image_id: str = ""
) -> PatchSequence:
    if config.variant is not ScanVariant.RANDOM_TRACING:
        raise ConfigError(f"wrong variant {config.variant} for random tracing")
    validate_config(config, image.height, image.width)
    centers = random_tracing_centers(
        image.height, image.width, config.num_patches, ctx
    )
    return _assemble(image, image_id, config, centers, ctx)


def _check_map(image: Image, saliency: SaliencyMap) -> None:
    if (saliency.height, saliency.width) != (image.height, image.width):
        raise ConfigError(
            f"saliency map {saliency.height}x{saliency.width} does not match "
            f"image {image.height}x{image.width}"
        )


def scan_salient_patches(
    image: Image,
    saliency: SaliencyMap,
    config: ScanConfig,
    image_id: str = "",
) -> PatchSequence:
    if config.variant is not ScanVariant.SALIENT_PATCHES:
        raise ConfigError(f"wrong variant {config.variant} for salient patches")
    validate_config(config, image.height, image.width)
    _check_map(image, saliency)
    centers = salient_patch_centers(rank_pixels(saliency), config.num_patches)
    return _assemble(image, image_id, config, centers, None)


def scan_salient_tracing(
    image: Image,
    saliency: SaliencyMap,
    config: ScanConfig,
    image_id: str = "",
) -> PatchSequence:
    if config.variant is not ScanVariant.SALIENT_TRACING:
        raise ConfigError(f"wrong variant {config.variant} for salient tracing")
    validate_config(config, image.height, image.width)
    _check_map(image, saliency)
    centers = salient_tracing_centers(rank_pixels(saliency), config.num_patches)
    return _assemble(image, image_id, config, centers, None)


def scan_systematic(
    image: Image, config: ScanConfig, image_id: str = ""
) -> PatchSequence:
    if config.variant is not ScanVariant.SYSTEMATIC:
        raise ConfigError(f"wrong variant {config.variant} for systematic scan")
    validate_config(config, image.height, image.width)
    centers = systematic_centers(image.height, image.width, config.patch_size)
    return _assemble(image, image_id, config, centers, None)


def scan(
    image: Image,
    image_id: str,
    config: ScanConfig,
    ctx: SeedContext | None = None,
    saliency: SaliencyMap | None = None,
) -> PatchSequence:
    """Dispatch to the configured variant.

    Random variants require a SeedContext; salient variants compute the
    guidance map from the image when none is supplied.
    """
    v = config.variant
    if v in RANDOM_VARIANTS:
        if ctx is None:
            raise ValueError(f"variant {v.value} requires a seed context")
        if v is ScanVariant.RANDOM_PATCHES:
            return scan_random_patches(image, config, ctx, image_id)
        return scan_random_tracing(image, config, ctx, image_id)
    if v in SALIENT_VARIANTS:
        if saliency is None:
            saliency = compute_saliency(to_grayscale(image))
        if v is ScanVariant.SALIENT_PATCHES:
            return scan_salient_patches(image, saliency, config, image_id)
        return scan_salient_tracing(image, saliency, config, image_id)
    return scan_systematic(image, config, image_id)
