"""Dynamic patch scanning for transformer input pipelines.

Converts images into fixed-length sequences of P x P patches via four
dynamic scan variants (random patches, random tracing, salient patches,
salient tracing) plus the systematic raster baseline, with deterministic
seeding, coverage analytics, and a bit-exact .dsa sequence container.
"""

from .analysis import (
    AblationRow,
    CoverageStats,
    FrequencyMap,
    ablation_sweep,
    coverage_fraction,
    expected_coverage_rp,
    frequency_map,
    overlay,
    rows_to_csv,
)
from .errors import ConfigError, PnmDecodeError
from .image import (
    GrayImage,
    Image,
    IntegralImage,
    PixelCoord,
    box_mean,
    build_integral,
    crop_patch,
    decode_pnm,
    encode_pnm,
    read_image,
    to_grayscale,
    write_image,
)
from .saliency import PixelRanking, SaliencyConfig, SaliencyMap, compute_saliency, rank_pixels
from .scanner import (
    Patch,
    PatchSequence,
    Provenance,
    ScanConfig,
    ScanVariant,
    SeedContext,
    SeedPolicy,
    default_num_patches,
    derive_scan_seed,
    grid_patch_count,
    position_index,
    scan,
    scan_random_patches,
    scan_random_tracing,
    scan_salient_patches,
    scan_salient_tracing,
    scan_systematic,
    trace_line,
)
from .seqfile import (
    SequenceFormatError,
    read_sequence,
    read_sequence_file,
    write_sequence,
    write_sequence_file,
)

__version__ = "0.1.0"
