"""The .dsa sequence container: bit-exact patch-sequence serialization.

Layout (format_version 1, all integers little-endian):

    bytes 0..3    magic "DSA1"
    bytes 4..7    header_length, uint32
    next          UTF-8 JSON header, keys sorted, no whitespace
    then          num_patches records of
                      center_row   int32
                      center_col   int32
                      position     uint32
                      pixels       patch_size * patch_size * channels bytes
                                   (row-major, channel-interleaved)

Header keys: image_id, image_height, image_width, channels, patch_size,
num_patches, variant, seed_policy, resolved_seed, format_version.
seed_policy and resolved_seed are null for the seed-free variants.  Writing
is canonical, so equal sequences serialize to equal bytes; reading either
returns a fully validated sequence or raises without partial results.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .image import PixelCoord
from .scanner import (
    Patch,
    PatchSequence,
    Provenance,
    ScanConfig,
    ScanVariant,
    SeedPolicy,
    position_index,
)

MAGIC = b"DSA1"
FORMAT_VERSION = 1

_RECORD_PREFIX = struct.Struct("<iiI")

_HEADER_KEYS = {
    "image_id": str,
    "image_height": int,
    "image_width": int,
    "channels": int,
    "patch_size": int,
    "num_patches": int,
    "variant": str,
    "seed_policy": (str, type(None)),
    "resolved_seed": (int, type(None)),
    "format_version": int,
}


class SequenceFormatError(ValueError):
    """Base for all .dsa read failures."""


class BadMagicError(SequenceFormatError):
    pass


class TruncatedSequenceError(SequenceFormatError):
    pass


class TrailingDataError(SequenceFormatError):
    pass


class HeaderSchemaError(SequenceFormatError):
    pass


class PositionMismatchError(SequenceFormatError):
    pass


def write_sequence(sequence: PatchSequence) -> bytes:
    """Serialize to canonical .dsa bytes (deterministic for equal input)."""
    prov = sequence.provenance
    header = {
        "image_id": prov.image_id,
        "image_height": prov.image_height,
        "image_width": prov.image_width,
        "channels": prov.channels,
        "patch_size": prov.config.patch_size,
        "num_patches": prov.config.num_patches,
        "variant": prov.config.variant.value,
        "seed_policy": prov.seed_policy.value if prov.seed_policy else None,
        "resolved_seed": prov.resolved_seed,
        "format_version": FORMAT_VERSION,
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    parts = [MAGIC, struct.pack("<I", len(header_bytes)), header_bytes]
    for patch in sequence.patches:
        parts.append(
            _RECORD_PREFIX.pack(patch.center.row, patch.center.col, patch.position)
        )
        parts.append(patch.pixels.tobytes())
    return b"".join(parts)


def _parse_header(data: bytes) -> tuple[dict, int]:
    if len(data) < 8:
        raise TruncatedSequenceError("file shorter than the fixed prefix")
    if data[:4] != MAGIC:
        raise BadMagicError(f"bad magic {data[:4]!r}, want {MAGIC!r}")
    (header_len,) = struct.unpack_from("<I", data, 4)
    if len(data) < 8 + header_len:
        raise TruncatedSequenceError("declared header extends past end of file")
    try:
        header = json.loads(data[8 : 8 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise HeaderSchemaError(f"header is not valid JSON: {exc}") from None
    if not isinstance(header, dict):
        raise HeaderSchemaError("header must be a JSON object")
    missing = set(_HEADER_KEYS) - set(header)
    if missing:
        raise HeaderSchemaError(f"header missing keys: {sorted(missing)}")
    for key, types in _HEADER_KEYS.items():
        if not isinstance(header[key], types):
            raise HeaderSchemaError(f"header key {key!r} has wrong type")
    if header["format_version"] != FORMAT_VERSION:
        raise HeaderSchemaError(
            f"unsupported format_version {header['format_version']}"
        )
    return header, 8 + header_len


def read_sequence(data: bytes) -> PatchSequence:
    """Parse and validate .dsa bytes into a PatchSequence.

    Validation covers magic, header schema, record completeness, absence of
    trailing bytes, and position/center consistency; each failure mode is a
    distinct SequenceFormatError subclass.
    """
    header, offset = _parse_header(data)
    try:
        variant = ScanVariant(header["variant"])
    except ValueError:
        raise HeaderSchemaError(f"unknown variant {header['variant']!r}") from None
    policy = None
    if header["seed_policy"] is not None:
        try:
            policy = SeedPolicy(header["seed_policy"])
        except ValueError:
            raise HeaderSchemaError(
                f"unknown seed_policy {header['seed_policy']!r}"
            ) from None
    config = ScanConfig(variant, header["patch_size"], header["num_patches"])
    p, c = header["patch_size"], header["channels"]
    height, width = header["image_height"], header["image_width"]
    if c not in (1, 3) or height < 1 or width < 1:
        raise HeaderSchemaError("invalid image geometry in header")
    pixel_bytes = p * p * c
    record_size = _RECORD_PREFIX.size + pixel_bytes
    patches: list[Patch] = []
    for i in range(header["num_patches"]):
        record = data[offset : offset + record_size]
        if len(record) < record_size:
            raise TruncatedSequenceError(
                f"record {i} truncated: need {record_size} bytes, "
                f"got {len(record)}"
            )
        row, col, position = _RECORD_PREFIX.unpack_from(record)
        center = PixelCoord(row, col)
        if not (0 <= row < height and 0 <= col < width):
            raise PositionMismatchError(f"record {i} center {center} out of bounds")
        if position != position_index(center, width):
            raise PositionMismatchError(
                f"record {i}: position {position} != "
                f"{position_index(center, width)} implied by center {center}"
            )
        pixels = (
            np.frombuffer(record, dtype=np.uint8, offset=_RECORD_PREFIX.size)
            .reshape(p, p, c)
            .copy()
        )
        patches.append(Patch(center, pixels, position))
        offset += record_size
    if offset != len(data):
        raise TrailingDataError(f"{len(data) - offset} unexpected trailing bytes")
    prov = Provenance(
        image_id=header["image_id"],
        image_height=height,
        image_width=width,
        channels=c,
        config=config,
        seed_policy=policy,
        resolved_seed=header["resolved_seed"],
    )
    return PatchSequence(patches, prov)


def write_sequence_file(path: str | Path, sequence: PatchSequence) -> None:
    Path(path).write_bytes(write_sequence(sequence))


def read_sequence_file(path: str | Path) -> PatchSequence:
    return read_sequence(Path(path).read_bytes())
