"""Standalone reader for .dsa patch-sequence files.

Implements the published container layout (format_version 1): the "DSA1"
magic, a little-endian uint32 header length, a JSON header, then
num_patches fixed-size records of (center_row int32, center_col int32,
position uint32, patch_size^2 * channels raw pixel bytes).  This consumer
deliberately re-implements the format from its documentation instead of
importing the producer.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"DSA1"
FORMAT_VERSION = 1
_RECORD_PREFIX = struct.Struct("<iiI")

_REQUIRED_KEYS = (
    "image_id",
    "image_height",
    "image_width",
    "channels",
    "patch_size",
    "num_patches",
    "variant",
    "seed_policy",
    "resolved_seed",
    "format_version",
)


class SequenceReadError(ValueError):
    pass


@dataclass
class ParsedSequence:
    image_id: str
    height: int
    width: int
    channels: int
    patch_size: int
    variant: str
    seed_policy: str | None
    resolved_seed: int | None
    centers: np.ndarray  # int64, shape (N, 2) as (row, col)
    positions: np.ndarray  # int64, shape (N,)
    pixels: np.ndarray  # uint8, shape (N, P, P, C)

    @property
    def num_patches(self) -> int:
        return self.centers.shape[0]


def read_sequence(data: bytes) -> ParsedSequence:
    if len(data) < 8 or data[:4] != MAGIC:
        raise SequenceReadError(f"not a DSA1 sequence (prefix {data[:4]!r})")
    (header_len,) = struct.unpack_from("<I", data, 4)
    try:
        header = json.loads(data[8 : 8 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SequenceReadError(f"bad header: {exc}") from None
    missing = [key for key in _REQUIRED_KEYS if key not in header]
    if missing:
        raise SequenceReadError(f"header missing {missing}")
    if header["format_version"] != FORMAT_VERSION:
        raise SequenceReadError(f"unsupported version {header['format_version']}")
    n = header["num_patches"]
    p = header["patch_size"]
    c = header["channels"]
    width = header["image_width"]
    record_size = _RECORD_PREFIX.size + p * p * c
    body = data[8 + header_len :]
    if len(body) != n * record_size:
        raise SequenceReadError(
            f"body is {len(body)} bytes, want {n} records of {record_size}"
        )
    centers = np.empty((n, 2), dtype=np.int64)
    positions = np.empty(n, dtype=np.int64)
    pixels = np.empty((n, p, p, c), dtype=np.uint8)
    for i in range(n):
        offset = i * record_size
        row, col, pos = _RECORD_PREFIX.unpack_from(body, offset)
        if pos != row * width + col + 1:
            raise SequenceReadError(f"record {i}: position/center mismatch")
        centers[i] = (row, col)
        positions[i] = pos
        start = offset + _RECORD_PREFIX.size
        pixels[i] = np.frombuffer(
            body, dtype=np.uint8, count=p * p * c, offset=start
        ).reshape(p, p, c)
    return ParsedSequence(
        image_id=header["image_id"],
        height=header["image_height"],
        width=header["image_width"],
        channels=c,
        patch_size=p,
        variant=header["variant"],
        seed_policy=header["seed_policy"],
        resolved_seed=header["resolved_seed"],
        centers=centers,
        positions=positions,
        pixels=pixels,
    )


def read_sequence_file(path: str | Path) -> ParsedSequence:
    return read_sequence(Path(path).read_bytes())
