"""Just enough PNM support for this consumer: P5 export, P5/P6 import."""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

_WS = b" \t\n\r\x0b\x0c"


def write_pgm(path: str | Path, values: np.ndarray) -> None:
    """Write a [0, 1] float map as binary P5, rounding half-up."""
    h, w = values.shape
    samples = np.floor(np.clip(values, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    Path(path).write_bytes(b"P5\n%d %d\n255\n" % (w, h) + samples.tobytes())


def _tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    out, pos = [], 0
    while len(out) < count:
        while pos < len(data) and data[pos : pos + 1] in _WS:
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and data[pos : pos + 1] not in _WS:
            pos += 1
        if start == pos:
            raise ValueError("truncated PNM header")
        out.append(data[start:pos])
    return out, pos + 1  # single whitespace byte before the body


def read_pnm(path: str | Path) -> np.ndarray:
    """Read binary P5/P6 (maxval 255) into an (H, W, C) uint8 array."""
    data = Path(path).read_bytes()
    (magic, width, height, maxval), body_at = _tokens(data, 4)
    channels = {b"P5": 1, b"P6": 3}.get(magic)
    if channels is None or int(maxval) != 255:
        raise ValueError(f"unsupported PNM ({magic!r}, maxval {maxval!r})")
    h, w = int(height), int(width)
    body = data[body_at : body_at + h * w * channels]
    if len(body) != h * w * channels:
        raise ValueError("truncated PNM body")
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w, channels).copy()


def content_id(image: np.ndarray) -> str:
    """sha256 of the canonical PNM encoding, matching the producer's ids."""
    h, w, c = image.shape
    magic = b"P5" if c == 1 else b"P6"
    canonical = magic + b"\n%d %d\n255\n" % (w, h) + image.tobytes()
    return hashlib.sha256(canonical).hexdigest()
