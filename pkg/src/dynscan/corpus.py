"""Deterministic synthesizer for the bundled demo/test corpus.

Ten 32x32 RGB scenes standing in for small natural photographs: gradient
and coarse-texture backgrounds, sensor-style noise, and objects (soft
blobs, horizons, dense texture) whose size and contrast vary from image to
image.  The variety is deliberate: it makes saliency-guided coverage spread
widely across images while random-scan coverage stays content-independent.

Regenerate with `python -m dynscan.corpus <directory>`; the committed files
under data/ are the canonical copies.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from .image import Image, write_image

SIZE = 32
CORPUS_SEED = 20240707
CORPUS_COUNT = 10


def _blob(rr, cc, r0, c0, radius):
    d2 = (rr - r0) ** 2 + (cc - c0) ** 2
    return np.exp(-d2 / (2 * (radius / 1.7) ** 2))


def _coarse_noise(rng, cells: int, amp: float) -> np.ndarray:
    """Blocky low-frequency texture from an upsampled coarse grid."""
    coarse = rng.normal(0.0, 1.0, size=(cells, cells))
    idx = (np.arange(SIZE) * cells) // SIZE
    return amp * coarse[np.ix_(idx, idx)]


def _paint(img, mask, color):
    for ch in range(3):
        img[:, :, ch] = img[:, :, ch] * (1 - mask) + color[ch] * mask


def make_scene(index: int, rng: np.random.Generator) -> Image:
    """One synthetic scene; `index % 5` selects the composition."""
    rr, cc = np.mgrid[0:SIZE, 0:SIZE].astype(float)
    kind = index % 5
    hue = rng.uniform(0.2, 0.9, size=3)
    img = np.zeros((SIZE, SIZE, 3))
    grad = (rr / SIZE) * rng.uniform(0.2, 0.5) + (cc / SIZE) * rng.uniform(0.0, 0.3)
    backdrop = _coarse_noise(rng, 8, 0.08)
    for ch in range(3):
        img[:, :, ch] = 0.25 + 0.5 * hue[ch] * (0.4 + grad) + backdrop

    if kind == 0:  # small bright object
        r0, c0 = rng.integers(8, 24, size=2)
        _paint(img, _blob(rr, cc, r0, c0, rng.uniform(2.5, 4)), rng.uniform(0.7, 1.0, 3))
    elif kind == 1:  # object filling much of the frame
        r0, c0 = rng.integers(10, 22, size=2)
        _paint(img, _blob(rr, cc, r0, c0, rng.uniform(9, 13)), rng.uniform(0.55, 0.95, 3))
    elif kind == 2:  # two medium objects
        for _ in range(2):
            r0, c0 = rng.integers(6, 26, size=2)
            _paint(img, _blob(rr, cc, r0, c0, rng.uniform(4, 6)), rng.uniform(0.5, 1.0, 3))
    elif kind == 3:  # dense texture, no single object
        img = np.clip(img + rng.normal(0, 0.22, size=img.shape), 0, 1)
    else:  # horizon scene with a small object near the line
        horizon = int(rng.integers(12, 22))
        img[horizon:, :, :] *= rng.uniform(0.3, 0.55)
        r0 = int(rng.integers(max(4, horizon - 6), min(28, horizon + 6)))
        c0 = int(rng.integers(6, 26))
        _paint(img, _blob(rr, cc, r0, c0, rng.uniform(2.5, 4.5)), rng.uniform(0.75, 1.0, 3))

    img = img + rng.normal(0, 0.08, size=img.shape)  # sensor-style noise
    samples = np.clip(np.floor(img * 255 + 0.5), 0, 255).astype(np.uint8)
    return Image(SIZE, SIZE, 3, samples)


def make_corpus(count: int = CORPUS_COUNT, seed: int = CORPUS_SEED) -> list[Image]:
    rng = np.random.default_rng(seed)
    return [make_scene(i, rng) for i in range(count)]


def make_sample(seed: int = CORPUS_SEED) -> Image:
    """One extra scene, kept out of the corpus, for single-image demos."""
    rng = np.random.default_rng(seed)
    scenes = [make_scene(i, rng) for i in range(CORPUS_COUNT + 1)]
    return scenes[-1]


def write_corpus(
    directory: str | Path, count: int = CORPUS_COUNT, seed: int = CORPUS_SEED
) -> list[Path]:
    """Write img00.ppm .. imgNN.ppm into `directory`."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    paths = []
    for i in range(count):
        path = directory / f"img{i:02d}.ppm"
        write_image(path, make_scene(i, rng))
        paths.append(path)
    return paths


if __name__ == "__main__":
    target = Path(sys.argv[1] if len(sys.argv) > 1 else "data")
    for p in write_corpus(target / "corpus"):
        print(p)
    sample_path = target / "sample.ppm"
    write_image(sample_path, make_sample())
    print(sample_path)
