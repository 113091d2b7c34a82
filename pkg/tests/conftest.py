from pathlib import Path

import numpy as np
import pytest

from dynscan.cli import image_id_of
from dynscan.image import Image, decode_pnm

DATA_DIR = Path(__file__).resolve().parents[1] / "data"


def make_image(height, width, channels=3, seed=0):
    rng = np.random.default_rng(seed)
    samples = rng.integers(0, 256, size=(height, width, channels), dtype=np.uint8)
    return Image(height, width, channels, samples)


def uniform_image(height, width, value, channels=3):
    samples = np.full((height, width, channels), value, dtype=np.uint8)
    return Image(height, width, channels, samples)


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR


@pytest.fixture(scope="session")
def corpus():
    """The bundled ten-image corpus as (image_id, Image) pairs."""
    pairs = []
    for path in sorted((DATA_DIR / "corpus").glob("*.ppm")):
        image = decode_pnm(path.read_bytes())
        pairs.append((image_id_of(image), image))
    assert len(pairs) == 10
    return pairs


@pytest.fixture(scope="session")
def sample_image():
    return decode_pnm((DATA_DIR / "sample.ppm").read_bytes())
