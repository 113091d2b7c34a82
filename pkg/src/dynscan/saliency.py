"""Center-surround saliency and the deterministic pixel ranking it induces.

The guidance map is intensity-only center-surround contrast: at each pixel
the absolute difference between the pixel value and the mean of a square
surround window, summed over three dyadic window radii and normalized by the
global maximum.  Box means come from one integral image per input, so the
whole map is O(H*W) per scale with no learned components.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import GrayImage, PixelCoord, box_mean_map, build_integral

# A saliency map is a [0, 1] intensity raster; reuse the gray container.
SaliencyMap = GrayImage


@dataclass(frozen=True)
class SaliencyConfig:
    """Surround radii in pixels, largest-structure last."""

    surround_radii: tuple[int, ...]

    def __post_init__(self):
        if not self.surround_radii:
            raise ValueError("need at least one surround radius")
        if any(r < 1 for r in self.surround_radii):
            raise ValueError("surround radii must be >= 1")

    @classmethod
    def for_shape(cls, height: int, width: int) -> "SaliencyConfig":
        """Default dyadic radii: min(H,W)/8, /4, /2, floored to >= 1."""
        base = min(height, width)
        radii: list[int] = []
        for div in (8, 4, 2):
            r = max(base // div, 1)
            if r not in radii:
                radii.append(r)
        return cls(tuple(radii))


@dataclass
class PixelRanking:
    """All pixel coordinates ordered by non-increasing saliency.

    Ties break by ascending row-major index, so the ranking is a pure
    function of the map.  `order` holds flat row-major indices.
    """

    height: int
    width: int
    order: np.ndarray  # int64, shape (height * width,)

    def __len__(self) -> int:
        return self.order.size

    def coord(self, rank: int) -> PixelCoord:
        flat = int(self.order[rank])
        return PixelCoord(flat // self.width, flat % self.width)


def compute_saliency(gray: GrayImage, config: SaliencyConfig | None = None) -> SaliencyMap:
    """Multi-scale center-surround contrast map, normalized to [0, 1].

    raw(p) = sum over radii of |I(p) - surround_mean(p, r)|; the absolute
    value folds the on-center and off-center responses together (exactly one
    is nonzero per pixel per scale).  A uniform image yields the zero map;
    otherwise the maximum is exactly 1 after normalization.
    """
    if gray.height < 2 or gray.width < 2:
        raise ValueError("saliency needs an image of at least 2x2")
    if config is None:
        config = SaliencyConfig.for_shape(gray.height, gray.width)
    integral = build_integral(gray)
    raw = np.zeros((gray.height, gray.width), dtype=np.float64)
    for radius in config.surround_radii:
        raw += np.abs(gray.values - box_mean_map(integral, radius))
    # Cumulative sums leave ~H*W*eps of rounding noise in the box means; a
    # peak below that scale is a contrast-free (uniform) image, not signal.
    tol = 4.0 * gray.height * gray.width * np.finfo(np.float64).eps
    peak = raw.max()
    if peak <= tol:
        values = np.zeros_like(raw)
    else:
        values = raw / peak
    return SaliencyMap(gray.height, gray.width, values)


def rank_pixels(saliency: SaliencyMap) -> PixelRanking:
    """Sort all pixel coordinates by descending saliency, row-major ties.

    Stable sort on the negated values: equal saliencies keep ascending
    flat-index order, making the ranking fully deterministic.
    """
    flat = saliency.values.ravel()
    order = np.argsort(-flat, kind="stable").astype(np.int64)
    return PixelRanking(saliency.height, saliency.width, order)
