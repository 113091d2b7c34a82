"""Attention rollout and its projection back onto image pixels."""

from __future__ import annotations

import numpy as np

from .seqreader import ParsedSequence


def rollout_class_attribution(attention: np.ndarray) -> np.ndarray:
    """Class-token attribution over patch tokens via attention rollout.

    Heads are averaged per layer, the identity is added for the residual
    path, rows are renormalized, and the layer matrices are multiplied
    last-to-first.  Returns the class-token row over the N patch tokens,
    normalized to sum 1.
    """
    layers, _, t, _ = attention.shape
    result = np.eye(t)
    for li in range(layers):
        mean_heads = attention[li].mean(axis=0)
        augmented = mean_heads + np.eye(t)
        augmented /= augmented.sum(axis=1, keepdims=True)
        result = augmented @ result
    weights = result[0, 1:]
    total = weights.sum()
    return weights / total if total > 0 else weights


def attribution_to_pixels(weights: np.ndarray, sequence: ParsedSequence) -> np.ndarray:
    """Spread each patch's weight uniformly over its clamped pixel window.

    Returns an (H, W) map normalized to sum 1, comparable across scans of
    the same image via L1 distance.
    """
    h, w, p = sequence.height, sequence.width, sequence.patch_size
    half = p // 2
    canvas = np.zeros((h, w))
    share = 1.0 / (p * p)
    for weight, (row, col) in zip(weights, sequence.centers):
        r0 = min(max(row - half, 0), h - p)
        c0 = min(max(col - half, 0), w - p)
        canvas[r0 : r0 + p, c0 : c0 + p] += weight * share
    total = canvas.sum()
    return canvas / total if total > 0 else canvas


def pixel_attention_map(attention: np.ndarray, sequence: ParsedSequence) -> np.ndarray:
    return attribution_to_pixels(rollout_class_attribution(attention), sequence)
