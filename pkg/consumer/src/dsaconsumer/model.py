"""Minimal transformer encoder over patch sequences, with attention capture.

A deliberately tiny stand-in for a trained classifier: seed-fixed random
weights, two pre-norm encoder layers with two heads each, a class token at
index 0, and positional embeddings looked up by each patch's shifted
row-major center index (table entry 0 belongs to the class token).  The
point is structural, not predictive: attention is a function of the input
sequence, so different scans of one image attend differently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .seqreader import ParsedSequence


@dataclass
class EmbeddedSequence:
    tokens: np.ndarray  # float64, shape (N+1, dim); row 0 is the class token
    position_ids: np.ndarray  # int64, shape (N+1,); id 0 only at index 0
    sequence: ParsedSequence


@dataclass
class ForwardResult:
    logits: np.ndarray  # float64, shape (num_classes,)
    attention: np.ndarray  # float64, shape (layers, heads, N+1, N+1)


def _layer_norm(x: np.ndarray) -> np.ndarray:
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    return (x - mean) / np.sqrt(var + 1e-6)


def _softmax(x: np.ndarray) -> np.ndarray:
    shifted = x - x.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _gelu(x: np.ndarray) -> np.ndarray:
    return 0.5 * x * (1.0 + np.tanh(np.sqrt(2.0 / np.pi) * (x + 0.044715 * x**3)))


class ToyTransformer:
    """Seed-fixed encoder for sequences scanned from one image geometry."""

    def __init__(
        self,
        height: int,
        width: int,
        channels: int,
        patch_size: int,
        dim: int = 64,
        layers: int = 2,
        heads: int = 2,
        mlp_ratio: int = 4,
        num_classes: int = 10,
        seed: int = 0,
    ):
        if dim % heads:
            raise ValueError("dim must be divisible by heads")
        self.height = height
        self.width = width
        self.channels = channels
        self.patch_size = patch_size
        self.dim = dim
        self.layers = layers
        self.heads = heads
        rng = np.random.default_rng(seed)
        scale = 0.02
        in_dim = patch_size * patch_size * channels
        self.projection = rng.normal(0, scale, (in_dim, dim))
        # table entry 0 is reserved for the class token (shift-by-one rule)
        self.positions = rng.normal(0, scale, (height * width + 1, dim))
        self.class_token = rng.normal(0, scale, dim)
        self.blocks = []
        for _ in range(layers):
            self.blocks.append(
                {
                    "wq": rng.normal(0, scale, (dim, dim)),
                    "wk": rng.normal(0, scale, (dim, dim)),
                    "wv": rng.normal(0, scale, (dim, dim)),
                    "wo": rng.normal(0, scale, (dim, dim)),
                    "w1": rng.normal(0, scale, (dim, mlp_ratio * dim)),
                    "b1": np.zeros(mlp_ratio * dim),
                    "w2": rng.normal(0, scale, (mlp_ratio * dim, dim)),
                    "b2": np.zeros(dim),
                }
            )
        self.classifier = rng.normal(0, scale, (dim, num_classes))

    @classmethod
    def for_sequence(cls, sequence: ParsedSequence, **kwargs) -> "ToyTransformer":
        return cls(
            sequence.height,
            sequence.width,
            sequence.channels,
            sequence.patch_size,
            **kwargs,
        )

    def embed(self, sequence: ParsedSequence) -> EmbeddedSequence:
        """Project flattened patch pixels and add looked-up position rows."""
        if (sequence.height, sequence.width) != (self.height, self.width):
            raise ValueError("sequence geometry does not match the model")
        if sequence.patch_size != self.patch_size or sequence.channels != self.channels:
            raise ValueError("patch geometry does not match the model")
        n = sequence.num_patches
        flat = sequence.pixels.reshape(n, -1).astype(np.float64) / 255.0
        patch_tokens = flat @ self.projection + self.positions[sequence.positions]
        tokens = np.vstack([self.class_token + self.positions[0], patch_tokens])
        position_ids = np.concatenate([[0], sequence.positions])
        return EmbeddedSequence(tokens, position_ids, sequence)

    def forward(self, embedded: EmbeddedSequence) -> ForwardResult:
        """Pre-norm encoder pass; returns class-token logits and the full
        per-layer, per-head attention stack."""
        x = embedded.tokens
        t = x.shape[0]
        hd = self.dim // self.heads
        attention = np.empty((self.layers, self.heads, t, t))
        for li, block in enumerate(self.blocks):
            normed = _layer_norm(x)
            q = (normed @ block["wq"]).reshape(t, self.heads, hd).transpose(1, 0, 2)
            k = (normed @ block["wk"]).reshape(t, self.heads, hd).transpose(1, 0, 2)
            v = (normed @ block["wv"]).reshape(t, self.heads, hd).transpose(1, 0, 2)
            scores = q @ k.transpose(0, 2, 1) / np.sqrt(hd)
            attn = _softmax(scores)
            attention[li] = attn
            context = (attn @ v).transpose(1, 0, 2).reshape(t, self.dim)
            x = x + context @ block["wo"]
            normed = _layer_norm(x)
            x = x + _gelu(normed @ block["w1"] + block["b1"]) @ block["w2"]
        x = _layer_norm(x)
        logits = x[0] @ self.classifier
        return ForwardResult(logits, attention)
