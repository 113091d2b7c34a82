"""Figure rendering for sweep reports.

Kept out of the analysis core: CSV and PGM/PPM rasters are the interchange
formats; this module only turns already-computed rows into matplotlib
figures saved next to the delimited output.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .analysis import AblationRow
from .scanner import ScanVariant

VARIANT_LABELS = {
    ScanVariant.RANDOM_PATCHES: "Random Patches",
    ScanVariant.RANDOM_TRACING: "Random Tracing",
    ScanVariant.SALIENT_PATCHES: "Salient Patches",
    ScanVariant.SALIENT_TRACING: "Salient Tracing",
    ScanVariant.SYSTEMATIC: "Systematic",
}


def coverage_figure(rows: Sequence[AblationRow], out_path: str | Path) -> Path:
    """Coverage-vs-N curves, one panel per patch size, std as a band."""
    out_path = Path(out_path)
    patch_sizes = sorted({row.patch_size for row in rows})
    fig, axes = plt.subplots(
        1, len(patch_sizes), figsize=(5.2 * len(patch_sizes), 3.8), squeeze=False
    )
    for ax, p in zip(axes[0], patch_sizes):
        for variant in ScanVariant:
            points = sorted(
                (r.num_patches, r.mean_coverage, r.std_coverage)
                for r in rows
                if r.patch_size == p and r.variant is variant
            )
            if not points:
                continue
            ns = [pt[0] for pt in points]
            means = [pt[1] for pt in points]
            stds = [pt[2] for pt in points]
            ax.plot(ns, means, marker="o", markersize=3, label=VARIANT_LABELS[variant])
            ax.fill_between(
                ns,
                [m - s for m, s in zip(means, stds)],
                [m + s for m, s in zip(means, stds)],
                alpha=0.2,
            )
        ax.set_xlabel("patches per scan (N)")
        ax.set_ylabel("coverage fraction")
        ax.set_ylim(0.0, 1.05)
        ax.set_title(f"patch size {p}")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
