import subprocess
import sys
from pathlib import Path

import pytest

DATA_DIR = Path(__file__).resolve().parents[2] / "data"
SAMPLE = DATA_DIR / "sample.ppm"


def run_producer_scan(out_path, *, variant="rp", patch_size=3, num_patches="auto",
                      seed=42, policy="stochastic", scan_index=0, image=SAMPLE):
    """Drive the producer through its CLI, the consumer-facing interface."""
    cmd = [
        sys.executable, "-m", "dynscan", "scan",
        "--input", str(image), "--output", str(out_path),
        "--variant", variant, "--patch-size", str(patch_size),
        "--num-patches", str(num_patches), "--seed", str(seed),
        "--seed-policy", policy, "--scan-index", str(scan_index),
    ]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return Path(out_path)


@pytest.fixture(scope="session")
def sample_path():
    return SAMPLE


@pytest.fixture(scope="session")
def stochastic_pair(tmp_path_factory):
    """Two stochastic scans of the sample image, scan indices 0 and 1."""
    root = tmp_path_factory.mktemp("seqs")
    a = run_producer_scan(root / "a.dsa", scan_index=0)
    b = run_producer_scan(root / "b.dsa", scan_index=1)
    return a, b


@pytest.fixture(scope="session")
def fixed_pair(tmp_path_factory):
    """Two fixed-per-image scans: identical by construction."""
    root = tmp_path_factory.mktemp("seqs-fixed")
    a = run_producer_scan(root / "a.dsa", policy="fixed-per-image", scan_index=0)
    b = run_producer_scan(root / "b.dsa", policy="fixed-per-image", scan_index=9)
    return a, b
