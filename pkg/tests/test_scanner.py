import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from dynscan.errors import ConfigError
from dynscan.image import GrayImage, PixelCoord, crop_patch
from dynscan.saliency import compute_saliency, rank_pixels
from dynscan.scanner import (
    ScanConfig,
    ScanVariant,
    SeedContext,
    SeedPolicy,
    default_num_patches,
    derive_scan_seed,
    grid_patch_count,
    position_index,
    random_tracing_centers,
    scan,
    scan_random_patches,
    scan_salient_patches,
    scan_salient_tracing,
    scan_systematic,
    trace_line,
)

from conftest import make_image, uniform_image


class TestSeedDerivation:
    def test_fixed_per_image_ignores_scan_index(self):
        a = derive_scan_seed(99, "img-a", 0, SeedPolicy.FIXED_PER_IMAGE)
        b = derive_scan_seed(99, "img-a", 7, SeedPolicy.FIXED_PER_IMAGE)
        assert a.seed == b.seed

    def test_stochastic_mixes_scan_index(self):
        a = derive_scan_seed(99, "img-a", 0, SeedPolicy.STOCHASTIC)
        b = derive_scan_seed(99, "img-a", 1, SeedPolicy.STOCHASTIC)
        assert a.seed != b.seed

    def test_repeatable_across_calls(self):
        args = (1234567890123, b"some-image", 5, SeedPolicy.STOCHASTIC)
        assert derive_scan_seed(*args).seed == derive_scan_seed(*args).seed

    def test_different_images_differ(self):
        a = derive_scan_seed(0, "img-a", 0, SeedPolicy.FIXED_PER_IMAGE)
        b = derive_scan_seed(0, "img-b", 0, SeedPolicy.FIXED_PER_IMAGE)
        assert a.seed != b.seed

    def test_str_and_bytes_ids_agree(self):
        a = derive_scan_seed(3, "xyz", 2, SeedPolicy.STOCHASTIC)
        b = derive_scan_seed(3, b"xyz", 2, SeedPolicy.STOCHASTIC)
        assert a.seed == b.seed


class TestSeedContext:
    def test_same_seed_same_stream(self):
        a = SeedContext(42)
        b = SeedContext(42)
        assert [a.next_u64() for _ in range(32)] == [b.next_u64() for _ in range(32)]

    def test_randbelow_in_range_and_unbiased_shape(self):
        ctx = SeedContext(7)
        draws = [ctx.randbelow(10) for _ in range(1000)]
        assert min(draws) >= 0 and max(draws) <= 9
        assert len(set(draws)) == 10

    def test_randbelow_many_matches_scalar_stream(self):
        a = SeedContext(123)
        b = SeedContext(123)
        assert a.randbelow_many(1024, 500) == [b.randbelow(1024) for _ in range(500)]


class TestPositionIndex:
    def test_origin_is_one(self):
        assert position_index(PixelCoord(0, 0), 32) == 1

    def test_row_major_shift(self):
        assert position_index(PixelCoord(1, 2), 32) == 35

    def test_max_is_pixel_count(self):
        assert position_index(PixelCoord(31, 31), 32) == 1024

    @settings(max_examples=100, deadline=None)
    @given(
        n=st.integers(1, 256),
        r=st.integers(0, 255),
        c=st.integers(0, 255),
    )
    def test_range_property(self, n, r, c):
        r, c = r % n, c % n
        p = position_index(PixelCoord(r, c), n)
        assert p == r * n + c + 1
        assert 1 <= p <= n * n


class TestDefaultNumPatches:
    @pytest.mark.parametrize(
        "size,patch,expected",
        [(32, 3, 121), (32, 9, 16), (220, 9, 625), (220, 15, 225)],
    )
    def test_published_counts(self, size, patch, expected):
        assert default_num_patches(size, patch) == expected

    def test_rejects_patch_bigger_than_image(self):
        with pytest.raises(ConfigError):
            default_num_patches(8, 9)

    def test_grid_count_non_square(self):
        assert grid_patch_count(32, 64, 3) == 11 * 22


class TestTraceLine:
    def test_axis_aligned(self):
        assert trace_line(PixelCoord(2, 2), PixelCoord(2, 6)) == [
            PixelCoord(2, c) for c in range(2, 7)
        ]

    def test_exact_diagonal(self):
        assert trace_line(PixelCoord(0, 0), PixelCoord(3, 3)) == [
            PixelCoord(i, i) for i in range(4)
        ]

    def test_shallow_slope_frozen_variant(self):
        # frozen against the documented midpoint rule (err starts at dx//2)
        assert trace_line(PixelCoord(0, 0), PixelCoord(1, 3)) == [
            PixelCoord(0, 0),
            PixelCoord(0, 1),
            PixelCoord(1, 2),
            PixelCoord(1, 3),
        ]

    def test_single_point(self):
        assert trace_line(PixelCoord(4, 4), PixelCoord(4, 4)) == [PixelCoord(4, 4)]

    def test_reverse_is_reversed(self):
        fwd = trace_line(PixelCoord(1, 2), PixelCoord(7, 5))
        rev = trace_line(PixelCoord(7, 5), PixelCoord(1, 2))
        assert rev == fwd[::-1]

    @settings(max_examples=100, deadline=None)
    @given(
        r0=st.integers(0, 30),
        c0=st.integers(0, 30),
        r1=st.integers(0, 30),
        c1=st.integers(0, 30),
    )
    def test_endpoints_and_connectivity(self, r0, c0, r1, c1):
        pts = trace_line(PixelCoord(r0, c0), PixelCoord(r1, c1))
        assert pts[0] == (r0, c0) and pts[-1] == (r1, c1)
        for a, b in zip(pts, pts[1:]):
            assert max(abs(a.row - b.row), abs(a.col - b.col)) == 1
        assert len(pts) == max(abs(r1 - r0), abs(c1 - c0)) + 1


class _ScriptedCtx:
    """Stand-in seed context replaying preset flat-index draws."""

    seed = 0
    policy = SeedPolicy.STOCHASTIC

    def __init__(self, draws):
        self._draws = iter(draws)

    def randbelow(self, bound):
        return next(self._draws)

    def randbelow_many(self, bound, count):
        return [next(self._draws) for _ in range(count)]


class TestRandomPatches:
    def test_length_contract(self):
        img = make_image(16, 16)
        config = ScanConfig(ScanVariant.RANDOM_PATCHES, 3, 5)
        ctx = derive_scan_seed(1, "x", 0, SeedPolicy.STOCHASTIC)
        assert len(scan_random_patches(img, config, ctx)) == 5

    def test_identical_context_identical_sequence(self):
        img = make_image(16, 16)
        config = ScanConfig(ScanVariant.RANDOM_PATCHES, 3, 40)
        a = scan_random_patches(
            img, config, derive_scan_seed(5, "x", 3, SeedPolicy.STOCHASTIC)
        )
        b = scan_random_patches(
            img, config, derive_scan_seed(5, "x", 3, SeedPolicy.STOCHASTIC)
        )
        assert a.patches == b.patches

    def test_patches_match_crop_and_position(self):
        img = make_image(20, 14)
        config = ScanConfig(ScanVariant.RANDOM_PATCHES, 5, 30)
        ctx = derive_scan_seed(2, "y", 0, SeedPolicy.STOCHASTIC)
        seq = scan_random_patches(img, config, ctx)
        for patch in seq.patches:
            assert np.array_equal(patch.pixels, crop_patch(img, patch.center, 5))
            assert patch.position == position_index(patch.center, img.width)

    def test_centers_uniform_chi_square(self):
        # desk-scale sanity: 20000 draws over an 8x8 grid
        img = make_image(8, 8)
        config = ScanConfig(ScanVariant.RANDOM_PATCHES, 1, 20000)
        ctx = derive_scan_seed(31337, "chi", 0, SeedPolicy.STOCHASTIC)
        seq = scan_random_patches(img, config, ctx)
        counts = np.zeros(64)
        for patch in seq.patches:
            counts[patch.center.row * 8 + patch.center.col] += 1
        expected = 20000 / 64
        stat = ((counts - expected) ** 2 / expected).sum()
        # df=63; reject only below the 1e-4 tail to keep the test stable
        assert stat < scipy.stats.chi2.ppf(1 - 1e-4, df=63)

    def test_wrong_variant_rejected(self):
        img = make_image(8, 8)
        config = ScanConfig(ScanVariant.RANDOM_TRACING, 3, 5)
        ctx = derive_scan_seed(0, "x", 0, SeedPolicy.STOCHASTIC)
        with pytest.raises(ConfigError):
            scan_random_patches(img, config, ctx)


class TestRandomTracing:
    def test_first_ray_truncation(self):
        # scripted draws: endpoints (2,2) and (2,6) on a 16-wide image
        img = make_image(8, 16)
        config = ScanConfig(ScanVariant.RANDOM_TRACING, 3, 4)
        ctx = _ScriptedCtx([2 * 16 + 2, 2 * 16 + 6])
        seq = scan(img, "scripted", config, ctx=ctx)
        assert seq.centers() == [
            PixelCoord(2, 2),
            PixelCoord(2, 3),
            PixelCoord(2, 4),
            PixelCoord(2, 5),
        ]

    def test_identical_context_identical_sequence(self):
        img = make_image(16, 16)
        config = ScanConfig(ScanVariant.RANDOM_TRACING, 3, 50)
        a = scan(img, "x", config, ctx=derive_scan_seed(5, "x", 1, SeedPolicy.STOCHASTIC))
        b = scan(img, "x", config, ctx=derive_scan_seed(5, "x", 1, SeedPolicy.STOCHASTIC))
        assert a.patches == b.patches

    def test_ray_interiors_are_8_connected(self):
        h = w = 16
        ctx = derive_scan_seed(8, "conn", 0, SeedPolicy.STOCHASTIC)
        centers = random_tracing_centers(h, w, 200, ctx)
        # replay the same draws to recover ray boundaries
        ctx2 = derive_scan_seed(8, "conn", 0, SeedPolicy.STOCHASTIC)
        rebuilt = []
        while len(rebuilt) < 200:
            a = ctx2.randbelow(h * w)
            b = ctx2.randbelow(h * w)
            rebuilt.extend(
                trace_line(PixelCoord(a // w, a % w), PixelCoord(b // w, b % w))
            )
        assert centers == rebuilt[:200]

    def test_exact_length(self):
        img = make_image(10, 10)
        for n in (1, 7, 33):
            config = ScanConfig(ScanVariant.RANDOM_TRACING, 3, n)
            ctx = derive_scan_seed(1, "len", n, SeedPolicy.STOCHASTIC)
            assert len(scan(img, "len", config, ctx=ctx)) == n


class TestSalientPatches:
    def test_bright_pixel_first(self):
        img = uniform_image(16, 16, 0)
        img.samples[5, 7] = 255
        config = ScanConfig(ScanVariant.SALIENT_PATCHES, 3, 4)
        seq = scan(img, "bright", config)
        assert seq.patches[0].center == PixelCoord(5, 7)

    def test_uniform_image_tie_break_order(self):
        img = uniform_image(8, 8, 50)
        config = ScanConfig(ScanVariant.SALIENT_PATCHES, 3, 3)
        seq = scan(img, "uniform", config)
        assert seq.centers() == [PixelCoord(0, 0), PixelCoord(0, 1), PixelCoord(0, 2)]

    def test_zero_entropy(self):
        img = make_image(16, 16, seed=5)
        config = ScanConfig(ScanVariant.SALIENT_PATCHES, 3, 30)
        assert scan(img, "a", config).patches == scan(img, "a", config).patches

    def test_dimension_mismatch_rejected(self):
        img = make_image(8, 8)
        wrong = compute_saliency(GrayImage(9, 9, np.zeros((9, 9))))
        config = ScanConfig(ScanVariant.SALIENT_PATCHES, 3, 3)
        with pytest.raises(ConfigError):
            scan_salient_patches(img, wrong, config)

    def test_n_beyond_pixel_count_cycles(self):
        img = uniform_image(4, 4, 10)
        config = ScanConfig(ScanVariant.SALIENT_PATCHES, 3, 20)
        centers = scan(img, "cyc", config).centers()
        assert centers[16:] == centers[:4]  # ranking exhausted, wraps around


class TestSalientTracing:
    @staticmethod
    def _two_peak_map():
        values = np.zeros((8, 8))
        values[2, 2] = 1.0
        values[2, 6] = 0.9
        return GrayImage(8, 8, values)

    def test_two_peak_ray(self):
        img = make_image(8, 8, seed=1)
        config = ScanConfig(ScanVariant.SALIENT_TRACING, 3, 5)
        seq = scan_salient_tracing(img, self._two_peak_map(), config)
        assert seq.centers() == [PixelCoord(2, c) for c in (2, 3, 4, 5, 6)]

    def test_truncation(self):
        img = make_image(8, 8, seed=1)
        config = ScanConfig(ScanVariant.SALIENT_TRACING, 3, 3)
        seq = scan_salient_tracing(img, self._two_peak_map(), config)
        assert seq.centers() == [PixelCoord(2, c) for c in (2, 3, 4)]

    def test_shared_endpoint_emitted_twice(self):
        img = make_image(8, 8, seed=1)
        # after the first ray ends at (2,6), the next ray re-emits it
        config = ScanConfig(ScanVariant.SALIENT_TRACING, 3, 6)
        seq = scan_salient_tracing(img, self._two_peak_map(), config)
        assert seq.centers()[4] == PixelCoord(2, 6)
        assert seq.centers()[5] == PixelCoord(2, 6)

    def test_zero_entropy(self):
        img = make_image(12, 12, seed=9)
        config = ScanConfig(ScanVariant.SALIENT_TRACING, 3, 40)
        assert scan(img, "a", config).patches == scan(img, "a", config).patches


class TestSystematic:
    def test_32x32_grid(self):
        img = make_image(32, 32)
        config = ScanConfig(ScanVariant.SYSTEMATIC, 3, 121)
        seq = scan_systematic(img, config)
        assert len(seq) == 121
        assert seq.patches[0].center == PixelCoord(1, 1)  # window rows 0..2
        assert seq.patches[-1].center == PixelCoord(30, 30)  # window rows 29..31
        assert np.array_equal(seq.patches[0].pixels, img.samples[0:3, 0:3])
        assert np.array_equal(seq.patches[-1].pixels, img.samples[29:32, 29:32])

    def test_exact_tiling(self):
        img = make_image(6, 6)
        config = ScanConfig(ScanVariant.SYSTEMATIC, 3, 4)
        seq = scan_systematic(img, config)
        assert seq.centers() == [
            PixelCoord(1, 1),
            PixelCoord(1, 4),
            PixelCoord(4, 1),
            PixelCoord(4, 4),
        ]

    def test_n_mismatch_rejected(self):
        img = make_image(6, 6)
        with pytest.raises(ConfigError, match="systematic"):
            scan_systematic(img, ScanConfig(ScanVariant.SYSTEMATIC, 3, 5))

    def test_positions_use_center_formula(self):
        img = make_image(7, 7)
        config = ScanConfig(ScanVariant.SYSTEMATIC, 3, 9)
        for patch in scan_systematic(img, config).patches:
            assert patch.position == position_index(patch.center, 7)


class TestScanDispatch:
    def test_fixed_per_image_repeatable_but_image_sensitive(self):
        config = ScanConfig(ScanVariant.RANDOM_PATCHES, 3, 25)
        img_a, img_b = make_image(12, 12, seed=1), make_image(12, 12, seed=2)
        seq1 = scan(img_a, "a", config,
                    ctx=derive_scan_seed(7, "a", 0, SeedPolicy.FIXED_PER_IMAGE))
        seq2 = scan(img_a, "a", config,
                    ctx=derive_scan_seed(7, "a", 99, SeedPolicy.FIXED_PER_IMAGE))
        seq3 = scan(img_b, "b", config,
                    ctx=derive_scan_seed(7, "b", 0, SeedPolicy.FIXED_PER_IMAGE))
        assert seq1.patches == seq2.patches
        assert seq1.centers() != seq3.centers()

    def test_random_variant_without_context_rejected(self):
        config = ScanConfig(ScanVariant.RANDOM_PATCHES, 3, 5)
        with pytest.raises(ValueError):
            scan(make_image(8, 8), "x", config)

    def test_patch_size_exceeding_image_rejected(self):
        config = ScanConfig(ScanVariant.SALIENT_PATCHES, 9, 5)
        with pytest.raises(ConfigError):
            scan(make_image(8, 8), "x", config)

    def test_even_patch_size_rejected_at_config(self):
        with pytest.raises(ConfigError):
            ScanConfig(ScanVariant.RANDOM_PATCHES, 4, 5)

    def test_provenance_recorded(self):
        img = make_image(10, 10, seed=3)
        config = ScanConfig(ScanVariant.RANDOM_PATCHES, 3, 8)
        ctx = derive_scan_seed(11, "prov", 2, SeedPolicy.STOCHASTIC)
        seq = scan(img, "prov", config, ctx=ctx)
        prov = seq.provenance
        assert prov.image_id == "prov"
        assert (prov.image_height, prov.image_width, prov.channels) == (10, 10, 3)
        assert prov.seed_policy is SeedPolicy.STOCHASTIC
        assert prov.resolved_seed == derive_scan_seed(
            11, "prov", 2, SeedPolicy.STOCHASTIC
        ).seed

    def test_salient_provenance_has_no_seed(self):
        img = make_image(10, 10, seed=3)
        seq = scan(img, "s", ScanConfig(ScanVariant.SALIENT_PATCHES, 3, 4))
        assert seq.provenance.seed_policy is None
        assert seq.provenance.resolved_seed is None
