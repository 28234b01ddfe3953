import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from pflicm import (FeatureMatrix, assemble_features, hog_features,
                    lbp_features, normalize_features, sobel_edge_histogram)
from pflicm.features import lbp_codes

from conftest import grid_coords


def shifted_fractional(hist, shift):
    """Cyclically shift a histogram by a possibly fractional number of
    bins using linear interpolation."""
    n = len(hist)
    base = int(np.floor(shift))
    frac = shift - base
    rolled = np.roll(hist, base)
    return (1.0 - frac) * rolled + frac * np.roll(hist, base + 1)


class TestSobelEdgeHistogram:
    def test_constant_image_all_no_edge(self):
        img = np.full((20, 20), 0.4)
        h = sobel_edge_histogram(img)
        assert_allclose(h[:, :, 4], np.ones((20, 20)), atol=1e-12)
        assert_allclose(h[:, :, :4], np.zeros((20, 20, 4)), atol=1e-12)

    def test_vertical_step_labels(self):
        img = np.zeros((24, 24))
        img[:, 12:] = 1.0
        h = sobel_edge_histogram(img, window=5)
        # direct convolution of the vertical kernel against a unit step
        # peaks (|response| = 4) on the two columns astride the step
        center = h[12, 10:14, 0]
        assert center.max() > 0.3
        far = h[12, 2, :]
        assert far[4] == pytest.approx(1.0, abs=1e-12)

    def test_rows_sum_to_one(self, rng):
        img = rng.uniform(size=(30, 26))
        h = sobel_edge_histogram(img, window=7)
        assert_allclose(h.sum(axis=2), np.ones((30, 26)), atol=1e-9)
        assert np.all(h >= 0.0)

    def test_window_too_large(self):
        with pytest.raises(ValueError):
            sobel_edge_histogram(np.zeros((8, 8)), window=17)

    def test_even_window_rejected(self):
        with pytest.raises(ValueError):
            sobel_edge_histogram(np.zeros((20, 20)), window=4)


class TestHogFeatures:
    def test_constant_image_is_zero(self):
        img = np.full((12, 12), 0.7)
        h = hog_features(img)
        assert h.shape == (12, 12, 36)
        assert_array_equal(h, np.zeros((12, 12, 36)))

    def test_ramp_energy_in_zero_bin(self):
        cols = np.arange(16) / 40.0
        img = np.tile(cols, (16, 1))
        h = hog_features(img)
        nonzero_bins = {int(i) % 9 for i in np.flatnonzero(
            np.abs(h[8, 8]) > 1e-12)}
        assert nonzero_bins == {0}

    def test_rotation_shifts_orientation_bins(self):
        # an oblique ramp has a spatially constant gradient, so cell
        # geometry cancels and a 90-degree rotation must shift the
        # orientation histogram by 90/20 = 4.5 bins
        rows, cols = 17, 17
        theta = np.radians(40.0)
        rr, cc = np.mgrid[0:rows, 0:cols] / 60.0
        img = np.cos(theta) * cc + np.sin(theta) * rr
        img = img / img.max() * 0.9
        h = hog_features(img)
        h_rot = hog_features(np.rot90(img))
        r, c = 8, 8
        r2, c2 = c, rows - 1 - r
        # a fractional shift splits one-hot mass across two bins, which
        # changes the L2 norm, so renormalize after shifting
        orig_block = h[r, c].reshape(4, 9)
        expect = np.stack([shifted_fractional(v, 4.5) for v in orig_block])
        expect /= np.linalg.norm(expect)
        got = h_rot[r2, c2].reshape(4, 9)
        assert_allclose(got, expect, atol=1e-6)

    def test_translation_equivariance(self, rng):
        img = rng.uniform(size=(24, 24))
        shifted = np.roll(img, (3, 2), axis=(0, 1))
        h1 = hog_features(img)
        h2 = hog_features(shifted)
        assert_allclose(h2[10:18, 10:18], h1[7:15, 8:16], atol=1e-12)

    def test_image_smaller_than_window(self):
        with pytest.raises(ValueError):
            hog_features(np.zeros((4, 4)))


class TestLbp:
    def test_constant_image_codes(self):
        img = np.full((10, 10), 0.5)
        assert_array_equal(lbp_codes(img), np.full((10, 10), 255))
        h = lbp_features(img)
        assert_allclose(h[:, :, 255], np.ones((10, 10)), atol=1e-12)
        assert h.sum() == pytest.approx(100.0, abs=1e-9)

    def test_peak_center_code_zero(self):
        img = np.zeros((5, 5))
        img[2, 2] = 1.0
        assert lbp_codes(img)[2, 2] == 0

    def test_histograms_sum_to_one(self, rng):
        img = rng.uniform(size=(14, 11))
        h = lbp_features(img)
        assert_allclose(h.sum(axis=2), np.ones((14, 11)), atol=1e-9)
        assert np.all(h >= 0.0)

    def test_too_small_image(self):
        with pytest.raises(ValueError):
            lbp_features(np.zeros((2, 2)))


class TestAssemble:
    def test_layout(self, rng):
        img = rng.uniform(size=(20, 20))
        sob = sobel_edge_histogram(img, window=5)
        hog = hog_features(img)
        lbp = lbp_features(img)
        fmap = assemble_features(sob, hog, lbp)
        assert fmap.dim == 297
        assert fmap.block_dims == (5, 36, 256)
        assert_array_equal(fmap.values[11, 7, :5], sob[11, 7])
        assert_array_equal(fmap.values[11, 7, 5:41], hog[11, 7])

    def test_determinism(self, rng):
        img = rng.uniform(size=(16, 16))
        a = assemble_features(sobel_edge_histogram(img, window=5),
                              hog_features(img), lbp_features(img))
        b = assemble_features(sobel_edge_histogram(img, window=5),
                              hog_features(img), lbp_features(img))
        assert_array_equal(a.values, b.values)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            assemble_features(np.zeros((4, 4, 5)), np.zeros((4, 5, 36)),
                              np.zeros((4, 4, 256)))


class TestNormalize:
    def test_zscore_moments(self, rng):
        pts = rng.uniform(0.0, 9.0, size=(50, 4))
        fm = FeatureMatrix(points=pts, coords=grid_coords(50))
        out = normalize_features(fm)
        assert_allclose(out.points.mean(axis=0), np.zeros(4), atol=1e-9)
        assert_allclose(out.points.std(axis=0), np.ones(4), atol=1e-6)

    def test_constant_column_zeroed(self):
        pts = np.column_stack([np.full(6, 3.3), np.arange(6.0)])
        fm = FeatureMatrix(points=pts, coords=grid_coords(6))
        out = normalize_features(fm)
        assert_array_equal(out.points[:, 0], np.zeros(6))

    def test_two_point_case(self):
        fm = FeatureMatrix(points=np.array([[0.0], [2.0]]),
                           coords=grid_coords(2))
        out = normalize_features(fm)
        assert_allclose(out.points.ravel(), [-1.0, 1.0], atol=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(2, 40), st.integers(1, 6),
           st.integers(0, 2 ** 31 - 1))
    def test_idempotent_after_first_pass(self, n, d, seed):
        rng = np.random.default_rng(seed)
        fm = FeatureMatrix(points=rng.standard_normal((n, d)),
                           coords=grid_coords(n))
        once = normalize_features(fm)
        twice = normalize_features(once)
        assert_allclose(twice.points, once.points, atol=1e-9)


class TestTranslationEquivariance:
    def test_all_descriptors_shift_together(self, rng):
        img = rng.uniform(size=(28, 28))
        shifted = np.roll(img, (4, 5), axis=(0, 1))
        for fn, margin in ((lambda i: sobel_edge_histogram(i, window=5), 4),
                           (hog_features, 4),
                           (lbp_features, 2)):
            a = fn(img)
            b = fn(shifted)
            interior = np.s_[margin + 4:24, margin + 5:24]
            src = np.s_[margin:24 - 4, margin:24 - 5]
            assert_allclose(b[interior], a[src], atol=1e-12)
