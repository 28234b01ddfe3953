import numpy as np
import pytest
from numpy.testing import assert_array_equal
from scipy import ndimage

from pflicm.synth import composite, flat, generate, ripple, rock_noise


class TestTextures:
    def test_flat_low_variance(self):
        rng = np.random.default_rng(0)
        img = flat(128, 128, rng)
        assert img.std() < 0.05
        assert 0.0 <= img.min() and img.max() <= 1.0

    def test_ripple_is_periodic_and_bounded(self):
        rng = np.random.default_rng(0)
        img = ripple(96, 96, rng, noise=0.0, angle=0.0, wavelength=12.0)
        assert 0.0 <= img.min() and img.max() <= 1.0
        assert_array_equal(np.round(img[:, 0], 10),
                           np.round(img[:, 12], 10))

    def test_rock_noise_high_variance(self):
        rng = np.random.default_rng(0)
        img = rock_noise(128, 128, rng)
        assert img.std() > flat(128, 128,
                                np.random.default_rng(0)).std()


class TestComposite:
    def test_band_labels_cover_all_kinds(self):
        rng = np.random.default_rng(1)
        _, labels, _ = composite(64, 96, rng,
                                 kinds=("ripple", "flat", "rock-noise"))
        assert set(np.unique(labels)) == {0, 1, 2}

    def test_outlier_mask_disjoint_from_boundary_band(self):
        rng = np.random.default_rng(2)
        _, labels, mask = composite(128, 128, rng, outlier=True)
        assert mask.any()
        boundary = np.zeros_like(labels, dtype=bool)
        boundary[:, :-1] |= labels[:, :-1] != labels[:, 1:]
        boundary[:-1, :] |= labels[:-1, :] != labels[1:, :]
        band = ndimage.binary_dilation(boundary, iterations=8)
        assert not (mask & band).any()

    def test_outlier_is_bright(self):
        rng = np.random.default_rng(3)
        img, _, mask = composite(96, 96, rng, outlier=True)
        assert img[mask].min() == 1.0


class TestGenerate:
    def test_seed_determinism(self):
        a = generate("composite", 64, 64, seed=5, outlier=True)
        b = generate("composite", 64, 64, seed=5, outlier=True)
        assert_array_equal(a.image, b.image)
        assert_array_equal(a.labels, b.labels)
        assert_array_equal(a.outlier_mask, b.outlier_mask)

    def test_different_seed_differs(self):
        a = generate("flat", 64, 64, seed=5)
        b = generate("flat", 64, 64, seed=6)
        assert not np.array_equal(a.image, b.image)

    def test_minimum_size_enforced(self):
        with pytest.raises(ValueError):
            generate("flat", 32, 64, seed=0)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            generate("lava", 64, 64, seed=0)

    def test_plain_kinds_have_single_label(self):
        scene = generate("ripple", 64, 64, seed=0)
        assert set(np.unique(scene.labels)) == {0}
        assert not scene.outlier_mask.any()
