import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from scipy import ndimage

from pflicm import aggregate, enforce_connectivity, project_to_pixels, slic
from pflicm.features import PixelFeatureMap
from pflicm.superpixels import FOUR_CONNECTED, summarize_labels


def assert_valid_partition(sp):
    labels = sp.labels
    assert labels.min() == 0
    assert labels.max() == sp.n_superpixels - 1
    assert np.all(sp.sizes > 0)
    assert sp.sizes.sum() == labels.size
    for v in range(sp.n_superpixels):
        _, n = ndimage.label(labels == v, structure=FOUR_CONNECTED)
        assert n == 1, f"label {v} split into {n} components"


class TestSlic:
    def test_single_pixel(self):
        sp = slic(np.array([[0.5]]), k_target=1)
        assert sp.n_superpixels == 1
        assert_array_equal(sp.labels, [[0]])
        assert_array_equal(sp.centroids, [[0.0, 0.0]])

    def test_constant_image_grid(self):
        sp = slic(np.full((100, 100), 0.5), k_target=25)
        assert 20 <= sp.n_superpixels <= 30
        grid = np.array([[r, c] for r in range(10, 100, 20)
                         for c in range(10, 100, 20)], dtype=float)
        for centroid in sp.centroids:
            nearest = np.linalg.norm(grid - centroid, axis=1).min()
            assert nearest <= 2.0
        assert_valid_partition(sp)

    def test_partition_and_connectivity(self, rng):
        img = rng.uniform(size=(48, 40))
        sp = slic(img, k_target=20)
        assert_valid_partition(sp)

    def test_k_target_bounds(self):
        with pytest.raises(ValueError):
            slic(np.zeros((4, 4)), k_target=0)
        with pytest.raises(ValueError):
            slic(np.zeros((4, 4)), k_target=17)

    def test_size_bound_on_constant_images(self):
        for shape, k in (((64, 64), 16), ((80, 48), 12)):
            sp = slic(np.full(shape, 0.3), k_target=k)
            mean_area = sp.labels.size / sp.n_superpixels
            assert sp.sizes.max() <= 4.0 * mean_area

    def test_deterministic(self, rng):
        img = rng.uniform(size=(40, 40))
        a = slic(img, k_target=12)
        b = slic(img, k_target=12)
        assert_array_equal(a.labels, b.labels)

    def test_centroids_match_label_means(self, rng):
        img = rng.uniform(size=(32, 32))
        sp = slic(img, k_target=9)
        rr, cc = np.mgrid[0:32, 0:32]
        for v in range(sp.n_superpixels):
            mask = sp.labels == v
            assert_allclose(sp.centroids[v],
                            [rr[mask].mean(), cc[mask].mean()], atol=1e-12)


class TestEnforceConnectivity:
    def test_connected_input_unchanged_up_to_relabeling(self):
        labels = np.zeros((6, 6), dtype=int)
        labels[:, 3:] = 1
        out = enforce_connectivity(labels)
        assert_array_equal(out, labels)

    def test_stray_pixel_absorbed(self):
        labels = np.zeros((8, 8), dtype=int)
        labels[:, 4:] = 1
        labels[2, 1] = 1   # stray pixel of label 1 inside region 0
        out = enforce_connectivity(labels)
        assert out[2, 1] == out[2, 0]
        assert len(np.unique(out)) == 2

    def test_checkerboard_collapses(self):
        rr, cc = np.mgrid[0:4, 0:4]
        labels = (rr + cc) % 2
        out = enforce_connectivity(labels)
        sp = summarize_labels(out)
        assert sp.n_superpixels < 16
        assert_valid_partition(sp)


class TestAggregateProject:
    def _feature_map(self, values):
        return PixelFeatureMap(values=values, block_dims=(values.shape[2],))

    def test_identical_features_exact(self):
        # dyadic constants accumulate without rounding, so the mean of
        # equal values is bit-exact; non-dyadic ones agree to an ulp
        labels = np.zeros((4, 4), dtype=int)
        labels[2:, :] = 1
        sp = summarize_labels(labels)
        fm = aggregate(self._feature_map(np.full((4, 4, 3), 0.75)), sp)
        assert_array_equal(fm.points, np.full((2, 3), 0.75))
        fm = aggregate(self._feature_map(np.full((4, 4, 3), 0.7)), sp)
        assert_allclose(fm.points, np.full((2, 3), 0.7), atol=1e-15)

    def test_two_pixel_mean(self):
        values = np.array([[[0.0], [2.0]]])
        sp = summarize_labels(np.zeros((1, 2), dtype=int))
        fm = aggregate(self._feature_map(values), sp)
        assert_array_equal(fm.points, [[1.0]])

    def test_mass_conservation(self, rng):
        values = rng.uniform(size=(20, 20, 7))
        sp = slic(rng.uniform(size=(20, 20)), k_target=6)
        fm = aggregate(self._feature_map(values), sp)
        total = (fm.points * sp.sizes[:, None]).sum(axis=0)
        assert_allclose(total, values.reshape(-1, 7).sum(axis=0),
                        atol=1e-6)

    def test_coords_are_centroids(self, rng):
        values = rng.uniform(size=(16, 16, 2))
        sp = slic(rng.uniform(size=(16, 16)), k_target=4)
        fm = aggregate(self._feature_map(values), sp)
        assert_array_equal(fm.coords, sp.centroids)

    def test_project_constant(self):
        sp = summarize_labels(np.zeros((3, 3), dtype=int))
        assert_array_equal(project_to_pixels([0.4], sp),
                           np.full((3, 3), 0.4))

    def test_project_one_hot_masks_region(self):
        labels = np.zeros((4, 4), dtype=int)
        labels[1:3, 1:3] = 1
        sp = summarize_labels(labels)
        out = project_to_pixels([0.0, 1.0], sp)
        assert_array_equal(out == 1.0, labels == 1)

    def test_round_trip_exact(self, rng):
        # dyadic values sum and divide exactly in binary floating point
        sp = slic(rng.uniform(size=(24, 24)), k_target=8)
        values = rng.integers(0, 257, size=sp.n_superpixels) / 256.0
        pix = project_to_pixels(values, sp)
        fm = aggregate(self._feature_map(pix[:, :, None]), sp)
        assert_array_equal(fm.points.ravel(), values)

    def test_length_mismatch(self):
        sp = summarize_labels(np.zeros((2, 2), dtype=int))
        with pytest.raises(ValueError):
            project_to_pixels([0.1, 0.2], sp)
