import numpy as np
import pytest

from pflicm import FeatureMatrix

BLOB_CENTERS = np.array([[0.0, 0.0], [0.0, 12.0], [12.0, 0.0]])
OUTLIER_POSITION = np.array([64.0, 0.0])


def grid_coords(n):
    """Deterministic well-spread (row, col) coordinates for n points."""
    side = int(np.ceil(np.sqrt(n)))
    rr, cc = np.mgrid[0:side, 0:side]
    return np.column_stack([rr.ravel(), cc.ravel()])[:n].astype(float)


def random_matrix(rng, n, d, spread=4.0):
    pts = spread * rng.standard_normal((n, d))
    return FeatureMatrix(points=pts, coords=grid_coords(n))


def blob_outlier_matrix(n_per_blob=80, sigma=0.1, seed=11):
    """Three tight 2-d blobs plus one far outlier; coordinates equal the
    feature positions.  Gaussian draws are norm-clipped at 2 sigma so
    every inlier provably stays near its blob center."""
    rng = np.random.default_rng(seed)
    chunks = []
    for ctr in BLOB_CENTERS:
        g = sigma * rng.standard_normal((n_per_blob, 2))
        norms = np.linalg.norm(g, axis=1)
        too_far = norms > 2.0 * sigma
        g[too_far] *= (2.0 * sigma / norms[too_far])[:, None]
        chunks.append(ctr + g)
    pts = np.vstack(chunks + [OUTLIER_POSITION[None, :]])
    info = {
        "blob_slices": [slice(i * n_per_blob, (i + 1) * n_per_blob)
                        for i in range(3)],
        "outlier_index": 3 * n_per_blob,
        "blob_centers": BLOB_CENTERS.copy(),
    }
    return FeatureMatrix(points=pts, coords=pts.copy()), info


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def blob_fixture():
    return blob_outlier_matrix()
