"""SLIC oversegmentation and superpixel-level feature aggregation.

The oversegmenter runs windowed k-means in joint (intensity, row, col)
space from grid-initialized seeds, then merges undersized connected
components into their largest neighbor so every region is 4-connected.
Aggregation averages per-pixel features within each region and attaches
the region centroid as the clustering coordinate.
"""

from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy import ndimage, sparse

from .clustering import FeatureMatrix
from .features import validate_image

FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


@dataclass
class SuperpixelMap:
    """Label image plus per-region centroids and pixel counts."""

    labels: np.ndarray
    n_superpixels: int
    centroids: np.ndarray
    sizes: np.ndarray

    @property
    def shape(self):
        return self.labels.shape


def _grid_seeds(img, step):
    """Seed coordinates on a regular grid, each nudged to the lowest
    squared-gradient position in its 3x3 neighborhood."""
    rows, cols = img.shape
    p = np.pad(img, 1, mode="edge")
    gr = (p[2:, 1:-1] - p[:-2, 1:-1]) / 2.0
    gc = (p[1:-1, 2:] - p[1:-1, :-2]) / 2.0
    grad = gr * gr + gc * gc
    rs = np.arange(step / 2.0, rows, step).astype(int)
    cs = np.arange(step / 2.0, cols, step).astype(int)
    seeds = []
    for r, c in product(rs.tolist(), cs.tolist()):
        best = (grad[r, c], r, c)
        for dr, dc in product((-1, 0, 1), (-1, 0, 1)):
            rr, cc = r + dr, c + dc
            if 0 <= rr < rows and 0 <= cc < cols and grad[rr, cc] < best[0]:
                best = (grad[rr, cc], rr, cc)
        seeds.append((best[1], best[2]))
    return seeds


def slic(img, k_target, compactness=10.0, iters=10):
    """Oversegment an intensity image into roughly k_target superpixels.

    Cluster centers live in (intensity*255, row, col) space; each
    iteration assigns pixels within a 2S x 2S window of every center
    under D = sqrt(d_intensity^2 + (compactness/S)^2 * d_spatial^2) and
    re-estimates centers as member means.  Connectivity enforcement may
    change the final region count, so use the returned map's
    ``n_superpixels`` rather than k_target downstream.
    """
    img = validate_image(img)
    rows, cols = img.shape
    if not 1 <= k_target <= rows * cols:
        raise ValueError("k_target must be in [1, rows*cols]")
    step = float(np.sqrt(rows * cols / k_target))
    seeds = _grid_seeds(img, step)
    intens = img * 255.0
    centers = np.array([(intens[r, c], float(r), float(c))
                        for r, c in seeds])
    spatial_w = (compactness / step) ** 2
    half = max(int(round(step)), 1)
    rr, cc = np.mgrid[0:rows, 0:cols]
    labels = np.full(img.shape, -1, dtype=np.int64)
    for _ in range(iters):
        best = np.full(img.shape, np.inf)
        labels.fill(-1)
        for k in range(len(centers)):
            ci, cr, cc0 = centers[k]
            r0, r1 = max(int(cr) - half, 0), min(int(cr) + half + 1, rows)
            c0, c1 = max(int(cc0) - half, 0), min(int(cc0) + half + 1, cols)
            di = intens[r0:r1, c0:c1] - ci
            dsp = (rr[r0:r1, c0:c1] - cr) ** 2 + (cc[r0:r1, c0:c1] - cc0) ** 2
            d = np.sqrt(di * di + spatial_w * dsp)
            win_best = best[r0:r1, c0:c1]
            closer = d < win_best
            win_best[closer] = d[closer]
            labels[r0:r1, c0:c1][closer] = k
        # pixels outside every search window (possible after center
        # drift): fall back to the spatially nearest center
        missing = labels < 0
        if missing.any():
            pts = np.column_stack([rr[missing], cc[missing]])
            d2 = (pts[:, None, :] - centers[None, :, 1:]) ** 2
            labels[missing] = d2.sum(axis=2).argmin(axis=1)
        flat = labels.ravel()
        counts = np.bincount(flat, minlength=len(centers)).astype(float)
        occupied = counts > 0
        for j, comp in enumerate((intens.ravel(), rr.ravel(), cc.ravel())):
            sums = np.bincount(flat, weights=comp, minlength=len(centers))
            centers[occupied, j] = sums[occupied] / counts[occupied]
    labels = enforce_connectivity(labels)
    return summarize_labels(labels)


def summarize_labels(labels):
    """Wrap a dense label image into a SuperpixelMap with centroids."""
    labels = np.asarray(labels)
    n = int(labels.max()) + 1
    flat = labels.ravel()
    sizes = np.bincount(flat, minlength=n)
    if np.any(sizes == 0):
        raise ValueError("label image has empty labels; relabel first")
    rr, cc = np.mgrid[0:labels.shape[0], 0:labels.shape[1]]
    centroids = np.column_stack([
        np.bincount(flat, weights=rr.ravel(), minlength=n) / sizes,
        np.bincount(flat, weights=cc.ravel(), minlength=n) / sizes])
    return SuperpixelMap(labels=labels, n_superpixels=n,
                         centroids=centroids, sizes=sizes)


def enforce_connectivity(labels):
    """Merge small connected components into their largest neighbor.

    Any 4-connected component smaller than a quarter of the mean region
    area is absorbed by the adjacent component with the largest current
    area, repeatedly, until every region passes or has no neighbor; the
    result is relabeled onto a dense [0, K) range.
    """
    labels = np.asarray(labels)
    values = np.unique(labels)
    min_size = labels.size / len(values) / 4.0
    # split every label into its 4-connected components
    comp = np.full(labels.shape, -1, dtype=np.int64)
    orig = []
    n_comp = 0
    for v in values.tolist():
        cc, n = ndimage.label(labels == v, structure=FOUR_CONNECTED)
        comp[cc > 0] = n_comp + cc[cc > 0] - 1
        orig.extend([v] * n)
        n_comp += n
    sizes = np.bincount(comp.ravel(), minlength=n_comp).astype(np.int64)
    # component adjacency from horizontal and vertical pixel neighbors
    adj = [set() for _ in range(n_comp)]
    for a, b in ((comp[:, :-1], comp[:, 1:]), (comp[:-1, :], comp[1:, :])):
        edge = a != b
        for x, y in zip(a[edge].ravel().tolist(), b[edge].ravel().tolist()):
            adj[x].add(y)
            adj[y].add(x)
    parent = list(range(n_comp))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    merged = True
    while merged:
        merged = False
        roots = sorted({find(i) for i in range(n_comp)},
                       key=lambda r: (sizes[r], r))
        for r in roots:
            if find(r) != r or sizes[r] >= min_size:
                continue
            neigh = {find(x) for x in adj[r]} - {r}
            if not neigh:
                continue
            target = max(neigh, key=lambda t: (sizes[t], -t))
            parent[r] = target
            sizes[target] += sizes[r]
            adj[target] |= adj[r]
            merged = True
    final = np.array([find(i) for i in range(n_comp)])
    _, dense = np.unique(final, return_inverse=True)
    return dense[comp]


def aggregate(features, sp):
    """Average per-pixel features within each superpixel.

    Returns a FeatureMatrix whose point s is the mean feature vector of
    superpixel s and whose coordinate is the region centroid.
    """
    if features.values.shape[:2] != sp.labels.shape:
        raise ValueError("feature map and label image dimensions differ")
    n = sp.n_superpixels
    flat = sp.labels.ravel()
    onehot = sparse.csr_array(
        (np.ones(flat.size), (flat, np.arange(flat.size))),
        shape=(n, flat.size))
    sums = onehot @ features.values.reshape(flat.size, features.dim)
    means = sums / sp.sizes[:, None]
    return FeatureMatrix(points=means, coords=sp.centroids.copy())


def project_to_pixels(values, sp):
    """Paint one scalar per superpixel back onto the pixel grid."""
    values = np.asarray(values, dtype=float)
    if values.shape != (sp.n_superpixels,):
        raise ValueError("need exactly one value per superpixel")
    return values[sp.labels]
