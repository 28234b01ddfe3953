"""Per-pixel texture descriptors for grayscale images.

Images are plain 2-D float arrays with intensities in [0, 1] (8-bit files
are scaled by 1/255 on load).  Three descriptors are computed per pixel
and concatenated: a directional edge-label histogram from thresholded
Sobel responses, a small sliding-window histogram-of-oriented-gradients,
and a local-binary-pattern code histogram.  All windowed statistics
replicate the border pixels, so every pixel gets a full-size descriptor.
"""

from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy import ndimage

from .clustering import FeatureMatrix

# directional kernels, in histogram-bin order: vertical edges, 45-degree
# diagonal, horizontal edges, 135-degree anti-diagonal; bin 4 is "no edge"
SOBEL_KERNELS = (
    np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]]),
    np.array([[0.0, 1.0, 2.0], [-1.0, 0.0, 1.0], [-2.0, -1.0, 0.0]]),
    np.array([[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]]),
    np.array([[-2.0, -1.0, 0.0], [-1.0, 0.0, 1.0], [0.0, 1.0, 2.0]]),
)

# 8-neighbor offsets clockwise from the top-left corner; the first
# neighbor gets the most significant bit
LBP_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, 1),
               (1, 1), (1, 0), (1, -1), (0, -1))


@dataclass
class PixelFeatureMap:
    """Dense per-pixel feature vectors with the concatenation layout.

    ``values`` is (rows, cols, dim) and ``block_dims`` records how many
    of those dimensions came from each descriptor, in order
    (edge histogram, oriented gradients, binary patterns).
    """

    values: np.ndarray
    block_dims: tuple

    def __post_init__(self):
        if self.values.ndim != 3:
            raise ValueError("values must be (rows, cols, dim)")
        if sum(self.block_dims) != self.values.shape[2]:
            raise ValueError("block_dims must sum to the feature dimension")

    @property
    def rows(self):
        return self.values.shape[0]

    @property
    def cols(self):
        return self.values.shape[1]

    @property
    def dim(self):
        return self.values.shape[2]


def validate_image(img):
    """Check an intensity image: 2-D, finite, values in [0, 1]."""
    img = np.asarray(img, dtype=float)
    if img.ndim != 2 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("image must be a nonempty 2-D array")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite intensities")
    if img.min() < 0.0 or img.max() > 1.0:
        raise ValueError("intensities must lie in [0, 1]")
    return img


def sobel_edge_histogram(img, window=17, threshold=0.5):
    """Windowed histogram of dominant edge-direction labels.

    Each pixel is labeled with the direction whose Sobel response has the
    largest magnitude, or "no edge" when that magnitude falls below the
    threshold; the feature is the 5-bin label histogram over the
    surrounding window, normalized to sum to 1.
    """
    img = validate_image(img)
    if window < 3 or window % 2 == 0:
        raise ValueError("window must be odd and >= 3")
    if window > min(img.shape):
        raise ValueError("window larger than image")
    responses = np.stack([
        np.abs(ndimage.correlate(img, k, mode="nearest"))
        for k in SOBEL_KERNELS])
    labels = responses.argmax(axis=0)
    labels[responses.max(axis=0) < threshold] = 4
    hist = np.empty(img.shape + (5,))
    for v in range(5):
        hist[:, :, v] = ndimage.uniform_filter(
            (labels == v).astype(float), size=window, mode="nearest")
    return np.clip(hist, 0.0, None)


def _orientation_mass(img, bins):
    """Gradient magnitude split linearly between the two nearest
    orientation bins (unsigned angles, bin centers at k*180/bins)."""
    p = np.pad(img, 1, mode="edge")
    gc = (p[1:-1, 2:] - p[1:-1, :-2]) / 2.0
    gr = (p[2:, 1:-1] - p[:-2, 1:-1]) / 2.0
    mag = np.hypot(gr, gc)
    pos = (np.degrees(np.arctan2(gr, gc)) % 180.0) / (180.0 / bins)
    j0 = np.floor(pos).astype(int) % bins
    frac = pos - np.floor(pos)
    flat = np.zeros((img.size, bins))
    ar = np.arange(img.size)
    flat[ar, j0.ravel()] = (mag * (1.0 - frac)).ravel()
    flat[ar, (j0.ravel() + 1) % bins] += (mag * frac).ravel()
    return flat.reshape(img.shape + (bins,))


def hog_features(img, cell=2, cells_per_block=2, block_overlap=1, bins=9,
                 window=5, norm_eps=1e-6):
    """Sliding-window histogram of oriented gradients, one fixed-length
    vector per pixel.

    Within the window centered on a pixel, cell*cell-pixel cells
    accumulate magnitude-weighted orientation histograms; blocks of
    cells_per_block^2 cells (shifted by block size minus the overlap)
    are L2-normalized and concatenated.  The defaults fit exactly one
    2x2-cell block into the 5x5 window, giving 36 values per pixel.
    """
    img = validate_image(img)
    rows, cols = img.shape
    if window > min(rows, cols):
        raise ValueError("image smaller than the sliding window")
    block_px = cell * cells_per_block
    stride = block_px - block_overlap
    if stride < 1 or block_px > window:
        raise ValueError("block geometry does not fit the window")
    n_blocks = (window - block_px) // stride + 1
    mass = _orientation_mass(img, bins)
    pad = window
    padded = np.pad(mass, ((pad, pad), (pad, pad), (0, 0)), mode="edge")
    # cell_sum[i, j] = mass summed over the cell with top-left (i, j)
    hp, wp = padded.shape[:2]
    cell_sum = np.zeros((hp - cell + 1, wp - cell + 1, bins))
    for di, dj in product(range(cell), range(cell)):
        cell_sum += padded[di:di + hp - cell + 1, dj:dj + wp - cell + 1]
    half = window // 2
    blocks = []
    for bi, bj in product(range(n_blocks), range(n_blocks)):
        cells = []
        for ci, cj in product(range(cells_per_block), range(cells_per_block)):
            r0 = pad - half + bi * stride + ci * cell
            c0 = pad - half + bj * stride + cj * cell
            cells.append(cell_sum[r0:r0 + rows, c0:c0 + cols])
        block = np.concatenate(cells, axis=2)
        norm = np.sqrt((block * block).sum(axis=2) + norm_eps ** 2)
        blocks.append(block / norm[:, :, None])
    return np.concatenate(blocks, axis=2)


def lbp_codes(img):
    """8-neighbor binary-pattern code per pixel (0..255); a bit is set
    when the neighbor is >= the center, most significant bit at the
    top-left neighbor, proceeding clockwise."""
    img = validate_image(img)
    p = np.pad(img, 1, mode="edge")
    rows, cols = img.shape
    codes = np.zeros(img.shape, dtype=np.int64)
    for i, (dr, dc) in enumerate(LBP_OFFSETS):
        bit = p[1 + dr:1 + dr + rows, 1 + dc:1 + dc + cols] >= img
        codes |= bit.astype(np.int64) << (7 - i)
    return codes


def lbp_features(img, cell=3):
    """Local-binary-pattern code histogram over each pixel's cell,
    normalized to sum to 1 (256 bins)."""
    img = validate_image(img)
    if min(img.shape) < 3:
        raise ValueError("image must be at least 3x3")
    if cell < 1 or cell % 2 == 0:
        raise ValueError("cell must be odd and >= 1")
    codes = lbp_codes(img)
    hist = np.empty(img.shape + (256,))
    for v in range(256):
        hist[:, :, v] = ndimage.uniform_filter(
            (codes == v).astype(float), size=cell, mode="nearest")
    return np.clip(hist, 0.0, None)


def assemble_features(sobel, hog, lbp):
    """Concatenate the three descriptor maps into one PixelFeatureMap."""
    parts = [np.asarray(p) for p in (sobel, hog, lbp)]
    shape = parts[0].shape[:2]
    if any(p.shape[:2] != shape for p in parts):
        raise ValueError("descriptor maps disagree on image dimensions")
    values = np.concatenate(parts, axis=2)
    return PixelFeatureMap(values=values,
                           block_dims=tuple(p.shape[2] for p in parts))


def normalize_features(matrix, sd_floor=1e-12):
    """Z-score each feature dimension across the points; dimensions with
    (population) standard deviation below the floor become all zeros."""
    pts = matrix.points
    mu = pts.mean(axis=0)
    sd = pts.std(axis=0)
    degenerate = sd < sd_floor
    scaled = (pts - mu) / np.where(degenerate, 1.0, sd)
    scaled[:, degenerate] = 0.0
    return FeatureMatrix(points=scaled, coords=matrix.coords.copy())
