"""Cluster map construction, rendering, and cross-run cluster alignment.

A "map" is a per-cluster pixel image in [0, 1]: membership maps,
typicality maps, or their elementwise product.  Product maps combine the
relative membership with the absolute typicality, so an outlier that is
atypical of every cluster goes dark in all of them.
"""

from itertools import permutations

import numpy as np

from . import imageio
from .superpixels import project_to_pixels

MAP_KINDS = ("membership", "typicality", "product")


def product_values(memberships, typicalities):
    """Elementwise membership * typicality; bounded by both factors."""
    u = np.asarray(memberships)
    t = np.asarray(typicalities)
    if u.shape != t.shape:
        raise ValueError("membership and typicality shapes differ")
    return u * t


def cluster_values(state, kind):
    """Per-cluster per-point values of the requested kind (C, N)."""
    if kind == "membership":
        return state.memberships
    if kind == "typicality":
        return state.typicalities
    if kind == "product":
        return product_values(state.memberships, state.typicalities)
    raise ValueError(f"unknown map kind {kind!r}")


def cluster_pixel_maps(state, sp, kind):
    """Project one kind of per-superpixel values to pixel maps, one 2-D
    array per cluster."""
    vals = cluster_values(state, kind)
    return [project_to_pixels(vals[c], sp) for c in range(vals.shape[0])]


def quantize(values):
    """Map [0, 1] values to 8-bit gray levels, rounding halves up."""
    values = np.asarray(values, dtype=float)
    if values.min() < 0.0 or values.max() > 1.0:
        raise ValueError("map values must lie in [0, 1]")
    return np.floor(values * 255.0 + 0.5).astype(np.uint8)


def render_map(values, path):
    """Write a [0, 1] map as an 8-bit grayscale image (PGM or PNG)."""
    imageio.write_gray_u8(path, quantize(values))


def align_clusters(centers_ref, centers_other):
    """Permutation p minimizing sum_c ||ref[c] - other[p[c]]||^2.

    Exhaustive for up to 8 clusters, greedy closest-pair matching
    beyond.  Apply as other[p] to put the second run's clusters in the
    reference order.
    """
    ref = np.atleast_2d(np.asarray(centers_ref, dtype=float))
    oth = np.atleast_2d(np.asarray(centers_other, dtype=float))
    if ref.shape != oth.shape:
        raise ValueError("center sets must have identical shapes")
    c = ref.shape[0]
    cost = ((ref[:, None, :] - oth[None, :, :]) ** 2).sum(axis=2)
    if c <= 8:
        best = min(permutations(range(c)),
                   key=lambda p: sum(cost[i, p[i]] for i in range(c)))
        return np.array(best)
    perm = np.full(c, -1)
    open_cost = cost.copy()
    for _ in range(c):
        i, j = np.unravel_index(np.argmin(open_cost), open_cost.shape)
        perm[i] = j
        open_cost[i, :] = np.inf
        open_cost[:, j] = np.inf
    return perm


def hard_assignments(state, algorithm):
    """Per-point hard labels: argmax of the product values for the
    possibilistic algorithms, argmax membership for the others."""
    kind = "product" if algorithm in ("pflicm", "pfcm") else "membership"
    return cluster_values(state, kind).argmax(axis=0)
