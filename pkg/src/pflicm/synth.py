"""Synthetic seafloor-like texture generators.

Stand-ins for real sonar scenes: an oriented sinusoidal ripple field, a
low-variance flat bed, and a high-variance rocky speckle, plus a
composite that bands two or three of them together and can inject a
bright outlier blob.  Every generator is driven by a seeded RNG, so a
given (kind, size, seed) always produces bit-identical output.
"""

import math
from dataclasses import dataclass

import numpy as np

KINDS = ("ripple", "flat", "rock-noise", "composite")


@dataclass
class SyntheticScene:
    """Image in [0, 1] with per-pixel texture labels and outlier mask."""

    image: np.ndarray
    labels: np.ndarray
    outlier_mask: np.ndarray


def _grid(rows, cols):
    return np.mgrid[0:rows, 0:cols].astype(float)


def ripple(rows, cols, rng, wavelength=12.0, angle=30.0, amplitude=0.3,
           noise=0.04):
    """Oriented sinusoid plus Gaussian noise."""
    rr, cc = _grid(rows, cols)
    theta = math.radians(angle)
    phase = (math.cos(theta) * cc + math.sin(theta) * rr) / wavelength
    img = 0.5 + amplitude * np.sin(2.0 * math.pi * phase)
    img += noise * rng.standard_normal((rows, cols))
    return np.clip(img, 0.0, 1.0)


def flat(rows, cols, rng, level=0.5, noise=0.03):
    """Low-variance noise around mid-gray."""
    img = level + noise * rng.standard_normal((rows, cols))
    return np.clip(img, 0.0, 1.0)


def rock_noise(rows, cols, rng, level=0.45, noise=0.18, blob_density=1e-3):
    """High-variance speckle with bright salt blobs."""
    img = level + noise * rng.standard_normal((rows, cols))
    rr, cc = _grid(rows, cols)
    for _ in range(max(int(rows * cols * blob_density), 1)):
        r0 = rng.uniform(0, rows)
        c0 = rng.uniform(0, cols)
        rad = rng.uniform(1.5, 3.5)
        img[(rr - r0) ** 2 + (cc - c0) ** 2 <= rad * rad] = 0.95
    return np.clip(img, 0.0, 1.0)


_TEXTURES = {"ripple": ripple, "flat": flat, "rock-noise": rock_noise}


def composite(rows, cols, rng, kinds=("ripple", "flat"),
              orientation="vertical", outlier=False, outlier_radius=6.0,
              boundary_margin=16):
    """Band two or three textures side by side, optionally with a bright
    outlier blob placed well inside the first band."""
    if not 2 <= len(kinds) <= 3:
        raise ValueError("composite takes two or three texture kinds")
    if orientation not in ("vertical", "diagonal"):
        raise ValueError("orientation must be vertical or diagonal")
    rr, cc = _grid(rows, cols)
    proj = cc if orientation == "vertical" else (rr + cc) / 2.0
    span = proj.max() + 1.0
    band = np.minimum((proj / span * len(kinds)).astype(int), len(kinds) - 1)
    image = np.zeros((rows, cols))
    for i, kind in enumerate(kinds):
        image[band == i] = _TEXTURES[kind](rows, cols, rng)[band == i]
    mask = np.zeros((rows, cols), dtype=bool)
    if outlier:
        # keep the blob edge boundary_margin - outlier_radius pixels
        # clear of the first band boundary and fully inside the image
        band_end = span / len(kinds)
        lo = outlier_radius + 2.0
        hi_c = band_end - boundary_margin
        if hi_c <= lo or rows <= 2 * lo:
            raise ValueError("band too narrow for an interior outlier")
        r0 = rng.uniform(lo, rows - lo)
        c0 = rng.uniform(lo, hi_c) if orientation == "vertical" else \
            rng.uniform(lo, min(hi_c, cols - lo))
        mask = (rr - r0) ** 2 + (cc - c0) ** 2 <= outlier_radius ** 2
        image[mask] = 1.0
    return image, band, mask


def generate(kind, rows, cols, seed, **params):
    """Generate a named synthetic scene (see KINDS) of at least 64x64."""
    if rows < 64 or cols < 64:
        raise ValueError("synthetic scenes must be at least 64x64")
    if kind not in KINDS:
        raise ValueError(f"unknown texture kind {kind!r}")
    rng = np.random.default_rng(seed)
    if kind == "composite":
        image, labels, mask = composite(rows, cols, rng, **params)
    else:
        image = _TEXTURES[kind](rows, cols, rng, **params)
        labels = np.zeros((rows, cols), dtype=int)
        mask = np.zeros((rows, cols), dtype=bool)
    return SyntheticScene(image=image, labels=labels.astype(np.int64),
                          outlier_mask=mask)
