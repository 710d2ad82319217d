"""Foreground leaf extraction.

The chain is: Lab salience on a binomial-blurred image, mean-valued
threshold, Canny edge fusion, largest-component selection, disk opening and
hole filling. The resulting mask zeroes everything outside the leaf.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .imaging import as_raster, binomial_blur5, rgb_to_lab, to_gray


class EmptyMask(ValueError):
    """No foreground pixel to select from."""


class NoForeground(RuntimeError):
    """The leaf could not be isolated from the background."""


@dataclass(frozen=True)
class BackgroundParams:
    canny_sigma: float = 1.4
    canny_low_pct: float = 0.70
    canny_high_pct: float = 0.90
    disk_radius: int = 5
    a_exponent: int = 4
    min_leaf_fraction: float = 0.005

    def __post_init__(self):
        if not 0 < self.canny_low_pct < self.canny_high_pct < 1:
            raise ValueError("need 0 < canny_low_pct < canny_high_pct < 1")
        if self.disk_radius < 1:
            raise ValueError("disk_radius must be >= 1")
        if self.a_exponent not in (2, 4):
            raise ValueError("a_exponent must be 2 or 4")
        if self.canny_sigma <= 0:
            raise ValueError("canny_sigma must be positive")
        if not 0 <= self.min_leaf_fraction < 1:
            raise ValueError("min_leaf_fraction must lie in [0, 1)")


@dataclass(frozen=True)
class LeafMask:
    mask: np.ndarray

    @property
    def pixels(self) -> int:
        return int(np.count_nonzero(self.mask))


@dataclass
class LeafStages:
    """Intermediate products of :func:`extract_leaf`, kept for debugging."""
    salience: np.ndarray
    threshold: np.ndarray
    edges: np.ndarray
    fused: np.ndarray | None = None
    final: np.ndarray | None = None
    extra: dict = field(default_factory=dict)


EIGHT = np.ones((3, 3), dtype=bool)


def lab_salience(L, a, b, a_exponent: int = 4) -> np.ndarray:
    """Salience of Lab channels against their global means."""
    out = np.zeros(np.shape(L), dtype=np.float64)
    for chan, power in ((L, 2), (a, a_exponent), (b, 2)):
        chan = np.asarray(chan, dtype=np.float64)
        dev = chan.mean() - binomial_blur5(chan)
        # rounding residue on flat channels must not register as salience
        dev[np.abs(dev) < 1e-9] = 0.0
        out += dev ** power
    return out


def salience_map(img, a_exponent: int = 4) -> np.ndarray:
    return lab_salience(*rgb_to_lab(as_raster(img, channels=3)), a_exponent=a_exponent)


def adaptive_threshold(sal) -> np.ndarray:
    sal = np.asarray(sal, dtype=np.float64)
    return sal > sal.mean()


def _nonmax_suppress(mag: np.ndarray, gy: np.ndarray, gx: np.ndarray) -> np.ndarray:
    # quantize gradient direction to 0, 45, 90, 135 degrees
    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    sector = (np.floor((angle + 22.5) / 45.0).astype(int)) % 4
    p = np.pad(mag, 1, mode="constant")
    h, w = mag.shape

    def shifted(dy, dx):
        return p[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]

    # (before, after) neighbor offsets along the gradient, rows grow downward
    offsets = {0: ((0, -1), (0, 1)), 1: ((-1, -1), (1, 1)), 2: ((-1, 0), (1, 0)), 3: ((-1, 1), (1, -1))}
    keep = np.zeros_like(mag, dtype=bool)
    for s, (before, after) in offsets.items():
        # strict on one side only, so a plateau two pixels wide yields one line
        local = (mag > shifted(*before)) & (mag >= shifted(*after))
        keep |= (sector == s) & local
    return keep & (mag > 0)


def canny_edges(gray, params: BackgroundParams = BackgroundParams()) -> np.ndarray:
    """Canny detector with percentile-based hysteresis thresholds."""
    g = as_raster(gray, channels=1).astype(np.float64)
    smooth = ndimage.gaussian_filter(g, params.canny_sigma, mode="nearest")
    gy = ndimage.sobel(smooth, axis=0, mode="nearest")
    gx = ndimage.sobel(smooth, axis=1, mode="nearest")
    mag = np.hypot(gx, gy)
    # flat regions carry float residue from the smoothing; treat it as zero
    mag[mag < 1e-9 * max(1.0, g.max())] = 0.0
    nonzero = mag[mag > 0]
    if nonzero.size == 0:
        return np.zeros(g.shape, dtype=bool)
    low, high = np.quantile(nonzero, [params.canny_low_pct, params.canny_high_pct])
    thin = _nonmax_suppress(mag, gy, gx)
    weak = thin & (mag >= low)
    strong = thin & (mag >= high)
    labels, n = ndimage.label(weak, structure=EIGHT)
    if n == 0:
        return np.zeros(g.shape, dtype=bool)
    linked = np.zeros(n + 1, dtype=bool)
    linked[np.unique(labels[strong])] = True
    linked[0] = False
    return linked[labels]


def _check_same_shape(*masks):
    shapes = {np.shape(m) for m in masks}
    if len(shapes) != 1:
        raise ValueError(f"mask dimensions differ: {sorted(shapes)}")


def binary_close(mask, structure=EIGHT) -> np.ndarray:
    """Closing computed on a zero-padded canvas so it stays extensive at borders."""
    mask = np.asarray(mask, dtype=bool)
    pad = max(structure.shape) // 2 * 2
    p = np.pad(mask, pad, mode="constant")
    closed = ndimage.binary_closing(p, structure=structure)
    return closed[pad:-pad, pad:-pad] | mask


def fuse_masks(thresh, edges) -> np.ndarray:
    _check_same_shape(thresh, edges)
    return binary_close(np.asarray(thresh, bool) | np.asarray(edges, bool))


def largest_component(mask) -> np.ndarray:
    """Keep the 8-connected component with the most pixels (first on ties)."""
    mask = np.asarray(mask, dtype=bool)
    labels, n = ndimage.label(mask, structure=EIGHT)
    if n == 0:
        raise EmptyMask("mask has no foreground pixels")
    areas = np.bincount(labels.ravel())
    areas[0] = 0
    return labels == int(np.argmax(areas))


def disk(radius: int) -> np.ndarray:
    r = int(radius)
    yy, xx = np.mgrid[-r:r + 1, -r:r + 1]
    return xx * xx + yy * yy <= r * r


def morph_refine(mask, disk_radius: int = 5) -> np.ndarray:
    """Morphological opening (erode, then dilate) with a Euclidean disk."""
    if disk_radius < 1:
        raise ValueError("disk_radius must be >= 1")
    mask = np.asarray(mask, dtype=bool)
    se = disk(disk_radius)
    eroded = ndimage.binary_erosion(mask, structure=se, border_value=0)
    return ndimage.binary_dilation(eroded, structure=se, border_value=0)


def fill_holes(mask) -> np.ndarray:
    """Fill background regions not 4-connected to the image border."""
    return ndimage.binary_fill_holes(np.asarray(mask, dtype=bool))


def check_leaf_mask(mask, min_pixels: int = 1) -> None:
    """Raise AssertionError unless `mask` is one 8-connected blob without holes."""
    mask = np.asarray(mask, dtype=bool)
    _, n = ndimage.label(mask, structure=EIGHT)
    if n != 1:
        raise AssertionError(f"leaf mask has {n} components")
    if np.any(fill_holes(mask) & ~mask):
        raise AssertionError("leaf mask has enclosed holes")
    if mask.sum() < min_pixels:
        raise AssertionError("leaf mask below minimum size")


def leaf_stages(img, params: BackgroundParams = BackgroundParams()) -> LeafStages:
    """Run the extraction chain, recording every intermediate mask.

    `final` is left as None when a stage empties the mask.
    """
    img = as_raster(img, channels=3)
    sal = salience_map(img, params.a_exponent)
    stages = LeafStages(sal, adaptive_threshold(sal), canny_edges(to_gray(img), params))
    stages.fused = fuse_masks(stages.threshold, stages.edges)
    try:
        m = largest_component(stages.fused)
        m = morph_refine(m, params.disk_radius)
        # the opening can split the blob
        m = largest_component(m)
    except EmptyMask:
        return stages
    stages.final = fill_holes(m)
    return stages


def extract_leaf(img, params: BackgroundParams = BackgroundParams()) -> tuple[np.ndarray, LeafMask]:
    """Return the image with its background zeroed, and the leaf mask."""
    img = as_raster(img, channels=3)
    final = leaf_stages(img, params).final
    if final is None:
        raise NoForeground("no foreground survived background removal")
    leaf = LeafMask(final)
    min_pixels = params.min_leaf_fraction * final.size
    if leaf.pixels < max(min_pixels, 1):
        raise NoForeground(f"leaf of {leaf.pixels} px is below the {min_pixels:.0f} px minimum")
    out = np.where(final[..., None], img, np.uint8(0))
    return out, leaf
