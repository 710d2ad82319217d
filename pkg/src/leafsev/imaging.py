"""Image containers, color conversions and small pixel kernels.

Images are plain numpy arrays: ``uint8`` of shape ``(H, W)`` or ``(H, W, 3)``
for rasters, ``float64`` ``(H, W)`` for float maps and ``bool`` ``(H, W)`` for
masks. The helpers here validate and convert; nothing mutates its input.
"""
from __future__ import annotations

import logging
import warnings
from pathlib import Path

import numpy as np
from PIL import Image

log = logging.getLogger(__name__)

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])
U_SCALE = 0.492
V_SCALE = 0.877

# D65 reference white, 2 degree observer
D65_WHITE = np.array([0.95047, 1.0, 1.08883])
SRGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])

BINOMIAL5 = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0


class ImageError(ValueError):
    """Raised for arrays that are not valid rasters."""


def as_raster(img, channels: int | None = None) -> np.ndarray:
    """Validate `img` as an 8-bit raster and return it as a uint8 array."""
    arr = np.asarray(img)
    if arr.ndim == 2:
        nch = 1
    elif arr.ndim == 3 and arr.shape[2] == 3:
        nch = 3
    else:
        raise ImageError(f"expected (H, W) or (H, W, 3) array, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ImageError("image must be at least 1x1")
    if channels is not None and nch != channels:
        raise ImageError(f"expected a {channels}-channel image, got {nch} channel(s)")
    if arr.dtype != np.uint8:
        if np.issubdtype(arr.dtype, np.integer) and arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ImageError("samples must lie in [0, 255]")
        if not np.issubdtype(arr.dtype, np.integer):
            raise ImageError(f"expected an integer raster, got dtype {arr.dtype}")
        arr = arr.astype(np.uint8)
    return arr


def _round_half_up(x: np.ndarray) -> np.ndarray:
    # inputs here are non-negative, so floor(x + 0.5) rounds half away from zero
    return np.floor(x + 0.5)


def to_gray(img) -> np.ndarray:
    """BT.601 luma, rounded to the nearest integer."""
    rgb = as_raster(img, channels=3).astype(np.float64)
    y = rgb @ LUMA_WEIGHTS
    return np.clip(_round_half_up(y), 0, 255).astype(np.uint8)


def _srgb_decode(c: np.ndarray) -> np.ndarray:
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


def _lab_f(t: np.ndarray) -> np.ndarray:
    eps = (6.0 / 29.0) ** 3
    return np.where(t > eps, np.cbrt(t), t / (3 * (6.0 / 29.0) ** 2) + 4.0 / 29.0)


def rgb_to_lab(img) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """sRGB (D65) to CIELab. Returns the L, a and b float maps."""
    rgb = as_raster(img, channels=3).astype(np.float64) / 255.0
    xyz = _srgb_decode(rgb) @ SRGB_TO_XYZ.T
    f = _lab_f(xyz / D65_WHITE)
    L = 116.0 * f[..., 1] - 16.0
    a = 500.0 * (f[..., 0] - f[..., 1])
    b = 200.0 * (f[..., 1] - f[..., 2])
    return L, a, b


def rgb_to_yuv(img) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Analog BT.601 full-range YUV with signed float chroma."""
    rgb = as_raster(img, channels=3).astype(np.float64)
    y = rgb @ LUMA_WEIGHTS
    u = U_SCALE * (rgb[..., 2] - y)
    v = V_SCALE * (rgb[..., 0] - y)
    return y, u, v


def yuv_to_rgb(y, u, v) -> np.ndarray:
    """Inverse of :func:`rgb_to_yuv`, rounded and clamped to uint8."""
    y = np.asarray(y, dtype=np.float64)
    r = y + np.asarray(v, dtype=np.float64) / V_SCALE
    b = y + np.asarray(u, dtype=np.float64) / U_SCALE
    g = (y - LUMA_WEIGHTS[0] * r - LUMA_WEIGHTS[2] * b) / LUMA_WEIGHTS[1]
    rgb = np.stack([r, g, b], axis=-1)
    return np.clip(np.rint(rgb), 0, 255).astype(np.uint8)


def binomial_blur5(fmap) -> np.ndarray:
    """Separable [1, 4, 6, 4, 1]/16 blur with edge replication."""
    m = np.asarray(fmap, dtype=np.float64)
    if m.ndim != 2 or m.size == 0:
        raise ImageError("binomial_blur5 expects a non-empty 2-D map")
    h, w = m.shape
    p = np.pad(m, 2, mode="edge")
    rows = sum(k * p[:, i:i + w] for i, k in enumerate(BINOMIAL5))
    return sum(k * rows[i:i + h, :] for i, k in enumerate(BINOMIAL5))


def mean_intensity(gray) -> float:
    gray = as_raster(gray, channels=1)
    return int(gray.sum(dtype=np.int64)) / gray.size


def load_image(path) -> np.ndarray:
    """Read a PNG/JPEG file as a 1- or 3-channel uint8 array.

    Alpha channels are dropped with a warning. 16-bit and other exotic
    modes raise :class:`ImageError`.
    """
    with Image.open(path) as im:
        im.load()
        mode = im.mode
        if mode in ("RGBA", "LA", "PA") or (mode == "P" and "transparency" in im.info):
            warnings.warn(f"{path}: dropping alpha channel", stacklevel=2)
        if mode in ("L", "1"):
            im = im.convert("L")
        elif mode in ("LA",):
            im = im.convert("L")
        elif mode in ("RGB", "RGBA", "P", "PA", "CMYK", "YCbCr"):
            im = im.convert("RGB")
        else:
            raise ImageError(f"{path}: unsupported image mode {mode!r}")
        return np.array(im, dtype=np.uint8)


def save_image(path, img) -> None:
    """Write a raster or boolean mask (as 0/255) to PNG or JPEG by suffix."""
    arr = np.asarray(img)
    if arr.dtype == bool:
        arr = arr.astype(np.uint8) * 255
    arr = as_raster(arr)
    Image.fromarray(arr).save(Path(path))
