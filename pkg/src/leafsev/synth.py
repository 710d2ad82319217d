"""Seeded synthetic leaf photographs with exact ground-truth masks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

LEAF_GREEN = (45, 110, 40)
LESION_ORANGE = (215, 140, 35)
BACKGROUND_KINDS = ("uniform", "two-tone", "foliage-noise")


class InfeasibleSpec(ValueError):
    pass


@dataclass(frozen=True)
class SynthSpec:
    width: int = 512
    height: int = 512
    axes: tuple[float, float] = (0.42, 0.27)    # semi-axes as fractions of width, height
    rotation: float = 20.0                       # degrees
    center: tuple[float, float] = (0.5, 0.5)
    leaf_color: tuple[int, int, int] = LEAF_GREEN
    lesion_color: tuple[int, int, int] = LESION_ORANGE
    jitter: int = 12
    damage_fraction: float = 0.0
    lesion_radius: tuple[float, float] = (0.02, 0.06)   # fraction of the shorter image side
    seed: int = 0
    background: str = "two-tone"
    brightness: float = 1.0

    def __post_init__(self):
        if self.width < 8 or self.height < 8:
            raise InfeasibleSpec("image must be at least 8x8")
        if not 0.0 <= self.damage_fraction <= 0.9:
            raise InfeasibleSpec("damage_fraction must lie in [0, 0.9]")
        if self.background not in BACKGROUND_KINDS:
            raise InfeasibleSpec(f"background must be one of {BACKGROUND_KINDS}")
        if self.brightness <= 0:
            raise InfeasibleSpec("brightness must be positive")


@dataclass
class SynthLeaf:
    image: np.ndarray
    leaf: np.ndarray
    damage: np.ndarray

    @property
    def leaf_pixels(self) -> int:
        return int(self.leaf.sum())

    @property
    def damaged_pixels(self) -> int:
        return int(self.damage.sum())

    @property
    def damage_fraction(self) -> float:
        return self.damaged_pixels / self.leaf_pixels

    @property
    def leaf_area_fraction(self) -> float:
        return self.leaf_pixels / self.leaf.size


def axes_for_area(fraction: float, aspect: float = 0.65) -> tuple[float, float]:
    """Semi-axes (as image fractions) of an ellipse covering `fraction` of the frame.

    The area is that of the unclipped ellipse; keep the major semi-axis under
    0.5 (raise `aspect` for large fractions) or the frame will cut it.
    """
    ax = np.sqrt(fraction / (np.pi * aspect))
    return float(ax), float(ax * aspect)


def ellipse_mask(spec: SynthSpec) -> np.ndarray:
    h, w = spec.height, spec.width
    yy, xx = np.mgrid[0:h, 0:w]
    cx, cy = spec.center[0] * w, spec.center[1] * h
    ax, ay = spec.axes[0] * w, spec.axes[1] * h
    t = np.deg2rad(spec.rotation)
    dx, dy = xx + 0.5 - cx, yy + 0.5 - cy
    u = dx * np.cos(t) + dy * np.sin(t)
    v = -dx * np.sin(t) + dy * np.cos(t)
    return (u / ax) ** 2 + (v / ay) ** 2 <= 1.0


def _jittered(color, shape, jitter, rng) -> np.ndarray:
    base = np.asarray(color, dtype=np.float64)
    noise = rng.integers(-jitter, jitter + 1, size=shape + (3,)) if jitter else 0
    return base + noise


def _background(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    h, w = spec.height, spec.width
    if spec.background == "uniform":
        return _jittered((125, 95, 70), (h, w), 4, rng)
    if spec.background == "two-tone":
        block = 16
        cells = rng.random(((h + block - 1) // block, (w + block - 1) // block)) < 0.5
        tiles = np.kron(cells, np.ones((block, block), dtype=bool))[:h, :w]
        dark = _jittered((95, 72, 55), (h, w), 6, rng)
        light = _jittered((150, 118, 88), (h, w), 6, rng)
        return np.where(tiles[..., None], light, dark)
    # foliage-noise: smooth random field between bark brown and a gray-olive shade
    field = ndimage.gaussian_filter(rng.standard_normal((h, w)), sigma=max(h, w) / 40)
    field = (field - field.min()) / (np.ptp(field) or 1.0)
    lo = np.array([70.0, 58.0, 48.0])
    hi = np.array([150.0, 140.0, 120.0])
    return lo + field[..., None] * (hi - lo) + rng.integers(-8, 9, size=(h, w, 3))


def _carve_lesions(leaf: np.ndarray, spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    damage = np.zeros_like(leaf)
    n_leaf = int(leaf.sum())
    target = spec.damage_fraction * n_leaf
    tol = 0.01 * n_leaf
    if target == 0:
        return damage
    if tol < 1:
        raise InfeasibleSpec(f"leaf of {n_leaf} px too small to hit the damage fraction within 1%")
    ys, xs = np.nonzero(leaf)
    side = min(spec.height, spec.width)
    rmin = max(1.0, spec.lesion_radius[0] * side)
    rmax = max(rmin, spec.lesion_radius[1] * side)
    count = 0
    for _ in range(100_000):
        if count >= target - tol:
            break
        i = rng.integers(ys.size)
        cy, cx = ys[i], xs[i]
        r = rng.uniform(rmin, rmax)
        while True:
            ri = int(np.ceil(r))
            y0, y1 = max(cy - ri, 0), min(cy + ri + 1, spec.height)
            x0, x1 = max(cx - ri, 0), min(cx + ri + 1, spec.width)
            yy, xx = np.mgrid[y0:y1, x0:x1]
            spot = ((yy - cy) ** 2 + (xx - cx) ** 2 <= r * r) & leaf[y0:y1, x0:x1]
            added = int((spot & ~damage[y0:y1, x0:x1]).sum())
            if count + added <= target + tol or r <= 1.0:
                break
            r = max(1.0, r * 0.7)
        if count + added > target + tol:
            continue
        damage[y0:y1, x0:x1] |= spot
        count += added
    if abs(count - target) > tol:
        raise InfeasibleSpec("could not place lesions to reach the requested damage fraction")
    return damage


def generate(spec: SynthSpec) -> SynthLeaf:
    """Render a leaf ellipse with circular lesions over a background.

    Truth masks come straight from the rasterizer; the brightness scale is
    applied to the composite before 8-bit clamping.
    """
    rng = np.random.default_rng(spec.seed)
    leaf = ellipse_mask(spec)
    if not leaf.any():
        raise InfeasibleSpec("leaf ellipse covers no pixels")
    damage = _carve_lesions(leaf, spec, rng)
    shape = (spec.height, spec.width)
    img = _background(spec, rng)
    img = np.where(leaf[..., None], _jittered(spec.leaf_color, shape, spec.jitter, rng), img)
    img = np.where(damage[..., None], _jittered(spec.lesion_color, shape, spec.jitter, rng), img)
    img = np.clip(np.rint(img * spec.brightness), 0, 255).astype(np.uint8)
    return SynthLeaf(img, leaf, damage)
