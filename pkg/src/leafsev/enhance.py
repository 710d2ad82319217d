"""LUT gamma correction with automatic gamma selection from mean gray level."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import as_raster, mean_intensity, to_gray

MAX_INTENSITY = 255
GAMMA_MIN = 0.1
GAMMA_MAX = 10.0
_MID_EPS = 1e-9


@dataclass(frozen=True)
class GammaLut:
    gamma: float
    table: np.ndarray

    def __post_init__(self):
        self.table.setflags(write=False)


@dataclass(frozen=True)
class GammaDecision:
    i_avg: float
    r: float
    gamma_raw: float
    gamma_clamped: float


def gamma_from_ratio(r: float) -> float:
    """Piecewise gamma rule on the normalized mean intensity `r`."""
    if abs(r - 0.5) <= _MID_EPS:
        return 1.0
    if r > 0.5:
        return 10.0 * r - 4.0
    return r ** 0.1 - 0.4


def auto_gamma(gray, gamma_min: float = GAMMA_MIN, gamma_max: float = GAMMA_MAX) -> GammaDecision:
    i_avg = mean_intensity(gray)
    r = i_avg / MAX_INTENSITY
    raw = gamma_from_ratio(r)
    return GammaDecision(i_avg, r, raw, float(min(max(raw, gamma_min), gamma_max)))


def build_lut(gamma: float) -> GammaLut:
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    v = np.arange(MAX_INTENSITY + 1, dtype=np.float64)
    t = MAX_INTENSITY * (v / MAX_INTENSITY) ** (1.0 / gamma)
    table = np.clip(np.floor(t + 0.5), 0, MAX_INTENSITY).astype(np.uint8)
    return GammaLut(float(gamma), table)


def apply_lut(img, lut: GammaLut) -> np.ndarray:
    """Remap every sample through the table (channels independently)."""
    return lut.table[as_raster(img)]


def enhance_contrast(
    img,
    gamma_override: float | None = None,
    gamma_min: float = GAMMA_MIN,
    gamma_max: float = GAMMA_MAX,
) -> tuple[np.ndarray, GammaDecision]:
    """Gamma-correct an RGB image using the gamma picked from its gray mean.

    With `gamma_override` the automatic decision is still computed and
    reported, but the override is what gets applied.
    """
    img = as_raster(img, channels=3)
    decision = auto_gamma(to_gray(img), gamma_min, gamma_max)
    if gamma_override is not None:
        if not gamma_override > 0:
            raise ValueError(f"gamma override must be positive, got {gamma_override}")
        decision = GammaDecision(decision.i_avg, decision.r, decision.gamma_raw, float(gamma_override))
    return apply_lut(img, build_lut(decision.gamma_clamped)), decision
