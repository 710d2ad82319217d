"""Infection severity as the damaged share of leaf pixels."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .background import LeafMask
from .segment import DamageMask


class EmptyLeaf(ValueError):
    pass


@dataclass(frozen=True)
class SeverityReport:
    leaf_pixels: int
    damaged_pixels: int
    severity_percent: float
    gamma_used: float | None = None
    fcm_centers: tuple[float, float] | None = None
    fcm_iterations: int | None = None

    @property
    def severity_text(self) -> str:
        return f"{self.severity_percent:.2f}%"


def severity_percent(damaged: int, leaf: int) -> float:
    if leaf <= 0:
        raise EmptyLeaf("leaf has no pixels")
    if not 0 <= damaged <= leaf:
        raise ValueError(f"damaged count {damaged} outside [0, {leaf}]")
    return 100.0 * damaged / leaf


def estimate_severity(damage: DamageMask, leaf: LeafMask) -> SeverityReport:
    leaf_mask = np.asarray(leaf.mask, dtype=bool)
    damage_mask = np.asarray(damage.mask, dtype=bool)
    if damage_mask.shape != leaf_mask.shape:
        raise ValueError("damage and leaf masks differ in shape")
    if np.any(damage_mask & ~leaf_mask):
        raise ValueError("damage mask extends outside the leaf")
    n_leaf = int(leaf_mask.sum())
    n_damage = int(damage_mask.sum())
    return SeverityReport(n_leaf, n_damage, severity_percent(n_damage, n_leaf))
