"""End-to-end severity estimation for a single in-memory image."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .background import LeafMask, LeafStages, leaf_stages
from .config import PipelineConfig
from .enhance import GammaDecision, enhance_contrast
from .imaging import as_raster, rgb_to_yuv
from .segment import (DamageMask, DegenerateChannel, FcmResult, bin_values,
                      classify_damage, fcm_cluster_hist, v_histogram)
from .severity import SeverityReport, estimate_severity


@dataclass
class LeafAnalysis:
    status: str
    gamma: GammaDecision
    enhanced: np.ndarray
    stages: LeafStages | None = None
    leaf: LeafMask | None = None
    fcm: FcmResult | None = None
    damage: DamageMask | None = None
    severity: SeverityReport | None = None
    timings_ms: dict[str, float] = field(default_factory=dict)


def assess_leaf(enhanced, leaf: LeafMask, config: PipelineConfig = PipelineConfig()
                ) -> tuple[FcmResult | None, DamageMask]:
    """Cluster the leaf's V values and label its damaged pixels.

    Returns ``(None, empty mask)`` for a leaf whose V channel holds a
    single quantized value.
    """
    _, _, v = rgb_to_yuv(enhanced)
    hist = v_histogram(v[leaf.mask])
    try:
        fcm = fcm_cluster_hist(hist, config.fcm, values=bin_values())
    except DegenerateChannel:
        return None, classify_damage(v, leaf, None)
    return fcm, classify_damage(v, leaf, fcm, m=config.fcm.m, rule=config.damage)


def analyze(img, config: PipelineConfig = PipelineConfig()) -> LeafAnalysis:
    """Enhance, isolate the leaf, cluster V and estimate severity.

    `status` is ``ok``, ``degenerate_channel`` (single V value, reported as
    0% severity) or ``no_foreground`` (no leaf found; severity is None).
    """
    img = as_raster(img)
    if img.ndim == 2:
        img = np.repeat(img[..., None], 3, axis=2)
    timings = {}
    t0 = time.perf_counter()

    def lap(name):
        nonlocal t0
        now = time.perf_counter()
        timings[name] = (now - t0) * 1e3
        t0 = now

    enhanced, decision = enhance_contrast(img, config.gamma_override, config.gamma_min, config.gamma_max)
    lap("enhance")
    stages = leaf_stages(enhanced, config.background)
    lap("background")
    result = LeafAnalysis("no_foreground", decision, enhanced, stages, timings_ms=timings)
    final = stages.final
    if final is None or final.sum() < max(config.background.min_leaf_fraction * final.size, 1):
        return result
    leaf = LeafMask(final)
    fcm, damage = assess_leaf(enhanced, leaf, config)
    lap("segment")
    sev = estimate_severity(damage, leaf)
    sev = SeverityReport(
        sev.leaf_pixels, sev.damaged_pixels, sev.severity_percent,
        gamma_used=decision.gamma_clamped,
        fcm_centers=None if fcm is None else (float(fcm.centers[0]), float(fcm.centers[1])),
        fcm_iterations=None if fcm is None else fcm.iterations,
    )
    lap("severity")
    result.status = "ok" if fcm is not None else "degenerate_channel"
    result.leaf, result.fcm, result.damage, result.severity = leaf, fcm, damage, sev
    return result

