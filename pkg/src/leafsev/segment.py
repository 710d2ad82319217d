"""Two-cluster fuzzy c-means on leaf V-channel values and damage labeling.

Two solvers share the same fixed-point updates: :func:`fcm_cluster` works on
raw per-pixel values, :func:`fcm_cluster_hist` on a weighted 256-bin
histogram. On quantized data they agree to rounding error, so the histogram
path is what the pipeline uses.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .background import LeafMask
from .imaging import LUMA_WEIGHTS, V_SCALE

N_BINS = 256
# largest |V| an 8-bit RGB triple can produce
V_LIMIT = V_SCALE * (1 - LUMA_WEIGHTS[0]) * 255.0


class DegenerateChannel(ValueError):
    """Fewer than two distinct values: nothing to cluster."""


@dataclass(frozen=True)
class FcmParams:
    m: float = 2.0
    tolerance: float = 1e-4
    max_iters: int = 100
    init_percentiles: tuple[float, float] = (5.0, 95.0)
    clusters: int = 2

    def __post_init__(self):
        if self.clusters != 2:
            raise ValueError("only two clusters are supported")
        if not self.m > 1:
            raise ValueError("fuzzifier m must be > 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class FcmResult:
    centers: np.ndarray          # ascending, shape (2,)
    memberships: np.ndarray      # (n, 2), columns follow `centers`
    iterations: int
    objective_trace: list[float]
    converged: bool


@dataclass(frozen=True)
class DamageRule:
    """How clusters map to damage.

    `cluster` picks which center is damage. When the two centers sit closer
    than `min_separation` pooled within-cluster standard deviations the
    leaf is treated as one population, and labeled wholesale by comparing
    its mean V against `v_reference`.
    """
    cluster: str = "higher_v"
    min_separation: float = 4.0
    v_reference: float = 0.0

    def __post_init__(self):
        if self.cluster not in ("higher_v", "lower_v"):
            raise ValueError("damage cluster must be 'higher_v' or 'lower_v'")
        if self.min_separation < 0:
            raise ValueError("min_separation must be >= 0")


@dataclass(frozen=True)
class DamageMask:
    mask: np.ndarray
    homogeneous: bool = False

    @property
    def pixels(self) -> int:
        return int(np.count_nonzero(self.mask))


def fcm_memberships(x: np.ndarray, centers: np.ndarray, m: float) -> np.ndarray:
    """Standard FCM membership update; points sitting on a center are crisp."""
    d = np.abs(x[:, None] - centers[None, :])
    zero = d == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = d ** (-2.0 / (m - 1.0))
        u = inv / inv.sum(axis=1, keepdims=True)
    hit = zero.any(axis=1)
    if hit.any():
        z = zero[hit].astype(np.float64)
        u[hit] = z / z.sum(axis=1, keepdims=True)
    return u


def _objective(x, w, u, centers, m) -> float:
    return float(np.sum(w[:, None] * u ** m * (x[:, None] - centers[None, :]) ** 2))


def _initial_centers(lo: float, hi: float, vmin: float, vmax: float) -> np.ndarray:
    if lo == hi:
        # percentiles collapsed on a dominant value; span the full range instead
        lo, hi = vmin, vmax
    return np.array([lo, hi], dtype=np.float64)


def _finish(x, w, centers, u, it, trace, converged, m) -> FcmResult:
    order = np.argsort(centers, kind="stable")
    centers = centers[order]
    u = fcm_memberships(x, centers, m)
    return FcmResult(centers, u, it, trace, converged)


def fcm_cluster(values, params: FcmParams = FcmParams()) -> FcmResult:
    """Pixelwise two-cluster FCM on a 1-D sample."""
    x = np.asarray(values, dtype=np.float64).ravel()
    if np.unique(x).size < 2:
        raise DegenerateChannel("need at least two distinct values")
    m = params.m
    lo, hi = np.percentile(x, params.init_percentiles)
    centers = _initial_centers(float(lo), float(hi), float(x.min()), float(x.max()))
    ones = np.ones_like(x)
    trace: list[float] = []
    converged = False
    it = 0
    u = None
    while it < params.max_iters:
        it += 1
        u = fcm_memberships(x, centers, m)
        um = u ** m
        new = (um * x[:, None]).sum(axis=0) / um.sum(axis=0)
        trace.append(_objective(x, ones, u, new, m))
        shift = np.max(np.abs(new - centers))
        centers = new
        if shift < params.tolerance:
            converged = True
            break
    return _finish(x, ones, centers, u, it, trace, converged, m)


def weighted_percentile(values: np.ndarray, weights: np.ndarray, q: float) -> float:
    """Percentile of the expanded sample, matching numpy's default 'linear' method.

    `values` must be sorted ascending and `weights` are non-negative integer
    repeat counts.
    """
    counts = np.asarray(weights, dtype=np.int64)
    n = int(counts.sum())
    pos = (n - 1) * q / 100.0
    k = int(np.floor(pos))
    frac = pos - k
    ends = np.cumsum(counts)

    def at(i):
        return values[np.searchsorted(ends, i, side="right")]

    lo = at(k)
    if frac == 0 or k + 1 >= n:
        return float(lo)
    return float(lo + frac * (at(k + 1) - lo))


def fcm_cluster_hist(histogram, params: FcmParams = FcmParams(), values=None) -> FcmResult:
    """FCM over histogram bins weighted by their counts.

    `values` gives the value each bin stands for (default: the bin index).
    Memberships in the result are per bin.
    """
    w_all = np.asarray(histogram)
    if values is None:
        values = np.arange(w_all.size, dtype=np.float64)
    v_all = np.asarray(values, dtype=np.float64)
    if v_all.shape != w_all.shape:
        raise ValueError("histogram and bin values differ in length")
    if np.any(w_all < 0):
        raise ValueError("histogram counts must be non-negative")
    keep = w_all > 0
    if np.count_nonzero(keep) < 2:
        raise DegenerateChannel("need at least two non-empty bins")
    order = np.argsort(v_all[keep], kind="stable")
    x = v_all[keep][order]
    w = w_all[keep][order].astype(np.float64)
    m = params.m
    lo, hi = (weighted_percentile(x, w_all[keep][order], q) for q in params.init_percentiles)
    centers = _initial_centers(lo, hi, float(x[0]), float(x[-1]))
    trace: list[float] = []
    converged = False
    it = 0
    u = None
    while it < params.max_iters:
        it += 1
        u = fcm_memberships(x, centers, m)
        um = w[:, None] * u ** m
        new = (um * x[:, None]).sum(axis=0) / um.sum(axis=0)
        trace.append(_objective(x, w, u, new, m))
        shift = np.max(np.abs(new - centers))
        centers = new
        if shift < params.tolerance:
            converged = True
            break
    res = _finish(x, w, centers, u, it, trace, converged, m)
    full = np.zeros((w_all.size, 2))
    idx = np.flatnonzero(keep)[order]
    full[idx] = res.memberships
    full[~keep] = fcm_memberships(v_all[~keep], res.centers, m)
    res.memberships = full
    return res


def quantize_v(v) -> np.ndarray:
    """Map V values onto 256 evenly spaced bins spanning the representable range."""
    v = np.asarray(v, dtype=np.float64)
    q = np.floor((v + V_LIMIT) / (2 * V_LIMIT) * (N_BINS - 1) + 0.5)
    return np.clip(q, 0, N_BINS - 1).astype(np.int64)


def bin_values() -> np.ndarray:
    """The V value each quantization bin stands for."""
    return np.arange(N_BINS) * (2 * V_LIMIT / (N_BINS - 1)) - V_LIMIT


def v_histogram(v_leaf) -> np.ndarray:
    return np.bincount(quantize_v(v_leaf), minlength=N_BINS)


def _pooled_separation(x: np.ndarray, centers: np.ndarray, m: float) -> float:
    """Center gap divided by the pooled within-cluster standard deviation."""
    u = fcm_memberships(x, centers, m)
    hi = u[:, 1] > u[:, 0]
    sq = np.where(hi, x - centers[1], x - centers[0]) ** 2
    spread = np.sqrt(sq.mean())
    gap = centers[1] - centers[0]
    if spread == 0:
        return np.inf if gap > 0 else 0.0
    return float(gap / spread)


def classify_damage(img_v, leaf: LeafMask, result: FcmResult | None,
                    m: float = 2.0, rule: DamageRule = DamageRule()) -> DamageMask:
    """Label leaf pixels belonging to the damage cluster.

    `result=None` or equal centers means the caller hit a degenerate channel;
    no damage is declared then.
    """
    img_v = np.asarray(img_v, dtype=np.float64)
    leaf_mask = np.asarray(leaf.mask, dtype=bool)
    if img_v.shape != leaf_mask.shape:
        raise ValueError("V map and leaf mask differ in shape")
    damage = np.zeros(leaf_mask.shape, dtype=bool)
    if result is None or result.centers[0] == result.centers[1]:
        return DamageMask(damage)
    x = img_v[leaf_mask]
    centers = np.sort(np.asarray(result.centers, dtype=np.float64))
    if _pooled_separation(x, centers, m) < rule.min_separation:
        mean_v = x.mean()
        hit = mean_v > rule.v_reference if rule.cluster == "higher_v" else mean_v < rule.v_reference
        if hit:
            damage[leaf_mask] = True
        return DamageMask(damage, homogeneous=True)
    u = fcm_memberships(x, centers, m)
    if rule.cluster == "higher_v":
        is_damage = u[:, 1] > u[:, 0]
    else:
        is_damage = u[:, 0] > u[:, 1]
    damage[leaf_mask] = is_damage
    return DamageMask(damage)
