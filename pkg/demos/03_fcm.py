"""Fuzzy c-means on the V channel of a leaf.

Clusters the leaf's V histogram, prints the two centres and the objective
trace, then checks the damage mask against the generator's truth.
"""
import numpy as np

from leafsev.background import LeafMask
from leafsev.imaging import rgb_to_yuv
from leafsev.segment import bin_values, classify_damage, fcm_cluster_hist, v_histogram
from leafsev.synth import SynthSpec, generate

truth = generate(SynthSpec(damage_fraction=0.3, seed=7))
leaf = LeafMask(truth.leaf)
_, _, v = rgb_to_yuv(truth.image)

res = fcm_cluster_hist(v_histogram(v[leaf.mask]), values=bin_values())
print("centres (V units):", np.round(res.centers, 2))
print("iterations:", res.iterations, "converged:", res.converged)
print("objective:", " ".join(f"{j:.4g}" for j in res.objective_trace[:6]), "...")

damage = classify_damage(v, leaf, res)
iou = (damage.mask & truth.damage).sum() / (damage.mask | truth.damage).sum()
print(f"damage {damage.pixels} px vs truth {truth.damaged_pixels} px, IoU {iou:.3f}")

# A healthy leaf has no second population. The separation rule notices this
# and labels the whole leaf by its mean V instead of splitting it in two.
healthy = generate(SynthSpec(seed=7))
_, _, hv = rgb_to_yuv(healthy.image)
hres = fcm_cluster_hist(v_histogram(hv[healthy.leaf]), values=bin_values())
print("healthy leaf damage px:", classify_damage(hv, LeafMask(healthy.leaf), hres).pixels)
