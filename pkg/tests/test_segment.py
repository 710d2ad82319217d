import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize

from leafsev.background import LeafMask
from leafsev.segment import (DamageRule, DegenerateChannel, FcmParams, bin_values,
                             classify_damage, fcm_cluster, fcm_cluster_hist, fcm_memberships,
                             quantize_v, v_histogram, weighted_percentile)

BIMODAL = [0, 0, 0, 10, 10, 10]


def reduced_objective(c, x, m=2.0):
    """FCM objective with memberships optimized out; depends on centers only."""
    d2 = (x[:, None] - np.asarray(c)[None, :]) ** 2 + 1e-300
    return np.sum(np.sum(d2 ** (-1.0 / (m - 1)), axis=1) ** (1 - m))


def reference_centers(x, m=2.0):
    """Brute-force minimizer: coarse grid, then Nelder-Mead polish."""
    x = np.asarray(x, float)
    grid = np.linspace(x.min(), x.max(), 41)
    best = min(((a, b) for a in grid for b in grid if a < b), key=lambda c: reduced_objective(c, x, m))
    res = optimize.minimize(reduced_objective, best, args=(x, m), method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000})
    return np.sort(res.x)


def test_bimodal_fixed_point():
    res = fcm_cluster(BIMODAL)
    np.testing.assert_allclose(res.centers, [0, 10], atol=1e-3)
    np.testing.assert_allclose(reference_centers(BIMODAL), [0, 10], atol=1e-3)
    np.testing.assert_allclose(res.memberships, [[1, 0]] * 3 + [[0, 1]] * 3, atol=1e-9)


def test_matches_brute_force_reference(rng):
    x = np.concatenate([rng.normal(-20, 4, 300), rng.normal(30, 6, 120)])
    res = fcm_cluster(x, FcmParams(tolerance=1e-9, max_iters=1000))
    np.testing.assert_allclose(res.centers, reference_centers(x), atol=1e-3)


def test_memberships_rows_sum_to_one(rng):
    x = rng.normal(0, 5, 500)
    res = fcm_cluster(x)
    assert np.max(np.abs(res.memberships.sum(axis=1) - 1)) < 1e-9
    assert res.memberships.min() >= 0 and res.memberships.max() <= 1


def test_translation_equivariance(rng):
    x = np.concatenate([rng.normal(-10, 3, 200), rng.normal(15, 3, 80)])
    a = fcm_cluster(x)
    b = fcm_cluster(x + 37.5)
    np.testing.assert_allclose(b.centers, a.centers + 37.5, atol=1e-6)
    np.testing.assert_allclose(b.memberships, a.memberships, atol=1e-6)


def test_scale_equivariance_keeps_assignments(rng):
    x = np.concatenate([rng.normal(-10, 3, 200), rng.normal(15, 3, 80)])
    a = fcm_cluster(x, FcmParams(tolerance=1e-10, max_iters=500))
    b = fcm_cluster(3 * x, FcmParams(tolerance=1e-10, max_iters=500))
    np.testing.assert_allclose(b.centers, 3 * a.centers, rtol=1e-6)
    np.testing.assert_array_equal(a.memberships.argmax(1), b.memberships.argmax(1))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 31), st.floats(1.2, 4.0))
def test_objective_non_increasing(seed, m):
    r = np.random.default_rng(seed)
    x = np.concatenate([r.normal(r.uniform(-50, 50), r.uniform(0.5, 20), r.integers(5, 200))
                        for _ in range(r.integers(1, 4))])
    res = fcm_cluster(x, FcmParams(m=m))
    assert np.all(np.diff(res.objective_trace) <= 1e-9)
    assert res.centers[0] <= res.centers[1]


def test_degenerate_inputs():
    with pytest.raises(DegenerateChannel):
        fcm_cluster([3.0, 3.0, 3.0])
    h = np.zeros(256)
    h[7] = 5
    with pytest.raises(DegenerateChannel):
        fcm_cluster_hist(h)


def test_dominant_value_initialization():
    # 5th and 95th percentiles coincide; init falls back to the range
    x = [1.0] * 98 + [9.0, 9.5]
    res = fcm_cluster(x)
    assert res.centers[0] == pytest.approx(1.0, abs=1e-2) and res.centers[1] > 8


def test_params_validation():
    for kw in ({"m": 1.0}, {"tolerance": 0.0}, {"max_iters": 0}, {"clusters": 3}):
        with pytest.raises(ValueError):
            FcmParams(**kw)


def test_weighted_percentile_matches_numpy(rng):
    values = np.sort(rng.choice(50, 12, replace=False)).astype(float)
    counts = rng.integers(1, 9, values.size)
    expanded = np.repeat(values, counts)
    for q in (0, 5, 37.5, 50, 95, 100):
        assert weighted_percentile(values, counts, q) == pytest.approx(np.percentile(expanded, q), abs=1e-12)


def test_hist_example_matches_pixel_example():
    h = np.zeros(256)
    h[0] = h[10] = 3
    a = fcm_cluster_hist(h)
    b = fcm_cluster(BIMODAL)
    np.testing.assert_allclose(a.centers, b.centers, atol=1e-9)
    assert a.iterations == b.iterations
    assert a.memberships.shape == (256, 2)


def test_hist_path_matches_pixel_path(rng):
    v = np.concatenate([rng.normal(-25, 6, 7000), rng.normal(60, 9, 3000)])
    bins = quantize_v(v)
    hist = np.bincount(bins, minlength=256)
    values = bin_values()
    a = fcm_cluster_hist(hist, values=values)
    b = fcm_cluster(values[bins])
    assert np.max(np.abs(a.centers - b.centers)) < 1e-9
    assert a.iterations == b.iterations
    np.testing.assert_allclose(a.objective_trace, b.objective_trace, rtol=1e-9)


def test_hist_damage_mask_equals_pixel_damage_mask(rng):
    v = np.concatenate([rng.normal(-25, 6, 6000), rng.normal(60, 9, 4000)])
    rng.shuffle(v)
    vq = bin_values()[quantize_v(v)].reshape(100, 100)
    leaf = LeafMask(np.ones((100, 100), bool))
    a = classify_damage(vq, leaf, fcm_cluster_hist(v_histogram(vq.ravel()), values=bin_values()))
    b = classify_damage(vq, leaf, fcm_cluster(vq.ravel()))
    np.testing.assert_array_equal(a.mask, b.mask)


def test_quantization_covers_range():
    assert quantize_v(bin_values()).tolist() == list(range(256))
    step = bin_values()[1] - bin_values()[0]
    x = np.linspace(-150, 150, 1001)
    assert np.max(np.abs(bin_values()[quantize_v(x)] - x)) <= step / 2 + 1e-12


def test_membership_update_crisp_on_center():
    u = fcm_memberships(np.array([0.0, 5.0, 10.0]), np.array([0.0, 10.0]), 2.0)
    np.testing.assert_allclose(u, [[1, 0], [0.5, 0.5], [0, 1]])


def make_leaf(values, shape=(10, 10)):
    v = np.zeros(shape)
    leaf = np.zeros(shape, bool)
    leaf.ravel()[: len(values)] = True
    v.ravel()[: len(values)] = values
    return v, LeafMask(leaf)


def test_classify_higher_center_is_damage(rng):
    vals = np.concatenate([rng.normal(-20, 1.5, 60), rng.normal(35, 1.5, 20)])
    v, leaf = make_leaf(vals)
    res = fcm_cluster(vals)
    np.testing.assert_allclose(res.centers, [-20, 35], atol=2)
    dmg = classify_damage(v, leaf, res)
    expected = np.zeros_like(leaf.mask)
    expected.ravel()[60:80] = True
    np.testing.assert_array_equal(dmg.mask, expected)
    assert not np.any(dmg.mask & ~leaf.mask)
    low = classify_damage(v, leaf, res, rule=DamageRule(cluster="lower_v"))
    np.testing.assert_array_equal(low.mask, leaf.mask & ~expected)


def test_classify_equal_centers_or_none_is_empty():
    v, leaf = make_leaf(np.ones(30))
    res = fcm_cluster([0.0, 1.0])
    res.centers = np.array([4.0, 4.0])
    assert classify_damage(v, leaf, res).pixels == 0
    assert classify_damage(v, leaf, None).pixels == 0


def test_classify_tie_goes_to_healthy():
    v, leaf = make_leaf([0.0, 5.0, 10.0] * 5)
    res = fcm_cluster([0.0, 10.0])
    dmg = classify_damage(v, leaf, res, rule=DamageRule(min_separation=0))
    assert not dmg.mask.ravel()[1] and dmg.mask.ravel()[2]


def test_homogeneous_leaf_labeled_by_mean_v(rng):
    vals = rng.uniform(-30, -10, 90)
    v, leaf = make_leaf(vals)
    dmg = classify_damage(v, leaf, fcm_cluster(vals))
    assert dmg.homogeneous and dmg.pixels == 0
    vals = rng.uniform(50, 80, 90)
    v, leaf = make_leaf(vals)
    dmg = classify_damage(v, leaf, fcm_cluster(vals))
    assert dmg.homogeneous and dmg.pixels == 90


def test_damage_rule_validation():
    with pytest.raises(ValueError):
        DamageRule(cluster="reddest")
