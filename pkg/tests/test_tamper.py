from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seal import tamper
from seal.attacks import AttackSpec, cat_attack
from seal.channel import ChannelConfig, invert
from seal.noisefield import Layout, generate_watermarked_noise
from seal.semantic import random_unit_vector
from seal.simhash import key_bits


def flood_fill_count(mask, connectivity=4):
    """Plain BFS component count, the oracle for label_components."""
    rows, cols = mask.shape
    seen = np.zeros_like(mask, dtype=bool)
    steps = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    if connectivity == 8:
        steps += [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    sizes = []
    for r in range(rows):
        for c in range(cols):
            if not mask[r, c] or seen[r, c]:
                continue
            seen[r, c] = True
            queue, size = deque([(r, c)]), 0
            while queue:
                y, x = queue.popleft()
                size += 1
                for dy, dx in steps:
                    ny, nx = y + dy, x + dx
                    if 0 <= ny < rows and 0 <= nx < cols and mask[ny, nx] and not seen[ny, nx]:
                        seen[ny, nx] = True
                        queue.append((ny, nx))
            sizes.append(size)
    return len(sizes), sorted(sizes)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.05, 0.95), st.sampled_from([4, 8]))
def test_labeling_matches_flood_fill(seed, density, conn):
    mask = np.random.default_rng(seed).random((32, 32)) < density
    labels, count = tamper.label_components(mask, conn)
    want_count, want_sizes = flood_fill_count(mask, conn)
    assert count == want_count
    assert sorted(np.bincount(labels.ravel())[1:].tolist()) == want_sizes


def test_label_rejects_connectivity():
    with pytest.raises(ValueError):
        tamper.label_components(np.zeros((2, 2), bool), 6)


def test_nearest_rank_percentile():
    x = np.arange(1, 11, dtype=float)
    assert tamper.nearest_rank_percentile(x, 80) == 8.0
    assert tamper.nearest_rank_percentile(x, 100) == 10.0
    assert tamper.nearest_rank_percentile(x, 1) == 1.0
    with pytest.raises(ValueError):
        tamper.nearest_rank_percentile(x, 0)


def test_recover_patch_bits_finds_the_key(salt):
    v = random_unit_vector("rec")
    z = generate_watermarked_noise(v, salt)
    bits, dist = tamper.recover_patch_bits(z.patch(5), 5, salt, 7)
    assert dist == 0.0
    assert np.array_equal(bits, key_bits(v, 5, salt, 7))


def test_recover_guard(salt):
    with pytest.raises(ValueError):
        tamper.recover_patch_bits(np.zeros(16), 0, salt, 21)


def test_heatmap_agrees_with_direct_search(salt):
    v = random_unit_vector("hm")
    z = invert(generate_watermarked_noise(v, salt), ChannelConfig(rng_seed=bytes(32)))
    h = tamper.heatmap(z, salt)
    for i in (0, 100, 1023):
        bits, dist = tamper.recover_patch_bits(z.patch(i), i, salt, 7)
        r, c = divmod(i, 32)
        assert h.grid[r, c] == pytest.approx(dist, rel=1e-9)
        assert np.array_equal(h.bits[i], bits)


def test_flat_heatmap_is_inconclusive():
    h = tamper.Heatmap(np.ones((4, 4)))
    report = tamper.spatial_test(h)
    assert report.cluster_count == 0 and report.tampered is None
    assert tamper.tamper_score(h) == -17.0


def test_single_block_is_flagged():
    grid = np.zeros((32, 32))
    grid[5:15, 5:15] = 10.0
    report = tamper.spatial_test(tamper.Heatmap(grid))
    assert report.cluster_count == 1
    assert report.largest_cluster_area == 100
    assert report.tampered is True


def test_heatmap_render_and_validation():
    h = tamper.Heatmap(np.array([[0.4, 12.6], [3.0, 0.0]]))
    assert h.render() == " 0 13\n 3  0"
    with pytest.raises(ValueError):
        tamper.Heatmap(np.array([[-1.0]]))


def test_cat_attack_raises_tamper_score(salt):
    v = random_unit_vector("cat")
    cfg = ChannelConfig(rng_seed=bytes(32))
    z_inv = invert(generate_watermarked_noise(v, salt), cfg)
    attacked = cat_attack(z_inv, AttackSpec("cat", rng_seed=bytes(range(32))), cfg)
    clean_h, att_h = tamper.heatmap(z_inv, salt), tamper.heatmap(attacked, salt)
    assert tamper.tamper_score(att_h) > tamper.tamper_score(clean_h)
    assert tamper.spatial_test(att_h).tampered is True
    assert tamper.spatial_test(clean_h).tampered is False


def test_calibrate_cluster_threshold():
    counts = np.arange(100, 200)
    assert tamper.calibrate_cluster_threshold(counts, 0.01) == 100
    assert tamper.calibrate_cluster_threshold(counts, 0.0) == 99
    with pytest.raises(ValueError):
        tamper.calibrate_cluster_threshold([], 0.01)


def test_default_cluster_cutoff_is_reproducible(salt):
    # the shipped constant is the 1% cutoff of 500 clean fields
    counts = tamper.clean_cluster_counts(salt, trials=500)
    assert tamper.calibrate_cluster_threshold(counts, 0.01) == tamper.DEFAULT_MAX_CLUSTERS
