import numpy as np
import pytest
from scipy import stats

from seal import channel
from seal.noisefield import Layout, random_noise


def test_zero_sigma_is_identity():
    f = random_noise(Layout(), "id")
    assert channel.invert(f, channel.ChannelConfig(0.0)) is f


def test_invert_adds_scaled_noise():
    f = random_noise(Layout(), "src")
    cfg = channel.ChannelConfig(0.4, bytes(32))
    g = channel.invert(f, cfg)
    eps = (g.values - f.values) / 0.4
    assert stats.kstest(eps, "norm").pvalue > 0.01
    assert np.array_equal(g.values, channel.invert(f, cfg).values)


def test_config_validation_and_roundtrip():
    with pytest.raises(ValueError):
        channel.ChannelConfig(-0.1)
    cfg = channel.ChannelConfig(0.3, bytes(range(32)))
    assert channel.ChannelConfig.from_dict(cfg.to_dict()) == cfg


def test_same_seed_match_rate_is_chi_square_law():
    cfg = channel.ChannelConfig()
    d = channel.same_seed_distances(cfg, Layout(), 20_000)
    # ||sigma * eps||^2 / sigma^2 is chi-square with p = 16 degrees of freedom
    q = stats.chi2.cdf((channel.DEFAULT_TAU / 0.4) ** 2, 16)
    se = np.sqrt(q * (1 - q) / d.size)
    assert abs(np.mean(d < channel.DEFAULT_TAU) - q) < 4 * se


def test_different_seed_distance_law():
    cfg = channel.ChannelConfig()
    d = channel.different_seed_distances(cfg, Layout(), 20_000)
    # z - z' - sigma*eps has variance 2 + sigma^2 per coordinate
    scaled = d ** 2 / (2 + 0.4 ** 2)
    assert stats.kstest(scaled, stats.chi2(16).cdf).pvalue > 0.01


def test_separation_auc_needs_enough_trials():
    with pytest.raises(ValueError):
        channel.patch_separation_auc(trials=10)


def test_calibrate_tau_hits_target():
    cfg = channel.ChannelConfig(rng_seed=bytes(range(32)))
    tau = channel.calibrate_tau(cfg, Layout(), 0.01, 20_000)
    fresh = channel.different_seed_distances(cfg.with_seed(bytes(32)), Layout(), 20_000)
    assert abs(np.mean(fresh < tau) - 0.01) < 0.004


def test_calibrate_tau_unreachable():
    with pytest.raises(channel.UnreachableTarget):
        channel.calibrate_tau(target_fpr=1e-6, trials=1000)


def test_default_tau_separates_the_two_laws():
    same, diff = channel.match_probabilities()
    assert same >= 0.99 and diff <= 1e-3


def test_closed_form_rates_match_simulation():
    cfg = channel.ChannelConfig(rng_seed=bytes(range(32)))
    for sigma in (0.4, 0.8):
        c = channel.ChannelConfig(sigma, cfg.rng_seed)
        same, diff = channel.match_probabilities(c, Layout(), 4.0)
        s = channel.same_seed_distances(c, Layout(), 20_000)
        d = channel.different_seed_distances(c, Layout(), 20_000)
        assert np.mean(s < 4.0) == pytest.approx(same, abs=4 * np.sqrt(same * (1 - same) / 2e4) + 1e-4)
        assert np.mean(d < 4.0) == pytest.approx(diff, abs=4 * np.sqrt(diff * (1 - diff) / 2e4) + 1e-4)


def test_two_passes_cost_matches():
    one, _ = channel.match_probabilities(passes=1)
    two, _ = channel.match_probabilities(passes=2)
    assert two < 0.6 < 0.99 < one
    assert channel.match_probabilities(channel.ChannelConfig(0.0))[0] == 1.0


def test_output_variance_is_inflated():
    f = random_noise(Layout(), "var")
    g = channel.invert(f, channel.ChannelConfig(0.4, bytes(32)))
    assert np.var(g.values) == pytest.approx(1.16, rel=0.05)


def test_sigma_sweep_auc():
    assert channel.patch_separation_auc(channel.ChannelConfig(0.0), Layout(), 1000) == 1.0
    assert channel.patch_separation_auc(channel.ChannelConfig(2.0), Layout(), 10_000) < 0.95


def test_calibrate_tau_examples():
    assert channel.calibrate_tau(target_fpr=1e-4, trials=200_000) == pytest.approx(2.3, abs=0.4)
    median = channel.calibrate_tau(target_fpr=0.5, trials=20_000)
    assert median == pytest.approx(5.6, abs=0.3)
