import numpy as np
import pytest

from seal import attacks
from seal.channel import ChannelConfig, invert
from seal.noisefield import Layout, generate_watermarked_noise, random_noise
from seal.semantic import random_unit_vector


def test_spec_validation_and_roundtrip():
    with pytest.raises(ValueError):
        attacks.AttackSpec("nope")
    with pytest.raises(ValueError):
        attacks.AttackSpec(scale_range=(0.6, 0.3))
    with pytest.raises(ValueError):
        attacks.AttackSpec(erase_frac=1.5)
    spec = attacks.AttackSpec("steg_average", n_average=50, rng_seed=bytes(range(32)))
    assert attacks.AttackSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(ValueError):
        attacks.AttackSpec.from_dict({"kind": "cat", "colour": 1})


@pytest.mark.parametrize("k", range(20))
def test_cat_region_within_scale(k):
    lay = Layout()
    spec = attacks.AttackSpec(rng_seed=bytes([k]) * 32)
    mask = attacks.cat_region(lay, spec)
    rows, cols = np.nonzero(mask)
    h, w = np.ptp(rows) + 1, np.ptp(cols) + 1
    assert h == w and mask.sum() == h * w
    assert round(0.3 * 32) <= h <= round(0.6 * 32)


def test_zero_scale_is_identity():
    lay = Layout()
    z = random_noise(lay, "z")
    spec = attacks.AttackSpec(scale_range=(0.0, 0.0))
    assert not attacks.cat_region(lay, spec).any()
    assert attacks.cat_attack(z, spec) is z


def test_cat_attack_only_touches_region():
    lay = Layout()
    z = random_noise(lay, "z")
    spec = attacks.AttackSpec(rng_seed=bytes(range(32)))
    mask = attacks.cat_region(lay, spec).ravel()
    out = attacks.cat_attack(z, spec)
    changed = np.any(out.patches() != z.patches(), axis=1)
    assert np.array_equal(changed, mask)


def test_forgery_two_passes_adds_twice_the_variance(salt):
    v = random_unit_vector("f")
    z = generate_watermarked_noise(v, salt)
    cfg = ChannelConfig(0.4, bytes(32))
    once, _ = attacks.forgery_reuse(z, cfg, v, passes=1)
    twice, v_att = attacks.forgery_reuse(z, cfg, v, passes=2)
    assert np.var(once.values - z.values) == pytest.approx(0.16, rel=0.05)
    assert np.var(twice.values - z.values) == pytest.approx(0.32, rel=0.05)
    assert np.array_equal(v_att, v)
    with pytest.raises(ValueError):
        attacks.forgery_reuse(z, cfg, v, passes=3)


def test_steg_average_and_subtraction():
    lay = Layout(1, 4, 4, 2, 2)
    a = random_noise(lay, "a")
    b = random_noise(lay, "b")
    m = attacks.steg_average([a, b])
    assert np.allclose(m.values, (a.values + b.values) / 2)
    assert np.allclose(attacks.apply_subtraction(a, m, 2.0).values, a.values - (a.values + b.values))
    with pytest.raises(ValueError):
        attacks.steg_average([])
    with pytest.raises(ValueError):
        attacks.steg_average([a, random_noise(Layout(), "c")])


def test_steg_estimate_keeps_codebook_mean_floor(salt):
    # the average converges to the per-patch mean over 2**b candidate
    # patches, whose mean square is about 2**-b, not to zero
    vs = [random_unit_vector(f"s{k}") for k in range(2000)]
    from seal.noisefield import watermarked_patches
    est = watermarked_patches(np.stack(vs), salt).mean(axis=0)
    rms2 = float(np.mean(est ** 2))
    b = 7
    expected = 2.0 ** -b + (1 - 2.0 ** -b) / 2000
    assert rms2 == pytest.approx(expected, rel=0.15)


@pytest.mark.parametrize("frac", [0.0, 0.25, 1.0])
def test_erase_fraction_counts(frac, salt):
    v = random_unit_vector("e")
    z = invert(generate_watermarked_noise(v, salt), ChannelConfig(rng_seed=bytes(32)))
    out = attacks.erase_fraction(z, frac, "erase")
    changed = np.any(out.patches() != z.patches(), axis=1)
    assert changed.sum() == round(frac * 1024)
    with pytest.raises(ValueError):
        attacks.erase_fraction(z, -0.1, "erase")
