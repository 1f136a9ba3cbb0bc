import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seal import semantic


def test_embed_text_is_unit_and_deterministic():
    v = semantic.embed_text("A red fox")
    assert v.shape == (semantic.DEFAULT_DIM,)
    assert np.isclose(np.linalg.norm(v), 1.0)
    assert np.array_equal(v, semantic.embed_text("a   RED fox"))


def test_embed_text_related_captions_are_closer():
    a = semantic.embed_text("a red fox in the snow")
    b = semantic.embed_text("a red fox in the grass")
    c = semantic.embed_text("spreadsheet of quarterly revenue figures")
    assert semantic.angle(a, b) < semantic.angle(a, c)


def test_mock_salt_changes_vectors():
    spec = semantic.ProviderSpec(mock_seed_salt=b"other")
    assert not np.array_equal(semantic.embed_text("fox"), semantic.embed_text("fox", spec))


def test_empty_text_rejected():
    with pytest.raises(ValueError):
        semantic.embed_text("   ")


def test_file_provider_roundtrip(tmp_path):
    v = semantic.random_unit_vector("file", 16)
    path = tmp_path / "v.json"
    semantic.save_vector(path, v)
    doc = json.loads(path.read_text())
    assert doc["dim"] == 16
    spec = semantic.ProviderSpec("file", dim=16, path=str(path))
    assert np.array_equal(semantic.embed_text("ignored", spec), v)


def test_dimension_mismatch(tmp_path):
    path = tmp_path / "v.json"
    semantic.save_vector(path, np.ones(8))
    with pytest.raises(semantic.DimensionMismatch):
        semantic.load_vector(path, 16)


@pytest.mark.parametrize("bad", [[], [0.0, 0.0], [1.0, float("nan")], [[1.0, 2.0]]])
def test_as_vector_rejects(bad):
    with pytest.raises(ValueError):
        semantic.as_vector(bad)


def test_angle_edges():
    v = np.array([1.0, 0.0, 0.0])
    assert semantic.angle(v, v) == 0.0
    assert semantic.angle(v, -v) == 180.0
    assert semantic.angle(v, np.array([0.0, 2.0, 0.0])) == pytest.approx(90.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 180.0), st.integers(2, 64), st.binary(min_size=32, max_size=32))
def test_perturb_by_angle_hits_the_angle(theta, d, seed):
    v = semantic.random_unit_vector(seed, d)
    w = semantic.perturb_by_angle(v, theta, seed[::-1])
    assert np.isclose(np.linalg.norm(w), 1.0)
    assert semantic.angle(v, w) == pytest.approx(theta, abs=1e-5)


def test_perturb_rejects_bad_inputs():
    with pytest.raises(ValueError):
        semantic.perturb_by_angle(np.ones(4), 181.0, bytes(32))
    with pytest.raises(ValueError):
        semantic.perturb_by_angle(np.ones(1), 10.0, bytes(32))


def test_perturb_angle_grid_within_micro_degree():
    v = semantic.random_unit_vector("grid")
    for theta in range(0, 181, 10):
        w = semantic.perturb_by_angle(v, float(theta), f"grid{theta}")
        assert abs(semantic.angle(v, w) - theta) < 1e-6
