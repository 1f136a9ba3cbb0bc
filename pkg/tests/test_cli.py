import json
import subprocess
import sys

import pytest

from seal import cli
from seal.detection import detection_probability
from seal.semantic import embed_text, save_vector

SALT = bytes(range(32)).hex()


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def vec(tmp_path):
    path = tmp_path / "v.json"
    save_vector(path, embed_text("a red fox in the snow"))
    return str(path)


def test_prob_prints_exact_tail(capsys):
    code, out, _ = run(capsys, "prob", "--theta", "55", "--theta-mid", "55", "--n", "1024", "--b", "7")
    assert code == 0
    assert float(out) == detection_probability(55.0, 55.0, 1024, 7)


def test_prob_json(capsys):
    code, out, _ = run(capsys, "prob", "--theta", "90", "--json")
    doc = json.loads(out)
    assert doc["m_match"] == 79 and doc["log10_probability"] < -12


def test_gen_detect_loopback(capsys, tmp_path, vec):
    z = str(tmp_path / "z.nf")
    code, _, _ = run(capsys, "gen", "--vector", vec, "--salt-hex", SALT, "--out", z)
    assert code == 0
    code, out, _ = run(capsys, "detect", "--vector", vec, "--inverted", z, "--salt-hex", SALT,
                       "--tau", "2.3", "--match-threshold", "12", "--sigma", "0")
    doc = json.loads(out)
    assert code == 0 and doc["watermarked"] is True and doc["match_count"] == 1024


def test_env_salt_and_channel(capsys, tmp_path, vec, monkeypatch):
    monkeypatch.setenv("SEAL_SALT_HEX", SALT)
    z = str(tmp_path / "z.nf")
    assert run(capsys, "gen", "--vector", vec, "--out", z)[0] == 0
    code, out, _ = run(capsys, "detect", "--vector", vec, "--inverted", z, "--theta-mid", "55",
                       "--sigma", "0.4", "--map")
    doc = json.loads(out)
    assert doc["m_match"] == 79 and 990 < doc["match_count"] < 1024
    assert len(doc["match_map"]["distances"]) == 1024


def test_text_vector_and_wrong_caption(capsys, tmp_path):
    z = str(tmp_path / "z.nf")
    run(capsys, "gen", "--text", "a red fox", "--salt-hex", SALT, "--out", z)
    _, out, _ = run(capsys, "detect", "--text", "invoice totals for march", "--inverted", z,
                    "--salt-hex", SALT, "--theta-mid", "55")
    assert json.loads(out)["watermarked"] is False


def test_inspect(capsys, tmp_path, vec):
    z = str(tmp_path / "z.nf")
    run(capsys, "gen", "--vector", vec, "--salt-hex", SALT, "--out", z)
    code, out, _ = run(capsys, "inspect", "--inverted", z, "--salt-hex", SALT, "--json")
    doc = json.loads(out)
    assert code == 0 and doc["heatmap"]["rows"] == 32
    code, out, _ = run(capsys, "inspect", "--inverted", z, "--salt-hex", SALT)
    assert len(out.splitlines()) == 33


def test_roc(capsys, tmp_path):
    (tmp_path / "p.txt").write_text("3 4 5")
    (tmp_path / "n.json").write_text("[1, 2, 3]")
    code, out, _ = run(capsys, "roc", "--positive", str(tmp_path / "p.txt"),
                       "--negative", str(tmp_path / "n.json"))
    assert code == 0 and json.loads(out)["auc"] == pytest.approx(8.5 / 9)


def test_simulate(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, _, _ = run(capsys, "simulate", "--attack", "cat", "--trials", "5", "--out", str(out))
    doc = json.loads(out.read_text())
    assert code == 0 and "spatial_test_auc" in doc["results"]["cat"]


def test_simulate_config_file(capsys, tmp_path):
    cfg = {"schema_version": 1, "experiments": ["erase"], "trials": 3, "erase_fracs": [0.5]}
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    code, out, _ = run(capsys, "simulate", "--config", str(tmp_path / "c.json"))
    assert code == 0 and json.loads(out)["config"]["erase_fracs"] == [0.5]


def test_exit_codes(capsys, tmp_path, vec):
    assert run(capsys, "detect", "--vector", vec, "--inverted", str(tmp_path / "missing.nf"),
               "--salt-hex", SALT)[0] == 3
    (tmp_path / "bad.nf").write_bytes(b"garbage")
    assert run(capsys, "inspect", "--inverted", str(tmp_path / "bad.nf"), "--salt-hex", SALT)[0] == 3
    assert run(capsys, "gen", "--vector", vec, "--salt-hex", "abcd", "--out", "x.nf")[0] == 2
    assert run(capsys, "gen", "--vector", vec, "--out", "x.nf")[0] == 2
    assert run(capsys, "prob", "--theta", "200")[0] == 2
    (tmp_path / "c.json").write_text(json.dumps({"experiments": ["cat"]}))
    code, _, err = run(capsys, "simulate", "--config", str(tmp_path / "c.json"))
    assert code == 2 and "schema_version" in err
    with pytest.raises(SystemExit) as exc:
        cli.main(["detect"])
    assert exc.value.code == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "seal", "prob", "--theta", "55"],
                          capture_output=True, text=True, check=True)
    assert float(proc.stdout) == pytest.approx(0.5518, abs=1e-4)
