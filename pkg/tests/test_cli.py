import json

import pytest

from ohm import generate, write_graph
from ohm.cli import main


@pytest.fixture
def k4_file(tmp_path):
    path = tmp_path / "k4.txt"
    write_graph(generate("complete", 4), path)
    return path


def read_json(path):
    return json.loads(path.read_text())


def test_generate_roundtrip(tmp_path):
    assert main(["generate", "--family", "grid", "--n", "3", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "grid.txt").read_text()
    assert text.splitlines()[0] == "9"
    assert "source 0" in text and "sink 8" in text


def test_oracle_single_edge(tmp_path):
    assert main(["oracle", "--family", "path", "--n", "2", "--out", str(tmp_path)]) == 0
    d = read_json(tmp_path / "oracle.json")
    assert d["p"] == pytest.approx([1, 0]) and d["energy"] == pytest.approx(1)
    assert d["flows"] == [[0, 1, pytest.approx(1)]]


def test_spectral_k4(k4_file, tmp_path):
    assert main(["spectral", "--graph", str(k4_file), "--out", str(tmp_path)]) == 0
    d = read_json(tmp_path / "spectral.json")
    assert d["rho_star"] == pytest.approx(1 / 3)
    assert d["phi_cond"] == pytest.approx(2 / 3)
    assert d["theta"] == pytest.approx(2)
    assert d["all_pass"]


def test_jacobi_csv(tmp_path):
    assert main(["jacobi", "--family", "complete", "--n", "4", "--rounds", "10",
                 "--stop-tol", "0", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "jacobi.csv").read_text().splitlines()
    assert lines[0] == "t,err_perp_norm,bound,residual_inf,messages"
    assert len(lines) == 12 and lines[-1].endswith(",120")


def test_tokens_stdout(capsys):
    assert main(["tokens", "--family", "path", "--n", "3", "--rounds", "5",
                 "--K", "4", "--reps", "3", "--seed", "1"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["rounds"] == 5 and d["replications"] == 3


def test_usage_errors(capsys):
    assert main(["tokens", "--family", "path", "--n", "3"]) == 1
    assert "--seed" in capsys.readouterr().err
    assert main(["oracle"]) == 1
    assert main(["oracle", "--family", "path"]) == 1
    assert main(["jacobi", "--family", "path", "--n", "3", "--beta", "0"]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["oracle", "--rounds", "many"])
    assert exc.value.code == 1


def test_data_errors(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("3\n0 1 1.0\nsource 0\nsink 2\n")
    assert main(["oracle", "--graph", str(bad)]) == 2
    assert "Disconnected" in capsys.readouterr().err
    assert main(["oracle", "--graph", str(tmp_path / "missing.txt")]) == 2
    bad.write_text("2\n0 1 x\nsource 0\nsink 1\n")
    assert main(["oracle", "--graph", str(bad)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_selfcheck_pass_and_stable(capsys):
    assert main(["selfcheck"]) == 0
    first = capsys.readouterr().out
    assert first.startswith("PASS")
    assert main(["selfcheck"]) == 0
    assert capsys.readouterr().out == first


def test_selfcheck_detects_fault(capsys):
    assert main(["selfcheck", "--inject-fault"]) == 3
    out = capsys.readouterr().out
    assert "FAIL: first violated invariant: adjacency_symmetry" in out


def test_selfcheck_single_graph(k4_file, capsys):
    assert main(["selfcheck", "--graph", str(k4_file), "-v"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("PASS input: adjacency_symmetry")
    assert out[-1] == f"PASS: {len(out) - 1} checks on 1 graphs"


def test_bound_violation_exit(monkeypatch, k4_file):
    from ohm import spectral
    from ohm.spectral import BoundCheck

    monkeypatch.setattr(spectral, "check_cheeger",
                        lambda g, strict=False: BoundCheck("cheeger", 2.0, 1.0, False))
    assert main(["spectral", "--graph", str(k4_file)]) == 3


def test_compare_deterministic(tmp_path, capsys):
    args = ["compare", "--family", "path", "--n", "3", "--rounds", "80",
            "--K", "50", "--reps", "10", "--seed", "1"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    err = capsys.readouterr().err
    assert "FAIL" not in err and "PASS oracle_residual" in err
    names = sorted(p.name for p in a.iterdir())
    assert names == ["jacobi.csv", "oracle.json", "report.json", "spectral.json",
                     "tokens.csv", "tokens.json"]
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes()
    report = read_json(a / "report.json")
    assert report["all_pass"] and report["params"]["seed"] == 1
