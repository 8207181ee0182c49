import json
import subprocess
import sys

import pytest

from anharmonic.cli import main
from anharmonic.potential import PotentialSpec, dump_potential, harmonic, load_potential


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_series_example(capsys):
    code, out, _ = run(["series", "--sextic-lambda", "1", "--n", "0", "--K", "7", "--mode", "rational"], capsys)
    assert code == 0
    rows = dict(line.split(",") for line in out.strip().splitlines()[1:])
    assert rows["3"] == "15/16"
    assert rows["2"] == "0"


def test_series_harmonic_file(tmp_path, capsys):
    path = tmp_path / "harmonic.json"
    dump_potential(harmonic(), path)
    code, out, _ = run(["series", "--potential", str(path), "--n", "2", "--K", "5"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "k,E_k"
    assert float(lines[1].split(",")[1]) == 2.5
    assert all(float(line.split(",")[1]) == 0 for line in lines[2:])


def test_series_json(capsys):
    code, out, _ = run(["series", "--sextic-lambda", "1/2", "--K", "3", "--mode", "rational", "--format", "json"], capsys)
    data = json.loads(out)
    assert data["orders"][2] == {"k": 3, "E_k": "15/32"}
    assert data["partial_sum"] == "31/32"


def test_series_precision_warning(capsys):
    code, _, err = run(["series", "--sextic-lambda", "1", "--K", "21", "--precision", "20"], capsys)
    assert code == 0 and "exceeds precision/2" in err


@pytest.mark.parametrize("argv, code", [
    (["series", "--sextic-lambda", "1", "--K", "3"], 0),
    (["series", "--K", "0", "--sextic-lambda", "1"], 2),
    (["series", "--K", "3"], 2),
    (["series", "--sextic-lambda", "x", "--K", "3"], 2),
    (["series", "--potential", "/nonexistent/p.json", "--K", "3"], 2),
    (["series", "--sextic-lambda", "1", "--K", "3", "--n", "-1"], 2),
    (["series", "--sextic-lambda", "1", "--K", "5", "--max-index", "3"], 2),
    (["series", "--sextic-lambda", "1", "--K", "3", "--bogus"], 2),
    (["series", "--sextic-lambda", "1", "--K", "3", "--mode", "quad"], 2),
    (["renormalize", "--sextic-lambda", "0.01", "--N", "1"], 0),
    (["renormalize", "--sextic-lambda", "0.01"], 2),
    (["renormalize", "--sextic-lambda", "0.01", "--N", "1", "--interval", "3", "5"], 4),
    (["renormalize", "--sextic-lambda", "0.01", "--N", "2", "--count", "orders", "--scheme", "minimal-difference"], 4),
    (["renormalize", "--sextic-lambda", "0.01", "--N", "1", "--interval", "5", "3"], 2),
    (["solve", "--sextic-lambda", "1"], 0),
    (["solve", "--sextic-lambda", "1", "--bracket", "0", "0.1"], 3),
    (["solve", "--sextic-lambda", "1", "--L", "5", "--h", "0.1"], 2),
    (["quasi-exact", "--v4", "6", "--v6", "1"], 0),
    (["quasi-exact", "--v4", "0", "--v6", "1"], 2),
    (["quasi-exact", "--v4", "6", "--v6", "-1"], 2),
    ([], 2),
])
def test_exit_codes(argv, code, capsys):
    assert run(argv, capsys)[0] == code


def test_validation_message_names_flag(capsys):
    _, _, err = run(["series", "--sextic-lambda", "x", "--K", "3"], capsys)
    assert "--sextic-lambda" in err
    _, _, err = run(["series", "--K", "0", "--sextic-lambda", "1"], capsys)
    assert "--K" in err


def test_no_root_echoes_interval(capsys):
    _, _, err = run(["renormalize", "--sextic-lambda", "0.01", "--N", "1", "--interval", "3", "5"], capsys)
    assert "[3, 5]" in err


def test_renormalize_lambda_zero(capsys):
    code, out, _ = run(["renormalize", "--sextic-lambda", "0", "--N", "1", "--format", "json"], capsys)
    data = json.loads(out)
    assert code == 0
    assert float(data["omega0"]) == pytest.approx(1, rel=1e-9)


def test_renormalize_check_numeric(capsys):
    code, out, _ = run(["renormalize", "--sextic-lambda", "10", "--n", "5", "--N", "50", "--check-numeric",
                        "--format", "json"], capsys)
    data = json.loads(out)
    assert code == 0
    assert abs(float(data["partial_sums"][-1]) - 26.42476) / 26.42476 <= 1e-4
    assert data["numeric"]["energy"] == pytest.approx(26.42476, abs=5e-6)


def test_renormalize_config_block(tmp_path, capsys):
    cfg = tmp_path / "scheme.json"
    cfg.write_text(json.dumps({"scheme": "minimal-difference", "N": 1, "root": "smallest", "grid": 64, "tol": "1e-12"}))
    code, out, _ = run(["renormalize", "--sextic-lambda", "0.01", "--config", str(cfg), "--format", "json"], capsys)
    data = json.loads(out)
    assert code == 0
    assert data["scheme"] == "minimal-difference" and data["root_selection"] == "smallest"
    assert float(data["omega0"]) ** 2 == pytest.approx((1 + 1.15**0.5) / 2, rel=1e-9)


def test_determinism(tmp_path, capsys):
    outputs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        assert main(["series", "--sextic-lambda", "0.3", "--n", "2", "--K", "15", "-o", str(path)]) == 0
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]
    m = [json.loads((tmp_path / f"{n}.manifest.json").read_text()) for n in ("a.csv", "b.csv")]
    for d in m:
        d.pop("timing")
        d.pop("outputs")
        d["inputs"].pop("output")
    assert m[0] == m[1]
    capsys.readouterr()


def test_manifest(tmp_path, capsys):
    path = tmp_path / "s.csv"
    main(["series", "--sextic-lambda", "1", "--K", "3", "-o", str(path)])
    manifest = json.loads((tmp_path / "s.csv.manifest.json").read_text())
    assert manifest["command"] == "series"
    assert manifest["outputs"] == [str(path)]
    assert manifest["status"] == 0
    assert set(manifest) == {"command", "inputs", "outputs", "versions", "status", "timing"}
    assert "S_3" in capsys.readouterr().out


def test_manifest_on_failure(tmp_path, capsys):
    path = tmp_path / "s.csv"
    assert main(["series", "--sextic-lambda", "1", "--K", "0", "-o", str(path)]) == 2
    manifest = json.loads((tmp_path / "s.csv.manifest.json").read_text())
    assert manifest["status"] == 2 and manifest["outputs"] == []
    capsys.readouterr()


def test_potential_round_trip(tmp_path, capsys):
    src = tmp_path / "in.json"
    saved = tmp_path / "saved.json"
    pot = PotentialSpec(mass="1/2", omega="sqrt(24)", couplings={2: 6, 4: 1})
    dump_potential(pot, src)
    assert main(["series", "--potential", str(src), "--K", "2", "--save-potential", str(saved)]) == 0
    assert load_potential(saved) == pot
    assert main(["series", "--sextic-lambda", "0.01", "--K", "2", "--save-potential", str(saved)]) == 0
    assert load_potential(saved).couplings == {4: pytest.approx(0.005)}
    capsys.readouterr()


def test_env_prefix(monkeypatch, capsys):
    monkeypatch.setenv("ANHARMONIC_MODE", "rational")
    monkeypatch.setenv("ANHARMONIC_FORMAT", "json")
    code, out, _ = run(["series", "--sextic-lambda", "1", "--K", "3"], capsys)
    assert json.loads(out)["orders"][2]["E_k"] == "15/16"
    # explicit flags win
    code, out, _ = run(["series", "--sextic-lambda", "1", "--K", "3", "--format", "csv"], capsys)
    assert out.startswith("k,E_k")


def test_bad_env_value(monkeypatch, capsys):
    monkeypatch.setenv("ANHARMONIC_PRECISION", "lots")
    assert run(["series", "--sextic-lambda", "1", "--K", "3"], capsys)[0] == 2


def test_quasi_exact_report(capsys):
    code, out, _ = run(["quasi-exact", "--v4", "6", "--v6", "1"], capsys)
    assert code == 0
    assert "predicted E = 3" in out
    assert "Numerov E = 3.0000000000" in out and "PASS" in out


def test_table1_output(tmp_path, capsys):
    path = tmp_path / "t.csv"
    code = main(["table1", "--rows", "1", "-o", str(path)])
    out, err = capsys.readouterr()
    assert code == 0
    assert "12/12" in err and "E_num" in out
    assert path.read_text().startswith("row,n,lambda,value,printed")


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "anharmonic.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "anharmonic" in res.stdout
