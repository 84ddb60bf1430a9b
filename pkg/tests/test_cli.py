import csv
import io

import numpy as np
import pytest

from parity_ft.cli import EXIT_BUDGET, EXIT_INVALID, EXIT_OK, main, parse_axis, read_config
from parity_ft.rates import PhysicalNoise, rates_xx90
from parity_ft.threshold import RateMap


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


# ---------------------------------------------------------------- parsing


def test_parse_axis():
    assert parse_axis("0.5") == [0.5]
    assert parse_axis("1,2") == [1.0, 2.0]
    assert parse_axis("0:1:3") == [0.0, 0.5, 1.0]
    for bad in ("1:0:3", "a", "0:1:0"):
        with pytest.raises(Exception):
            parse_axis(bad)


def test_validation_errors_exit_one(capsys):
    for argv in (
        ["rates", "--gamma", "1.5"],
        ["simulate", "--samples", "0"],
        ["simulate", "--code", "surface"],
        ["walk", "--n", "-2"],
        ["threshold", "--tol", "2"],
        ["nonsense"],
        ["rates", "--bogus"],
    ):
        code, _, err = run(capsys, *argv)
        assert code == EXIT_INVALID, argv
        assert "error" in err


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# recipe\ngamma = 1e-3\neta=2e-5\n")
    assert read_config(str(cfg)) == {"gamma": "1e-3", "eta": "2e-5"}
    code, out, _ = run(capsys, "rates", "--config", str(cfg))
    assert code == EXIT_OK
    assert {r["gamma"] for r in rows(out)} == {"0.001"}
    # flags beat the file
    code, out, _ = run(capsys, "rates", "--config", str(cfg), "--gamma", "0")
    assert {r["gamma"] for r in rows(out)} == {"0.0"}
    assert {r["eta"] for r in rows(out)} == {"2e-05"}
    cfg.write_text("colour = blue\n")
    code, _, err = run(capsys, "rates", "--config", str(cfg))
    assert code == EXIT_INVALID and "colour" in err


# ---------------------------------------------------------------- rates and walk


def test_rates_floors(capsys):
    code, out, _ = run(capsys, "rates", "--gamma", "0", "--eta", "0")
    assert code == EXIT_OK
    assert out.startswith("op,gamma,eta,located,x_unlocated,z_unlocated\n")
    table = {r["op"]: r for r in rows(out)}
    assert set(table) == {"SourcePrep", "Z90", "XX90", "Memory", "Measurement"}
    assert float(table["Z90"]["located"]) == 2**-7
    assert float(table["XX90"]["located"]) == pytest.approx(0.0237, abs=5e-5)
    for op, r in table.items():
        assert float(r["x_unlocated"]) == 0.0 and float(r["z_unlocated"]) == 0.0
        if op not in ("Z90", "XX90"):
            assert float(r["located"]) == 0.0


def test_rates_grid_rows(capsys):
    code, out, _ = run(capsys, "rates", "--grid", "0:1e-3:3")
    assert code == EXIT_OK
    assert len(rows(out)) == 45
    assert "\r" not in out


def test_walk(capsys):
    code, out, _ = run(capsys, "walk", "--n", "7")
    assert code == EXIT_OK
    assert abs(float(out.split()[0]) - 0.9763) <= 5e-5
    assert out.splitlines()[0] == f"{float(out.split()[0]):.6f}"


def test_oracle_verify(capsys):
    code, out, _ = run(capsys, "oracle-verify")
    assert code == EXIT_OK
    assert "FAIL" not in out
    code, out, _ = run(capsys, "oracle-verify", "--atol", "0")
    assert code == 2


# ---------------------------------------------------------------- simulate


def test_simulate_zero_noise(capsys):
    code, out, _ = run(capsys, "simulate", "--zero-noise", "--samples", "2000")
    assert code == EXIT_OK
    assert out.splitlines()[0] == "gamma,eta,code,located,x_unlocated,z_unlocated,stderr_located,stderr_x,stderr_z,samples,seed"
    (r,) = rows(out)
    assert all(float(r[k]) == 0 for k in ("located", "x_unlocated", "z_unlocated"))


def test_simulate_bitwise_reproducible(tmp_path, capsys):
    outs = []
    for w in (1, 2, 8):
        path = tmp_path / f"w{w}.csv"
        code, _, _ = run(capsys, "simulate", "--gamma", "1e-3", "--eta", "1e-5,2e-5", "--samples", "20000", "--seed", "3", "--workers", str(w), "--out", str(path))
        assert code == EXIT_OK
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] == outs[2]
    assert len(rows(outs[0].decode())) == 2


def test_simulate_below_threshold(capsys):
    code, out, _ = run(capsys, "simulate", "--gamma", "1e-4", "--eta", "1e-6", "--samples", "100000")
    (r,) = rows(out)
    lvl1 = rates_xx90(PhysicalNoise(1e-4, 1e-6))
    assert float(r["located"]) < lvl1.located
    # Hadamards turn the large level-1 X rates into level-2 Z errors, so only the
    # located part and the totals are compared
    total = sum(float(r[k]) for k in ("located", "x_unlocated", "z_unlocated"))
    assert total < sum(lvl1.as_tuple())


def test_simulate_dump(tmp_path, capsys):
    path = tmp_path / "c.txt"
    code, _, _ = run(capsys, "simulate", "--zero-noise", "--samples", "10", "--dump-circuit", str(path))
    assert code == EXIT_OK
    first = path.read_text().splitlines()[0].split()
    assert first[0] == "1" and first[1] in ("Prep0", "H", "XXp90", "MeasZ")


# ---------------------------------------------------------------- threshold and resources


def toy_map(tmp_path):
    # every output is 30 (l + x + z)^2
    coef = np.array([[30.0, 60, 60, 30, 60, 30]] * 3)
    path = tmp_path / "map.json"
    path.write_text(RateMap(2, coef, (0, 0, 0), (0, 0, 0)).to_json())
    return path


def test_threshold_with_map(tmp_path, capsys):
    csv_path, svg_path = tmp_path / "t.csv", tmp_path / "t.svg"
    code, _, _ = run(
        capsys, "threshold", "--map", str(toy_map(tmp_path)), "--samples", "2000", "--rays", "3", "--tol", "0.3",
        "--out", str(csv_path), "--svg", str(svg_path),
    )
    assert code == EXIT_OK
    text = csv_path.read_text()
    assert text.splitlines()[0] == "gamma,eta,tol,converged_levels"
    assert len(rows(text)) == 3
    svg = svg_path.read_text()
    assert svg.startswith("<svg") and "γ (loss)" in svg and "η (depolarizing-related rate)" in svg
    assert "<polygon" in svg


def test_threshold_budget(tmp_path, capsys):
    code, out, err = run(capsys, "threshold", "--map", str(toy_map(tmp_path)), "--samples", "1000", "--rays", "3", "--max-evaluations", "2")
    assert code == EXIT_BUDGET
    assert out.splitlines()[0] == "gamma,eta,tol,converged_levels,status"
    assert "partial" in out and "budget" in err


def test_bad_map_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    code, _, err = run(capsys, "threshold", "--map", str(bad))
    assert code == EXIT_INVALID and "rate map" in err


def test_resources(tmp_path, capsys):
    path = tmp_path / "table.csv"
    code, out, _ = run(capsys, "resources", "--out", str(path))
    assert code == EXIT_OK
    assert "448" in out and "2048" in out and "R_XX 128" in out
    table = rows(path.read_text())
    parity = next(r for r in table if r["scheme"] == "parity states" and r["source"] == "published")
    assert (parity["loss_threshold"], parity["depolarizing_threshold"], parity["resources"]) == ("0.002", "2.4e-05", "180000")
