import csv
import json

import pytest

from h2qse import __version__
from h2qse.cli import EXIT_CONFIG, RunConfig, main, read_config


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith(f"# h2qse {__version__} config=")
    return list(csv.DictReader(lines[1:]))


def test_exact_full_table(tmp_path):
    assert main(["exact", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "spectrum.csv")
    assert len(rows) == 45
    r075 = next(r for r in rows if r["R"] == "0.75")
    assert float(r075["E0"]) == pytest.approx(-1.1371, abs=1e-4)


def test_exact_missing_table(tmp_path, capsys):
    assert main(["exact", "--table", str(tmp_path / "none.csv"), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "table not found" in capsys.readouterr().err


def test_seed_required(tmp_path):
    assert main(["vqe", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_vqe_outputs(tmp_path):
    assert main(["vqe", "--seed", "7", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "vqe.json").read_text())
    assert doc["meta"]["version"] == __version__
    assert doc["n_evaluations"] == 240
    assert abs(doc["error"]) < 1.6e-3
    assert len(read_csv(tmp_path / "trajectory.csv")) == 12


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nseed = 7\nparticles = 5\niterations = 3\nr = 0.75\n")
    assert read_config(cfg)["particles"] == 5
    out = tmp_path / "o"
    assert main(["vqe", "--config", str(cfg), "--iterations", "2", "--out", str(out)]) == 0
    assert json.loads((out / "vqe.json").read_text())["n_evaluations"] == 10


@pytest.mark.parametrize("text", ["bogus = 1\n", "particles = many\n", "seed 7\n"])
def test_bad_config(tmp_path, text):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    assert main(["exact", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_bad_flags(tmp_path):
    assert main(["sweep", "--seed", "1", "--r", "", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["qse", "--ops", "nope", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["qse", "--shots", "-3", "--seed", "1", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["vqe", "--seed", "1", "--r", "0.75,1.55", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["hist", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_digest_ignores_output_dir():
    assert RunConfig(seed=1, out="a").digest() == RunConfig(seed=1, out="b").digest()
    assert RunConfig(seed=1).digest() != RunConfig(seed=2).digest()


def test_qse_set_comparison(tmp_path):
    args = ["qse", "--r", "0.75", "--noise", "pauli_x:0.1", "--ops", "linear_response,zz_pair,single_x", "--out", str(tmp_path)]
    assert main(args) == 0
    rows = read_csv(tmp_path / "qse_compare.csv")
    assert list(rows[0]) == ["R", "exact_ground", "raw_energy", "linear_response", "zz_pair", "single_x"]
    doc = json.loads((tmp_path / "qse.json").read_text())
    assert set(doc["points"][0]["sets"]) == {"linear_response", "zz_pair", "single_x"}


def test_qse_sampled(tmp_path):
    args = ["qse", "--r", "0.75", "--shots", "100000", "--seed", "3", "--out", str(tmp_path)]
    assert main(args) == 0
    row = read_csv(tmp_path / "qse_compare.csv")[0]
    assert float(row["linear_response"]) == pytest.approx(float(row["exact_ground"]), abs=0.02)


def test_sweep_qse_hist_chain(tmp_path):
    assert main(["sweep", "--seed", "7", "--r", "0.05,0.1,0.15", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "sweep.csv")
    assert [r["iterations"] for r in rows] == ["12", "6", "6"]
    assert main(["qse", "--source", str(tmp_path / "sweep.json"), "--out", str(tmp_path)]) == 0
    assert len(read_csv(tmp_path / "qse_compare.csv")) == 3
    assert main(["hist", "--input", str(tmp_path / "sweep.json"), "--out", str(tmp_path)]) == 0
    errors = read_csv(tmp_path / "errors.csv")
    assert {r["R"] for r in errors} == {"0.05", "0.1", "0.15"}


def test_hist_from_energy_list(tmp_path):
    src = tmp_path / "e.txt"
    src.write_text("energy\n" + "\n".join(["-1.0"] * 5 + ["-0.5"] * 5) + "\n")
    assert main(["hist", "--input", str(src), "--out", str(tmp_path)]) == 0
    peaks = read_csv(tmp_path / "peaks.csv")
    assert [round(float(p["energy"]), 2) for p in peaks] == [-1.0, -0.5]


def test_spurious_demo(tmp_path, capsys):
    assert main(["spurious-demo", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "spurious_demo.json").read_text())
    cases = {(c["state"], c["ops"]): c for c in doc["cases"]}
    assert cases[("pauli_x_q1", "si_nine")]["rank"] == 7
    assert cases[("maximally_mixed", "full_p2")]["rank"] == 16
    assert "si_six" in capsys.readouterr().out


def test_cutoff_defaults():
    assert RunConfig().effective_cutoff == 1e-8
    assert RunConfig(shots="10000").effective_cutoff == pytest.approx(0.01)
    assert RunConfig(shots="10000", cutoff=1e-3).effective_cutoff == 1e-3
