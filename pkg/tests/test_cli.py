import csv
import json

import numpy as np
import pytest

from rodwave.cli import CSV_COLUMNS, main

BASE = """
[model]
alpha = 0.05
r = 0.5
p = 4.0
m = 2.0

[mesh]
n_elem = 32

[initial]
profile = "sine_halfwave"
amplitude = 1.0

[step]
dt = 1e-3
t_end = {t_end}
"""


def write_config(tmp_path, text, name="cfg.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_run_zero_horizon_single_row(tmp_path, capsys):
    cfg = write_config(tmp_path, BASE.format(t_end="0.0"))
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0
    rows = read_rows(out / "trajectory.csv")
    assert len(rows) == 1
    assert list(rows[0].keys()) == CSV_COLUMNS
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["termination"] == "t_end"
    assert manifest["n_samples"] == 1


def test_run_writes_trajectory_and_thresholds(tmp_path):
    cfg = write_config(tmp_path, BASE.format(t_end="0.1"))
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0
    rows = read_rows(out / "trajectory.csv")
    assert len(rows) == 101
    thresholds = json.loads((out / "thresholds.json").read_text())
    assert thresholds["alpha1"] == pytest.approx(thresholds["B"] ** -2.0)
    # E column recomputable from the stored channels
    for row in rows[:: 20]:
        e = (0.5 * float(row["h1semi_u"]) ** 2 - float(row["lp_u_p"]) / 4.0
             + 0.5 * float(row["l2_ut"]) ** 2 + 0.5 * float(row["l2g1_ut"]) ** 2)
        assert float(row["E"]) == pytest.approx(e, rel=1e-12)


def test_run_missing_field_exits_nonzero(tmp_path, capsys):
    cfg = write_config(tmp_path, BASE.format(t_end="0.1").replace("p = 4.0\n", ""))
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) != 0
    assert "model.p" in capsys.readouterr().err


def test_run_blowup_is_exit_zero(tmp_path):
    text = BASE.format(t_end="5.0").replace('profile = "sine_halfwave"',
                                            'profile = "linear_ramp"')
    text = text.replace("amplitude = 1.0", "amplitude = 3.0")
    text = text.replace("dt = 1e-3", "dt = 1e-4")
    text = text.replace("t_end = 5.0", "t_end = 5.0\nblowup_guard = 100.0")
    cfg = write_config(tmp_path, text)
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["termination"] == "blowup"


def test_thresholds_injected_b(tmp_path, capsys):
    out = tmp_path / "thr"
    assert main(["thresholds", "--p", "4.0", "--inject-b", "1.0",
                 "--out", str(out)]) == 0
    payload = json.loads((out / "thresholds.json").read_text())
    assert payload["alpha1"] == pytest.approx(1.0)
    assert payload["d"] == pytest.approx(0.25)


def test_thresholds_refinement_consistency(tmp_path):
    vals = {}
    for n in (256, 512):
        out = tmp_path / f"thr{n}"
        assert main(["thresholds", "--p", "4.0", "--mesh-n", str(n),
                     "--space", "H1_Gamma0", "--out", str(out)]) == 0
        vals[n] = json.loads((out / "thresholds.json").read_text())["B"]
    assert abs(vals[256] - vals[512]) / vals[512] <= 1e-3


def test_thresholds_rejects_p_two(tmp_path, capsys):
    assert main(["thresholds", "--p", "2.0", "--out", str(tmp_path)]) != 0
    assert "p > 2 required" in capsys.readouterr().err


def test_single_cell_sweep_matches_run_summary(tmp_path):
    text = BASE.format(t_end="0.1") + "\n[sweep]\namplitude = [1.0]\n"
    cfg = write_config(tmp_path, text)
    out = tmp_path / "sw"
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    rows = read_rows(out / "sweep.csv")
    assert len(rows) == 1
    assert rows[0]["termination"] == "t_end"

    run_out = tmp_path / "single"
    assert main(["run", "--config", cfg, "--out", str(run_out)]) == 0
    traj = read_rows(run_out / "trajectory.csv")
    assert float(rows[0]["E0"]) == pytest.approx(float(traj[0]["E"]), rel=1e-14)
    assert float(rows[0]["h1semi0"]) == pytest.approx(float(traj[0]["h1semi_u"]),
                                                      rel=1e-14)


def test_sweep_jobs_determinism(tmp_path):
    text = BASE.format(t_end="0.05") + \
        "\n[sweep]\namplitude = [0.5, 1.0, 1.5, 2.0]\nalpha = [0.0, 0.05]\n"
    cfg = write_config(tmp_path, text)
    out1, out8 = tmp_path / "sw1", tmp_path / "sw8"
    assert main(["sweep", "--config", cfg, "--out", str(out1), "--jobs", "1"]) == 0
    assert main(["sweep", "--config", cfg, "--out", str(out8), "--jobs", "8"]) == 0
    assert (out1 / "sweep.csv").read_bytes() == (out8 / "sweep.csv").read_bytes()


def test_sweep_hypothesis_flags_along_amplitude_ramp(tmp_path):
    amps = [0.5, 1.0, 1.5, 2.5, 3.0]
    text = BASE.format(t_end="0.01").replace('profile = "sine_halfwave"',
                                             'profile = "linear_ramp"')
    text += "\n[sweep]\namplitude = [" + ", ".join(str(a) for a in amps) + "]\n"
    cfg = write_config(tmp_path, text)
    out = tmp_path / "sw"
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    rows = read_rows(out / "sweep.csv")
    # ramp initial energy has the closed form A^2/2 - A^4/20
    for row, a in zip(rows, amps):
        assert float(row["E0"]) == pytest.approx(a * a / 2.0 - a ** 4 / 20.0,
                                                 rel=1e-10)
    # the gradient flag flips once, monotonically in amplitude
    flags = [row["grad0_gt_alpha1"] == "True" for row in rows]
    assert flags == sorted(flags)
    assert not flags[0] and flags[-1]


def test_picard_subcommand_reports_ratios(tmp_path):
    text = BASE.format(t_end="0.02") + "\n[picard]\nhorizons = [0.02, 0.08]\n"
    cfg = write_config(tmp_path, text)
    out = tmp_path / "pic"
    assert main(["picard", "--config", cfg, "--out", str(out)]) == 0
    payload = json.loads((out / "picard.json").read_text())
    assert len(payload["horizons"]) == 2
    for entry in payload["horizons"]:
        assert all(r < 1.0 for r in entry["ratios"])


def test_oracle_compare_gap_table(tmp_path):
    text = BASE.format(t_end="0.1") + "\n[oracle]\nn_modes = [2, 4]\n"
    cfg = write_config(tmp_path, text)
    out = tmp_path / "oc"
    assert main(["oracle-compare", "--config", cfg, "--out", str(out)]) == 0
    rows = read_rows(out / "oracle_gaps.csv")
    gaps = [float(r["sup_l2_gap"]) for r in rows]
    assert gaps[0] > gaps[1]


def test_config_error_exit_code(tmp_path, capsys):
    missing = str(tmp_path / "nope.toml")
    assert main(["run", "--config", missing, "--out", str(tmp_path)]) == 2
    assert "config error" in capsys.readouterr().err
