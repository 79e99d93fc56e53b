from __future__ import annotations

import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from vortexshape.cli import EXIT_CONFIG, EXIT_HALTED, EXIT_OK, main

GOLDEN = Path(__file__).parent / "golden"


def write_config(tmp_path: Path, data: dict, name: str = "config.json") -> str:
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_golden_tetrahedron_shape(tmp_path):
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(GOLDEN / "tetrahedron_shape.json"), "--out", str(out)]) == EXIT_OK
    got = (out / "trajectory.csv").read_text().splitlines()
    want = (GOLDEN / "tetrahedron_shape.csv").read_text().splitlines()
    assert got[0] == want[0]
    assert got[1] == want[1]
    h_got, d_got = read_csv(out / "trajectory.csv")
    h_want, d_want = read_csv(GOLDEN / "tetrahedron_shape.csv")
    assert d_got.shape == d_want.shape
    assert np.allclose(d_got, d_want, rtol=1e-12, atol=1e-13)


def test_golden_values_are_the_equilibrium():
    header, data = read_csv(GOLDEN / "tetrahedron_shape.csv")
    assert header == [
        "t", "s_1", "s_2", "s_3",
        "re_mu_1_2", "im_mu_1_2", "re_mu_1_3", "im_mu_1_3", "re_mu_2_3", "im_mu_2_3",
        "H", "C1", "C2", "f_1_2", "f_1_3", "f_2_3",
    ]  # fmt: skip
    row = dict(zip(header, data[0]))
    m = 8 / (3 * np.sqrt(3))
    assert np.allclose([row["s_1"], row["s_2"], row["s_3"]], 4 / 3)
    assert np.allclose([row["im_mu_1_2"], row["im_mu_1_3"], row["im_mu_2_3"]], [m, -m, m])
    assert np.isclose(row["C1"], 10.0) and np.isclose(row["C2"], 160 / 3)
    assert np.isclose(row["H"], -35 * np.log(8 / 3) / (4 * np.pi))
    # near-constant series
    assert np.max(np.abs(data[:, 1:10] - data[0, 1:10])) <= 1e-12


def test_simulate_sphere_columns_and_summary(tmp_path):
    cfg = write_config(
        tmp_path,
        {"level": "sphere", "gamma": [1.0, 1.0], "initial": {"positions": [[0, 0, 1], [0, 0, -1]]},
         "integrator": {"t_end": 2.0, "sample_dt": 1.0}},
    )  # fmt: skip
    out = tmp_path / "out"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == EXIT_OK
    header, data = read_csv(out / "trajectory.csv")
    assert header == ["t", "x1_1", "x1_2", "x1_3", "x2_1", "x2_2", "x2_3", "H", "I_1", "I_2", "I_3"]
    assert np.allclose(data[:, 1:7], [0, 0, 1, 0, 0, -1])
    summary = json.loads((out / "summary.json").read_text())
    assert summary["halted"] is False and summary["halt_reason"] is None
    assert set(summary["drifts"]) == {"H", "I_1", "I_2", "I_3"}


def test_simulate_lifted_noether_drifts(tmp_path):
    cfg = write_config(
        tmp_path,
        {"level": "lifted", "gamma": [1.0, -0.6, 1.4], "initial": {"preset": "random", "seed": 3},
         "integrator": {"t_end": 2.0, "rtol": 1e-11, "atol": 1e-11}},
    )  # fmt: skip
    out = tmp_path / "out"
    assert main(["simulate", "--config", cfg, "--out", str(out), "--tolerance", "1e-8"]) == EXIT_OK
    header, _ = read_csv(out / "trajectory.csv")
    assert header[1:4] == ["re_z1", "re_z2", "re_z3"]
    summary = json.loads((out / "summary.json").read_text())
    for k in ("J_1", "J_2", "J_3", "K_11_im", "K_22_im", "K_12_re", "K_12_im"):
        assert summary["drifts"][k] <= 1e-8, k
    assert all(summary["within_tolerance"].values())


def test_simulate_shape_from_coordinates(tmp_path):
    cfg = write_config(
        tmp_path,
        {"level": "shape", "gamma": [1.0, 1.0, 1.0], "initial": {"shape": {"s": [1.0, 1.0], "mu": [[-1.0, 0.0]]}},
         "integrator": {"t_end": 1.0}},
    )  # fmt: skip
    out = tmp_path / "out"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == EXIT_OK
    _, data = read_csv(out / "trajectory.csv")
    assert np.allclose(data[-1, 1:5], [1.0, 1.0, -1.0, 0.0], atol=1e-10)


def test_seed_flag_is_reproducible(tmp_path):
    data = {"level": "sphere", "gamma": [1.0, 2.0, -1.0], "initial": {"preset": "random", "seed": 0},
            "integrator": {"t_end": 0.5}}  # fmt: skip
    cfg = write_config(tmp_path, data)
    for name in ("a", "b"):
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path / name), "--seed", "5"]) == EXIT_OK
    a = (tmp_path / "a" / "trajectory.csv").read_text()
    assert a == (tmp_path / "b" / "trajectory.csv").read_text()
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "c")]) == EXIT_OK
    assert a != (tmp_path / "c" / "trajectory.csv").read_text()


def test_halted_run_exit_code(tmp_path):
    cfg = write_config(
        tmp_path,
        {"level": "sphere", "gamma": [1.0, 2.0, -1.0], "initial": {"preset": "random", "seed": 4},
         "integrator": {"t_end": 10.0, "max_steps": 5}},
    )  # fmt: skip
    out = tmp_path / "out"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == EXIT_HALTED
    summary = json.loads((out / "summary.json").read_text())
    assert summary["halted"] and "maximum number of steps" in summary["halt_reason"]
    assert summary["t_final"] < 10.0


def test_invalid_initial_shape_is_config_error(tmp_path, capsys):
    # log argument of the (1,2) pair is negative: |μ|²/(s₁s₂) > 4
    cfg = write_config(
        tmp_path,
        {"level": "shape", "gamma": [1.0, 1.0, 1.0], "initial": {"shape": {"s": [1.0, 1.0], "mu": [[3.0, 0.0]]}}},
    )
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "out")]) == EXIT_CONFIG
    assert "pair (1,2)" in capsys.readouterr().err


@pytest.mark.parametrize(
    "data, field",
    [
        ({"gamma": [1.0, 0.0], "initial": {"preset": "random"}}, "gamma"),
        ({"initial": {"preset": "random"}}, "gamma"),
        ({"gamma": [1.0, 1.0]}, "initial"),
        ({"gamma": [1.0, 1.0], "N": 3, "initial": {"preset": "random"}}, "N"),
        ({"gamma": [1.0, 1.0], "R": -1, "initial": {"preset": "random"}}, "R"),
        ({"level": "bogus", "gamma": [1.0], "initial": {"preset": "random"}}, "level"),
        ({"gamma": [1.0, 1.0], "initial": {"positions": [[0, 0, 1], [0, 0, 1.1]]}}, "initial.positions"),
        ({"gamma": [1.0, 1.0, 1.0], "initial": {"preset": "tetrahedron"}}, "initial.preset"),
        ({"gamma": [1.0, 1.0], "initial": {"preset": "random"}, "integrator": {"method": "euler"}}, "integrator"),
        ({"gamma": [1.0, 1.0], "initial": {"preset": "random"}, "integrator": {"stepz": 1}}, "integrator.stepz"),
    ],
)
def test_config_errors_name_the_field(tmp_path, capsys, data, field):
    cfg = write_config(tmp_path, data)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "out")]) == EXIT_CONFIG
    assert f"'{field}" in capsys.readouterr().err


def test_unreadable_and_invalid_json(tmp_path, capsys):
    assert main(["simulate", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["simulate", "--config", str(bad)]) == EXIT_CONFIG
    assert "not valid JSON" in capsys.readouterr().err


def test_usage_error_is_config_error():
    with pytest.raises(SystemExit) as info:
        main(["simulate"])
    assert info.value.code == EXIT_CONFIG


def test_crosscheck_random_n3(tmp_path, capsys):
    cfg = write_config(
        tmp_path, {"gamma": [1.0, -0.5, 2.0], "initial": {"preset": "random", "seed": 1}, "integrator": {"t_end": 10.0}}
    )
    out = tmp_path / "out"
    assert main(["crosscheck", "--config", cfg, "--out", str(out)]) == EXIT_OK
    report = json.loads((out / "crosscheck.json").read_text())
    assert report["ok"] and len(report["checks"]) == 2
    assert all(ch["deviation"] <= 1e-6 for ch in report["checks"])
    assert capsys.readouterr().out.count("PASS") == 2


def test_crosscheck_single_vortex(tmp_path):
    cfg = write_config(tmp_path, {"gamma": [2.0], "initial": {"positions": [[0, 1, 0]]}, "integrator": {"t_end": 1}})
    out = tmp_path / "out"
    assert main(["crosscheck", "--config", cfg, "--out", str(out)]) == EXIT_OK
    report = json.loads((out / "crosscheck.json").read_text())
    assert report["checks"][0]["deviation"] <= 1e-15


def test_crosscheck_fails_above_tolerance(tmp_path):
    cfg = write_config(
        tmp_path,
        {"gamma": [1.0, -0.5, 2.0], "initial": {"preset": "random", "seed": 1},
         "integrator": {"t_end": 2.0, "rtol": 1e-4, "atol": 1e-4}},
    )  # fmt: skip
    assert main(["crosscheck", "--config", cfg, "--tolerance", "1e-14"]) == EXIT_HALTED


@pytest.mark.parametrize(
    "gamma, verdict",
    [(["1", "2", "3", "4"], "stable"), (["-2", "-2", "-2", "-2"], "stable"), (["1", "1", "1", "-1"], "inconclusive")],
)
def test_stability_verdicts(tmp_path, capsys, gamma, verdict):
    out = tmp_path / "out"
    assert main(["stability", "--gamma", *gamma, "--out", str(out)]) == EXIT_OK
    report = json.loads((out / "stability.json").read_text())
    assert report["verdict"] == verdict
    assert len(report["minors"]) == len(report["closed_minors"]) == 9
    text = capsys.readouterr().out
    assert f"verdict: {verdict}" in text and "closed d_k" in text


def test_stability_rejects_bad_input(tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        main(["stability", "--gamma", "1", "2", "3"])
    assert info.value.code == EXIT_CONFIG
    cfg = write_config(tmp_path, {"gamma": [1.0, 2.0, 3.0]})
    assert main(["stability", "--config", cfg]) == EXIT_CONFIG
    assert "N=4" in capsys.readouterr().err
    cfg = write_config(tmp_path, {"gamma": [1.0, 2.0, 0.0, 1.0]}, "zero.json")
    assert main(["stability", "--config", cfg]) == EXIT_CONFIG
    cfg = write_config(tmp_path, {"gamma": [1.0, 1.0, 1.0, 1.0], "stability": {"phi_slope": -1.0}}, "bad.json")
    assert main(["stability", "--config", cfg]) == EXIT_CONFIG
    assert "not a critical point family" in capsys.readouterr().err


@pytest.mark.parametrize("level", ["sphere", "lifted", "liepoisson", "shape"])
def test_invariants_reproduce_simulate(tmp_path, level):
    data = {"level": level, "gamma": [1.0, -0.7, 1.3], "R": 1.5, "initial": {"preset": "random", "seed": 2},
            "integrator": {"t_end": 1.0, "sample_dt": 0.25}}  # fmt: skip
    cfg = write_config(tmp_path, data)
    out = tmp_path / "sim"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == EXIT_OK
    inv = tmp_path / "inv"
    assert main(["invariants", str(out / "trajectory.csv"), "--config", cfg, "--out", str(inv)]) == EXIT_OK
    header, traj = read_csv(out / "trajectory.csv")
    ih, ivals = read_csv(inv / "invariants.csv")
    for k, name in enumerate(ih[1:], start=1):
        assert np.allclose(ivals[:, k], traj[:, header.index(name)], rtol=1e-14, atol=1e-15)
    assert json.loads((inv / "invariants.json").read_text())["level"] == level


def test_invariants_errors(tmp_path):
    bad = tmp_path / "traj.csv"
    bad.write_text("t,foo\n0.0,1.0\n")
    assert main(["invariants", str(bad), "--gamma", "1", "1"]) == EXIT_CONFIG
    good = tmp_path / "sphere.csv"
    good.write_text("t,x1_1,x1_2,x1_3\n0.0,0.0,0.0,1.0\n")
    assert main(["invariants", str(good)]) == EXIT_CONFIG
    assert main(["invariants", str(good), "--gamma", "1", "1"]) == EXIT_CONFIG


def test_module_entry_point(tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "vortexshape", "stability", "--gamma", "1", "1", "1", "1"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert res.returncode == 0 and "verdict: stable" in res.stdout
