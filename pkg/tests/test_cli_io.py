"""Config parsing, CSV round trips, commands, exit codes, artifact determinism."""
import subprocess
import sys

import numpy as np
import pytest

from arcplant import ConfigError, DataError, simulate
from arcplant.cli_io import (
    cmd_simulate,
    cmd_step,
    cmd_sweep,
    cmd_validate,
    echo_config,
    load_config,
    main,
    read_series_csv,
    read_tap_table_csv,
    read_trajectory_csv,
    write_series_csv,
    write_trajectory_csv,
)

MINIMAL = """\
[hydraulics]
K = 15.0
T = 0.1

[circuit]
U1 = 34641.016151377546
kT = 40.0

[input]
kind = "step"
u = 1.0

[run]
dt = 0.002
t_end = 1.0
L0 = 20.0
seed = 11
"""


def write_config(tmp_path, text=MINIMAL, name="scenario.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


# ── loading ───────────────────────────────────────────────────────────────────

def test_load_minimal_config(tmp_path):
    rc = load_config(write_config(tmp_path))
    assert rc.scenario is not None
    assert rc.scenario.lti.K == 15.0
    assert rc.scenario.dt == 0.002
    assert rc.scenario.seed == 11
    assert rc.circuit.kT == 40.0
    assert rc.controller.kind == "none"
    assert rc.warnings == ()


def test_unknown_key_is_rejected(tmp_path):
    bad = MINIMAL.replace("kT = 40.0", "kT = 40.0\nXtypo = 1.0")
    with pytest.raises(ConfigError, match=r"\[circuit\] unknown key 'Xtypo'"):
        load_config(write_config(tmp_path, bad))


def test_missing_primary_voltage_is_named(tmp_path):
    bad = MINIMAL.replace("U1 = 34641.016151377546\n", "")
    with pytest.raises(ConfigError, match=r"\[circuit\] missing required key 'U1'"):
        load_config(write_config(tmp_path, bad))


def test_toml_syntax_errors_are_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, "[circuit\nU1 = 1"))


def test_missing_file_is_config_error(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "nope.toml")


def test_stage_and_beta_are_exclusive(tmp_path):
    bad = MINIMAL.replace('kind = "step"', 'kind = "step"').replace(
        "kT = 40.0", 'kT = 40.0\nbeta = 8.0\nstage = "melting"')
    with pytest.raises(ConfigError, match="mutually exclusive"):
        load_config(write_config(tmp_path, bad))


def test_stage_preset_resolves_beta(tmp_path):
    cfg = MINIMAL.replace("kT = 40.0", 'kT = 40.0\nstage = "oxidization"')
    rc = load_config(write_config(tmp_path, cfg))
    assert rc.circuit.beta == 3.7


def test_tap_selection_from_table(tmp_path, config_dir):
    cfg = MINIMAL.replace(
        "kT = 40.0",
        f'kT = 40.0\ntap = 7\ntap_table = "{config_dir}/tap_table_example.csv"')
    rc = load_config(write_config(tmp_path, cfg))
    assert (rc.circuit.Xr, rc.circuit.XT) == (1.1, 0.9)


def test_tap_requires_table_and_excludes_explicit_reactances(tmp_path, config_dir):
    with pytest.raises(ConfigError, match="given together"):
        load_config(write_config(tmp_path, MINIMAL.replace("kT = 40.0", "kT = 40.0\ntap = 7")))
    both = MINIMAL.replace(
        "kT = 40.0",
        f'kT = 40.0\nXr = 1.0\ntap = 7\ntap_table = "{config_dir}/tap_table_example.csv"')
    with pytest.raises(ConfigError, match="conflict"):
        load_config(write_config(tmp_path, both))


def test_unknown_tap_is_config_error(tmp_path, config_dir):
    cfg = MINIMAL.replace(
        "kT = 40.0",
        f'kT = 40.0\ntap = 99\ntap_table = "{config_dir}/tap_table_example.csv"')
    with pytest.raises(ConfigError, match="tap 99"):
        load_config(write_config(tmp_path, cfg))


def test_direct_kt_wins_over_physical_with_warning(tmp_path):
    cfg = MINIMAL.replace(
        "K = 15.0\nT = 0.1",
        "K = 20.0\nT = 0.1\nk1 = 2.31e-4\nk2 = -3.021146496815287e-9")
    rc = load_config(write_config(tmp_path, cfg))
    assert rc.scenario.lti.K == 20.0
    assert len(rc.warnings) == 1 and "precedence" in rc.warnings[0]


def test_physical_parameters_alone_derive_the_plant(tmp_path):
    cfg = MINIMAL.replace(
        "K = 15.0\nT = 0.1",
        "k1 = 2.31e-4\nk2 = -3.021146496815287e-9")
    rc = load_config(write_config(tmp_path, cfg))
    assert rc.scenario.lti.K == pytest.approx(15.0, rel=1e-12)
    assert rc.scenario.lti.T == pytest.approx(0.1, rel=1e-12)
    assert rc.warnings == ()


def test_sweep_only_config_has_no_scenario(tmp_path):
    cfg = "[circuit]\nU1 = 34641.0\nkT = 40.0\n"
    rc = load_config(write_config(tmp_path, cfg))
    assert rc.scenario is None
    assert rc.circuit.U1 == 34641.0


def test_input_key_exclusivity(tmp_path):
    bad = MINIMAL.replace('kind = "step"\nu = 1.0',
                          'kind = "closed_loop"\nu = 1.0')
    with pytest.raises(ConfigError, match="does not apply"):
        load_config(write_config(tmp_path, bad))


def test_env_seed_override(tmp_path, monkeypatch):
    monkeypatch.setenv("ARCPLANT_SEED", "777")
    rc = load_config(write_config(tmp_path))
    assert rc.scenario.seed == 777
    monkeypatch.setenv("ARCPLANT_SEED", "x")
    with pytest.raises(ConfigError, match="ARCPLANT_SEED"):
        load_config(write_config(tmp_path))


def test_shipped_configs_load(config_dir):
    for name in ("default.toml", "validate.toml", "closed_loop.toml"):
        rc = load_config(config_dir / name)
        assert rc.scenario is not None, name


# ── echo round trip ───────────────────────────────────────────────────────────

def test_echo_round_trip_reproduces_resolved_config(tmp_path, config_dir):
    for name in ("default.toml", "validate.toml", "closed_loop.toml"):
        rc = load_config(config_dir / name)
        echo_path = tmp_path / f"echo_{name}"
        echo_path.write_text(echo_config(rc))
        rc2 = load_config(echo_path)
        assert rc2.scenario == rc.scenario, name
        assert rc2.controller == rc.controller, name
        assert rc2.circuit == rc.circuit, name


def test_echo_round_trip_minimal(tmp_path):
    rc = load_config(write_config(tmp_path))
    echo_path = tmp_path / "echo.toml"
    echo_path.write_text(echo_config(rc))
    assert load_config(echo_path).scenario == rc.scenario


# ── CSV round trips ───────────────────────────────────────────────────────────

def test_trajectory_csv_round_trip(tmp_path, config_dir):
    rc = load_config(config_dir / "default.toml")
    traj = simulate(rc.scenario)
    path = tmp_path / "traj.csv"
    write_trajectory_csv(traj, path)
    cols = read_trajectory_csv(path)
    for name, field in (("t_s", "t"), ("u_V", "u"), ("L_mm", "L"), ("v_mm_s", "v"),
                        ("Ua_V", "Ua"), ("I_A", "I"), ("Z_ohm", "Z")):
        assert np.array_equal(cols[name], getattr(traj, field)), name


def test_series_csv_round_trip(tmp_path):
    t = np.arange(50) * 0.01
    y = np.sin(t) * 1e5
    path = tmp_path / "series.csv"
    write_series_csv(path, t, y, "I_A")
    series = read_series_csv(path)
    assert series.channel == "I_A"
    assert np.array_equal(series.t, t)
    assert np.array_equal(series.y, y)


def test_series_csv_comments_and_errors(tmp_path):
    path = tmp_path / "field.csv"
    path.write_text("# a comment\nt_s,I_A\n0.0,1.0\n0.1,2.0\n")
    series = read_series_csv(path)
    assert series.y[1] == 2.0
    path.write_text("t_s,I_A\n0.0,one\n0.1,2.0\n")
    with pytest.raises(DataError, match=":2:"):
        read_series_csv(path)
    path.write_text("time,I_A\n0.0,1.0\n0.1,2.0\n")
    with pytest.raises(DataError, match="t_s"):
        read_series_csv(path)
    with pytest.raises(DataError, match="not found"):
        read_series_csv(tmp_path / "missing.csv")


def test_tap_table_csv_parsing(tmp_path, config_dir):
    table = read_tap_table_csv(config_dir / "tap_table_example.csv")
    assert table.reactances(7) == (1.1, 0.9)
    bad = tmp_path / "taps.csv"
    bad.write_text("tap,Xr_ohm,XT_ohm\n1.5,1.0,1.0\n")
    with pytest.raises(ConfigError, match="integer"):
        read_tap_table_csv(bad)
    bad.write_text("tap,Xr,XT\n1,1.0,1.0\n")
    with pytest.raises(ConfigError, match="header"):
        read_tap_table_csv(bad)


# ── commands ──────────────────────────────────────────────────────────────────

def test_cmd_sweep_writes_monotone_table(tmp_path, config_dir):
    arts = cmd_sweep(config_dir / "default.toml", n=50, out_dir=tmp_path)
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "L_mm,Ua_V,I_A,Z_ohm"
    assert len(lines) == 51
    currents = [float(line.split(",")[2]) for line in lines[1:]]
    assert all(b < a for a, b in zip(currents, currents[1:]))
    assert arts.config_echo_path.endswith("resolved_config.toml")


def test_cmd_sweep_rejects_tiny_count(tmp_path, config_dir):
    with pytest.raises(ConfigError, match="at least 2"):
        cmd_sweep(config_dir / "default.toml", n=1, out_dir=tmp_path)


def test_cmd_step_identifies_the_shipped_plant(tmp_path, config_dir):
    arts, result = cmd_step(config_dir / "default.toml", out_dir=tmp_path)
    assert abs(result.K_hat - 15.0) <= 0.015
    assert abs(result.T_hat - 0.1) <= 0.001
    report = (tmp_path / "step_report.txt").read_text()
    assert "K_hat" in report
    meta = (tmp_path / "trajectory.meta").read_text()
    assert "clamp_count=0" in meta


def test_cmd_step_refuses_zero_magnitude(tmp_path):
    cfg = write_config(tmp_path, MINIMAL.replace("u = 1.0", "u = 0.0"))
    with pytest.raises(ConfigError, match="step magnitude must be nonzero"):
        cmd_step(cfg, out_dir=tmp_path)


def test_cmd_step_with_seeded_noise_recovers_gain(tmp_path):
    cfg = write_config(tmp_path, MINIMAL.replace(
        "seed = 11", "seed = 11\nv_noise_sigma = 0.75"))
    _, result = cmd_step(cfg, out_dir=tmp_path / "out")
    assert abs(result.K_hat - 15.0) <= 0.15  # within 1%


def test_cmd_simulate_closed_loop(tmp_path, config_dir):
    cmd_simulate(config_dir / "closed_loop.toml", out_dir=tmp_path)
    cols = read_trajectory_csv(tmp_path / "trajectory.csv")
    assert abs(cols["L_mm"][-1] - 25.0) <= 0.5


def test_cmd_validate_round_trip(tmp_path, config_dir):
    rc = load_config(config_dir / "validate.toml")
    traj = simulate(rc.scenario)
    field_path = tmp_path / "field.csv"
    write_series_csv(field_path, traj.t, traj.I, "I_A")
    arts, report = cmd_validate(config_dir / "validate.toml", field_path, out_dir=tmp_path)
    assert report.fit_percent == 100.0
    assert "fit" in (tmp_path / "fit_report.txt").read_text()


# ── entry point and exit codes ────────────────────────────────────────────────

def test_main_success_and_artifacts(tmp_path, config_dir):
    code = main(["step", "--config", str(config_dir / "default.toml"),
                 "--out", str(tmp_path)])
    assert code == 0
    for name in ("trajectory.csv", "trajectory.meta", "step_report.txt",
                 "resolved_config.toml"):
        assert (tmp_path / name).exists(), name


def test_main_config_error_exits_2(tmp_path):
    bad = write_config(tmp_path, MINIMAL.replace("U1 = 34641.016151377546\n", ""))
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path)]) == 2


def test_main_domain_error_exits_3(tmp_path):
    # supply too weak to strike an arc: E2' < alpha
    cfg = write_config(tmp_path, MINIMAL.replace("U1 = 34641.016151377546", "U1 = 500.0"))
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path)]) == 3


def test_main_data_error_exits_4(tmp_path, config_dir):
    field = tmp_path / "field.csv"
    field.write_text("t_s,P_W\n0.0,1.0\n0.1,2.0\n")
    code = main(["validate", "--config", str(config_dir / "validate.toml"),
                 "--field", str(field), "--out", str(tmp_path)])
    assert code == 4


def test_main_usage_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["step"])  # --config missing
    assert exc.value.code == 2


def test_rerunning_produces_bit_identical_artifacts(tmp_path, config_dir):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        assert main(["step", "--config", str(config_dir / "default.toml"),
                     "--out", str(out)]) == 0
    for name in ("trajectory.csv", "trajectory.meta", "step_report.txt",
                 "resolved_config.toml"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name


def test_rerunning_from_the_echoed_config_reproduces_outputs(tmp_path, config_dir):
    out1 = tmp_path / "orig"
    out2 = tmp_path / "echoed"
    assert main(["simulate", "--config", str(config_dir / "default.toml"),
                 "--out", str(out1)]) == 0
    assert main(["simulate", "--config", str(out1 / "resolved_config.toml"),
                 "--out", str(out2)]) == 0
    assert (out1 / "trajectory.csv").read_bytes() == (out2 / "trajectory.csv").read_bytes()


def test_module_entry_point_runs(tmp_path, config_dir):
    proc = subprocess.run(
        [sys.executable, "-m", "arcplant", "sweep",
         "--config", str(config_dir / "default.toml"),
         "--n", "10", "--out", str(tmp_path)],
        capture_output=True, text=True,
        cwd=str(config_dir.parent),
        env={"PYTHONPATH": str(config_dir.parent / "src"), "PATH": "/usr/bin:/bin"},
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "sweep.csv").exists()


def test_integrator_switch_changes_trajectory_bits(tmp_path, config_dir):
    out_zoh, out_rk4 = tmp_path / "zoh", tmp_path / "rk4"
    main(["simulate", "--config", str(config_dir / "default.toml"), "--out", str(out_zoh)])
    main(["simulate", "--config", str(config_dir / "default.toml"), "--out", str(out_rk4),
          "--integrator", "rk4"])
    meta = (out_rk4 / "trajectory.meta").read_text()
    assert "integrator=rk4" in meta
    assert (out_zoh / "trajectory.csv").read_bytes() != (out_rk4 / "trajectory.csv").read_bytes()
