"""Command-line surface, scenario config parsing, and CSV ingestion/emission.

Workflow: sweep (arc characteristic tables) -> step (open-loop step plus
parameter identification) -> simulate (open- or closed-loop trajectories) ->
validate (model-vs-field fit report).

Scenario files are TOML with sections [hydraulics], [circuit], [input],
[controller], [run].  Parsing is strict: unknown keys are errors, so typos in
physical constants cannot pass silently.  Every run writes the fully resolved
configuration next to its outputs; re-running with that echo reproduces the
artifacts bit-identically.  All numeric output uses shortest round-trip
formatting for the same reason.

Exit codes: 0 success, 2 config error, 3 domain error, 4 data error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .arc_circuit import (
    ArcOperatingPoint,
    CircuitParams,
    MeltingStagePreset,
    TapTable,
    characteristic_sweep,
)
from .errors import ConfigError, DataError, DomainError
from .hydraulics import DEFAULT_HYDRAULICS, HydraulicParams, PlantLTI, derive_lti
from .identification import (
    FieldSeries,
    FitReport,
    StepIdResult,
    StepRecord,
    identify_step,
    validate_against_field,
)
from .sim_engine import (
    TRAJECTORY_CHANNELS,
    ControllerConfig,
    InputProgram,
    Scenario,
    Trajectory,
    rk4_reference,
    simulate,
)

SWEEP_HEADER = ("L_mm", "Ua_V", "I_A", "Z_ohm")
SEED_ENV_VAR = "ARCPLANT_SEED"

_REQUIRED = object()


@dataclass(frozen=True)
class ResolvedConfig:
    """Fully resolved scenario file: every default filled, every path applied."""

    circuit: CircuitParams
    scenario: Scenario | None  # None when [hydraulics]/[input] are absent (sweep-only files)
    controller: ControllerConfig
    out_dir: str | None
    warnings: tuple[str, ...]


@dataclass(frozen=True)
class RunArtifacts:
    """Paths written by one command."""

    config_echo_path: str
    trajectory_csv: str | None = None
    report_path: str | None = None
    meta_path: str | None = None


# ---------------------------------------------------------------------------
# config loading

def _check_keys(section: str, raw: dict, allowed: set[str]):
    for key in raw:
        if key not in allowed:
            raise ConfigError(f"[{section}] unknown key {key!r}")


def _get_float(section: str, raw: dict, key: str, default=_REQUIRED) -> float:
    if key not in raw:
        if default is _REQUIRED:
            raise ConfigError(f"[{section}] missing required key {key!r}")
        return default
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"[{section}] key {key!r} must be a number, got {value!r}")
    return float(value)


def _get_int(section: str, raw: dict, key: str, default=_REQUIRED) -> int:
    if key not in raw:
        if default is _REQUIRED:
            raise ConfigError(f"[{section}] missing required key {key!r}")
        return default
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"[{section}] key {key!r} must be an integer, got {value!r}")
    return value


def _get_str(section: str, raw: dict, key: str, default=_REQUIRED) -> str:
    if key not in raw:
        if default is _REQUIRED:
            raise ConfigError(f"[{section}] missing required key {key!r}")
        return default
    value = raw[key]
    if not isinstance(value, str):
        raise ConfigError(f"[{section}] key {key!r} must be a string, got {value!r}")
    return value


def _get_bool(section: str, raw: dict, key: str, default: bool) -> bool:
    if key not in raw:
        return default
    value = raw[key]
    if not isinstance(value, bool):
        raise ConfigError(f"[{section}] key {key!r} must be a boolean, got {value!r}")
    return value


def _get_pairs(section: str, raw: dict, key: str) -> tuple[tuple[float, float], ...]:
    if key not in raw:
        return ()
    value = raw[key]
    if not isinstance(value, list):
        raise ConfigError(f"[{section}] key {key!r} must be an array of [time, value] pairs")
    pairs = []
    for entry in value:
        ok = (isinstance(entry, list) and len(entry) == 2
              and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry))
        if not ok:
            raise ConfigError(
                f"[{section}] key {key!r} entries must be [time, value] pairs, got {entry!r}")
        pairs.append((float(entry[0]), float(entry[1])))
    return tuple(pairs)


def _load_circuit(raw: dict, config_dir: Path) -> tuple[CircuitParams, tuple]:
    _check_keys("circuit", raw, {
        "U1", "kT", "X2", "R2", "alpha", "beta", "stage", "Xr", "XT", "E2",
        "tap", "tap_table", "beta_schedule",
    })
    if "stage" in raw and "beta" in raw:
        raise ConfigError("[circuit] keys 'beta' and 'stage' are mutually exclusive")
    beta = _get_float("circuit", raw, "beta", 12.0)
    if "stage" in raw:
        stage = _get_str("circuit", raw, "stage")
        try:
            beta = MeltingStagePreset(stage).beta
        except ValueError as exc:
            raise ConfigError(f"[circuit] {exc}") from None

    xr = _get_float("circuit", raw, "Xr", 0.0)
    xt = _get_float("circuit", raw, "XT", 0.0)
    tap = None
    if "tap" in raw or "tap_table" in raw:
        if "tap" not in raw or "tap_table" not in raw:
            raise ConfigError("[circuit] keys 'tap' and 'tap_table' must be given together")
        if "Xr" in raw or "XT" in raw:
            raise ConfigError(
                "[circuit] explicit Xr/XT conflict with tap selection; give one or the other")
        tap = _get_int("circuit", raw, "tap")
        table_path = config_dir / _get_str("circuit", raw, "tap_table")
        table = read_tap_table_csv(table_path)
        try:
            xr, xt = table.reactances(tap)
        except ValueError as exc:
            raise ConfigError(f"[circuit] {exc}") from None

    e2 = _get_float("circuit", raw, "E2", None) if "E2" in raw else None
    try:
        circuit = CircuitParams(
            U1=_get_float("circuit", raw, "U1"),
            kT=_get_float("circuit", raw, "kT"),
            X2=_get_float("circuit", raw, "X2", 3.0e-3),
            R2=_get_float("circuit", raw, "R2", 0.507e-3),
            alpha=_get_float("circuit", raw, "alpha", 9.0),
            beta=beta,
            Xr=xr,
            XT=xt,
            E2=e2,
        )
    except ValueError as exc:
        raise ConfigError(f"[circuit] {exc}") from None
    return circuit, _get_pairs("circuit", raw, "beta_schedule")


def _load_hydraulics(raw: dict) -> tuple[PlantLTI | None, tuple[str, ...]]:
    _check_keys("hydraulics", raw, {"K", "T", "m", "A", "k1", "k2", "c", "rho", "g"})
    warnings: list[str] = []
    direct = "K" in raw or "T" in raw
    physical = any(k in raw for k in ("m", "A", "k1", "k2", "c", "rho", "g"))
    lti = None
    if direct:
        try:
            lti = PlantLTI(K=_get_float("hydraulics", raw, "K"),
                           T=_get_float("hydraulics", raw, "T"))
        except ValueError as exc:
            raise ConfigError(f"[hydraulics] {exc}") from None
    if physical:
        try:
            params = HydraulicParams(
                m=_get_float("hydraulics", raw, "m", DEFAULT_HYDRAULICS.m),
                A=_get_float("hydraulics", raw, "A", DEFAULT_HYDRAULICS.A),
                k1=_get_float("hydraulics", raw, "k1"),
                k2=_get_float("hydraulics", raw, "k2"),
                c=_get_float("hydraulics", raw, "c", DEFAULT_HYDRAULICS.c),
                rho=_get_float("hydraulics", raw, "rho", DEFAULT_HYDRAULICS.rho),
                g=_get_float("hydraulics", raw, "g", DEFAULT_HYDRAULICS.g),
            )
        except ValueError as exc:
            raise ConfigError(f"[hydraulics] {exc}") from None
        derived = derive_lti(params)
        if lti is None:
            lti = derived
        else:
            # direct (K, T) wins; flag a physical-parameter mismatch above 1%
            if (abs(derived.K - lti.K) > 0.01 * lti.K
                    or abs(derived.T - lti.T) > 0.01 * lti.T):
                warnings.append(
                    f"[hydraulics] physical parameters derive (K, T) = "
                    f"({derived.K:.6g}, {derived.T:.6g}) but explicit "
                    f"({lti.K:.6g}, {lti.T:.6g}) takes precedence")
    return lti, tuple(warnings)


def _load_input(raw: dict) -> tuple[InputProgram, tuple[tuple[float, float], ...]]:
    _check_keys("input", raw, {"kind", "u", "t0", "schedule", "disturbance"})
    kind = _get_str("input", raw, "kind")
    if kind not in InputProgram.KINDS:
        raise ConfigError(
            f"[input] unknown kind {kind!r} (expected one of {InputProgram.KINDS})")
    forbidden = {
        "constant": ("t0", "schedule"),
        "step": ("schedule",),
        "schedule": ("u", "t0"),
        "closed_loop": ("u", "t0", "schedule"),
    }[kind]
    for key in forbidden:
        if key in raw:
            raise ConfigError(f"[input] key {key!r} does not apply to kind {kind!r}")
    try:
        if kind in ("constant", "step"):
            program = InputProgram(kind=kind, u=_get_float("input", raw, "u"),
                                   t0=_get_float("input", raw, "t0", 0.0))
        elif kind == "schedule":
            program = InputProgram(kind=kind, schedule=_get_pairs("input", raw, "schedule"))
        else:
            program = InputProgram(kind=kind)
    except ValueError as exc:
        raise ConfigError(f"[input] {exc}") from None
    return program, _get_pairs("input", raw, "disturbance")


def _load_controller(raw: dict) -> ControllerConfig:
    _check_keys("controller", raw, {"kind", "kp", "ki", "setpoint", "u_min", "u_max", "anti_windup"})
    try:
        return ControllerConfig(
            kind=_get_str("controller", raw, "kind", "none"),
            kp=_get_float("controller", raw, "kp", 0.0),
            ki=_get_float("controller", raw, "ki", 0.0),
            setpoint=_get_float("controller", raw, "setpoint", 0.0),
            u_min=_get_float("controller", raw, "u_min", -10.0),
            u_max=_get_float("controller", raw, "u_max", 10.0),
            anti_windup=_get_bool("controller", raw, "anti_windup", True),
        )
    except ValueError as exc:
        raise ConfigError(f"[controller] {exc}") from None


def load_config(path) -> ResolvedConfig:
    """Load and fully validate a scenario file (strict: unknown keys are errors)."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None

    _check_keys("<top level>", doc, {"hydraulics", "circuit", "input", "controller", "run"})
    for section in ("hydraulics", "circuit", "input", "controller", "run"):
        if section in doc and not isinstance(doc[section], dict):
            raise ConfigError(f"[{section}] must be a table")
    if "circuit" not in doc:
        raise ConfigError("missing required section [circuit]")

    circuit, beta_schedule = _load_circuit(doc["circuit"], path.parent)
    lti, warnings = _load_hydraulics(doc.get("hydraulics", {}))
    program = disturbance = None
    if "input" in doc:
        program, disturbance = _load_input(doc["input"])
    controller = _load_controller(doc.get("controller", {}))

    run_raw = doc.get("run", {})
    _check_keys("run", run_raw, {
        "dt", "t_end", "L0", "seed", "v_noise_sigma", "z_noise_sigma", "out_dir",
    })
    seed = _get_int("run", run_raw, "seed", 0)
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed:
        try:
            seed = int(env_seed)
        except ValueError:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {env_seed!r}") from None
    out_dir = _get_str("run", run_raw, "out_dir", None) if "out_dir" in run_raw else None

    scenario = None
    if lti is not None and program is not None:
        try:
            scenario = Scenario(
                lti=lti,
                circuit=circuit,
                input=program,
                disturbance=disturbance,
                beta_schedule=beta_schedule,
                dt=_get_float("run", run_raw, "dt", 0.002),
                t_end=_get_float("run", run_raw, "t_end", 1.0),
                L0=_get_float("run", run_raw, "L0", 20.0),
                seed=seed,
                v_noise_sigma=_get_float("run", run_raw, "v_noise_sigma", 0.0),
                z_noise_sigma=_get_float("run", run_raw, "z_noise_sigma", 0.0),
            )
        except ValueError as exc:
            raise ConfigError(f"[run] {exc}") from None
    elif beta_schedule:
        raise ConfigError("[circuit] beta_schedule needs [hydraulics] and [input] sections")

    return ResolvedConfig(circuit=circuit, scenario=scenario, controller=controller,
                          out_dir=out_dir, warnings=warnings)


# ---------------------------------------------------------------------------
# config echo

def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)  # shortest round-trip form, valid TOML
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {value!r}")


def echo_config(rc: ResolvedConfig) -> str:
    """Render the resolved config back to TOML; loading it reproduces the run."""
    lines: list[str] = []

    def emit(section: str, items: list[tuple[str, object]]):
        lines.append(f"[{section}]")
        for key, value in items:
            lines.append(f"{key} = {_toml_value(value)}")
        lines.append("")

    sc = rc.scenario
    if sc is not None:
        emit("hydraulics", [("K", sc.lti.K), ("T", sc.lti.T)])

    circ = rc.circuit
    circuit_items: list[tuple[str, object]] = [
        ("U1", circ.U1), ("kT", circ.kT), ("X2", circ.X2), ("R2", circ.R2),
        ("alpha", circ.alpha), ("beta", circ.beta), ("Xr", circ.Xr), ("XT", circ.XT),
    ]
    if circ.E2 is not None:
        circuit_items.append(("E2", circ.E2))
    if sc is not None and sc.beta_schedule:
        circuit_items.append(("beta_schedule", [list(p) for p in sc.beta_schedule]))
    emit("circuit", circuit_items)

    if sc is not None:
        program = sc.input
        input_items: list[tuple[str, object]] = [("kind", program.kind)]
        if program.kind in ("constant", "step"):
            input_items.append(("u", program.u))
        if program.kind == "step":
            input_items.append(("t0", program.t0))
        if program.kind == "schedule":
            input_items.append(("schedule", [list(p) for p in program.schedule]))
        if sc.disturbance:
            input_items.append(("disturbance", [list(p) for p in sc.disturbance]))
        emit("input", input_items)

    ctrl = rc.controller
    emit("controller", [
        ("kind", ctrl.kind), ("kp", ctrl.kp), ("ki", ctrl.ki),
        ("setpoint", ctrl.setpoint), ("u_min", ctrl.u_min), ("u_max", ctrl.u_max),
        ("anti_windup", ctrl.anti_windup),
    ])

    run_items: list[tuple[str, object]] = []
    if sc is not None:
        run_items += [
            ("dt", sc.dt), ("t_end", sc.t_end), ("L0", sc.L0), ("seed", sc.seed),
            ("v_noise_sigma", sc.v_noise_sigma), ("z_noise_sigma", sc.z_noise_sigma),
        ]
    if rc.out_dir is not None:
        run_items.append(("out_dir", rc.out_dir))
    if run_items:
        emit("run", run_items)

    return "\n".join(lines)


# ---------------------------------------------------------------------------
# CSV ingestion / emission

def _fmt(x: float) -> str:
    return repr(float(x))


def write_trajectory_csv(traj: Trajectory, path):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(TRAJECTORY_CHANNELS) + "\n")
        cols = [traj.channel(name) for name in TRAJECTORY_CHANNELS]
        for row in zip(*cols):
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def read_trajectory_csv(path) -> dict[str, np.ndarray]:
    """Parse a trajectory CSV back into named columns (lossless round trip)."""
    rows, header = _read_csv_rows(path, expected_fields=len(TRAJECTORY_CHANNELS))
    if tuple(header) != TRAJECTORY_CHANNELS:
        raise DataError(
            f"{path}: unexpected trajectory header {header!r}, "
            f"expected {','.join(TRAJECTORY_CHANNELS)}")
    data = np.array(rows, dtype=float).reshape(-1, len(TRAJECTORY_CHANNELS))
    return {name: data[:, k] for k, name in enumerate(TRAJECTORY_CHANNELS)}


def write_series_csv(path, t, y, channel: str):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"t_s,{channel}\n")
        for ti, yi in zip(t, y):
            fh.write(f"{_fmt(ti)},{_fmt(yi)}\n")


def read_series_csv(path) -> FieldSeries:
    """Ingest a two-column measured series: header t_s,<channel>, '#' comments."""
    rows, header = _read_csv_rows(path, expected_fields=2)
    if len(header) != 2 or header[0] != "t_s":
        raise DataError(f"{path}: expected header 't_s,<channel>', got {','.join(header)!r}")
    data = np.array(rows, dtype=float).reshape(-1, 2)
    if data.shape[0] < 2:
        raise DataError(f"{path}: series needs at least 2 samples, got {data.shape[0]}")
    return FieldSeries(t=data[:, 0], y=data[:, 1], channel=header[1])


def write_sweep_csv(points: list[ArcOperatingPoint], path):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(SWEEP_HEADER) + "\n")
        for p in points:
            fh.write(",".join(_fmt(x) for x in (p.L, p.Ua, p.I, p.Z)) + "\n")


def _read_csv_rows(path, expected_fields: int):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except FileNotFoundError:
        raise DataError(f"data file not found: {path}") from None
    header = None
    rows: list[list[float]] = []
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        fields = [f.strip() for f in text.split(",")]
        if header is None:
            header = fields
            continue
        if len(fields) != expected_fields:
            raise DataError(
                f"{path}:{lineno}: expected {expected_fields} fields, got {len(fields)}")
        try:
            rows.append([float(f) for f in fields])
        except ValueError:
            raise DataError(f"{path}:{lineno}: non-numeric value in {text!r}") from None
    if header is None:
        raise DataError(f"{path}: no header line found")
    return rows, header


def read_tap_table_csv(path) -> TapTable:
    """Load a tap table: header tap,Xr_ohm,XT_ohm, one row per tap, '#' comments."""
    try:
        rows, header = _read_csv_rows(path, expected_fields=3)
    except DataError as exc:
        raise ConfigError(str(exc)) from None
    if header != ["tap", "Xr_ohm", "XT_ohm"]:
        raise ConfigError(
            f"{path}: expected header 'tap,Xr_ohm,XT_ohm', got {','.join(header)!r}")
    entries = []
    for tap, xr, xt in rows:
        if tap != int(tap):
            raise ConfigError(f"{path}: tap indices must be integers, got {tap!r}")
        entries.append((int(tap), xr, xt))
    try:
        return TapTable(tuple(entries))
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# commands

def _prepare(config_path, out_dir) -> tuple[ResolvedConfig, Path]:
    rc = load_config(config_path)
    for warning in rc.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    out = Path(out_dir or rc.out_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    return rc, out


def _write_echo(rc: ResolvedConfig, out: Path) -> str:
    path = out / "resolved_config.toml"
    path.write_text(echo_config(rc), encoding="ascii")
    return str(path)


def _write_meta(traj: Trajectory, integrator: str, out: Path) -> str:
    path = out / "trajectory.meta"
    path.write_text(
        "\n".join([
            f"scenario_hash={traj.scenario_hash}",
            f"integrator={integrator}",
            f"n_samples={traj.n_samples}",
            f"clamp_count={traj.clamp_count}",
            f"clamp_time_s={traj.clamp_time!r}",
        ]) + "\n",
        encoding="ascii")
    return str(path)


def _require_scenario(rc: ResolvedConfig) -> Scenario:
    if rc.scenario is None:
        raise ConfigError("this command needs [hydraulics] and [input] sections")
    return rc.scenario


def _run_traj(sc: Scenario, ctrl: ControllerConfig, integrator: str) -> Trajectory:
    return rk4_reference(sc, ctrl) if integrator == "rk4" else simulate(sc, ctrl)


def cmd_sweep(config_path, n: int = 100, out_dir=None) -> RunArtifacts:
    """Emit the arc characteristic table of the configured circuit."""
    if n < 2:
        raise ConfigError(f"sweep needs a sample count of at least 2, got {n}")
    rc, out = _prepare(config_path, out_dir)
    points = characteristic_sweep(rc.circuit, n)
    csv_path = out / "sweep.csv"
    write_sweep_csv(points, csv_path)
    echo = _write_echo(rc, out)
    print(f"wrote {csv_path} ({n} points)")
    return RunArtifacts(config_echo_path=echo, trajectory_csv=str(csv_path))


def cmd_step(config_path, out_dir=None, integrator: str = "zoh"
             ) -> tuple[RunArtifacts, StepIdResult]:
    """Run the configured voltage step open loop and identify (K, T) from it."""
    rc, out = _prepare(config_path, out_dir)
    sc = _require_scenario(rc)
    if sc.input.kind != "step":
        raise ConfigError(f"step command needs [input] kind = 'step', got {sc.input.kind!r}")
    if sc.input.u == 0.0:
        raise ConfigError("step magnitude must be nonzero")
    traj = _run_traj(sc, rc.controller, integrator)

    mask = traj.t >= sc.input.t0 - 1e-12
    t_rec = traj.t[mask] - sc.input.t0
    y_rec = traj.v[mask]
    if sc.v_noise_sigma > 0.0:
        rng = np.random.default_rng(sc.seed)
        y_rec = y_rec + rng.normal(0.0, sc.v_noise_sigma, y_rec.size)
    result = identify_step(StepRecord(t=t_rec, y=y_rec, u_step=sc.input.u))

    csv_path = out / "trajectory.csv"
    write_trajectory_csv(traj, csv_path)
    meta = _write_meta(traj, integrator, out)
    report_path = out / "step_report.txt"
    report_path.write_text(result.format_block() + "\n" + result.format_line() + "\n",
                           encoding="ascii")
    echo = _write_echo(rc, out)
    print(result.format_block())
    print(result.format_line())
    return (RunArtifacts(config_echo_path=echo, trajectory_csv=str(csv_path),
                         report_path=str(report_path), meta_path=meta), result)


def cmd_simulate(config_path, out_dir=None, integrator: str = "zoh") -> RunArtifacts:
    """Run the configured scenario (open or closed loop) and write the trajectory."""
    rc, out = _prepare(config_path, out_dir)
    sc = _require_scenario(rc)
    traj = _run_traj(sc, rc.controller, integrator)
    csv_path = out / "trajectory.csv"
    write_trajectory_csv(traj, csv_path)
    meta = _write_meta(traj, integrator, out)
    echo = _write_echo(rc, out)
    print(f"wrote {csv_path} ({traj.n_samples} samples, "
          f"{traj.clamp_count} clamp events)")
    return RunArtifacts(config_echo_path=echo, trajectory_csv=str(csv_path), meta_path=meta)


def cmd_validate(config_path, field_csv, out_dir=None, integrator: str = "zoh"
                 ) -> tuple[RunArtifacts, FitReport]:
    """Score the configured scenario against a measured series."""
    rc, out = _prepare(config_path, out_dir)
    sc = _require_scenario(rc)
    field = read_series_csv(field_csv)
    report = validate_against_field(field, sc, rc.controller, integrator=integrator)
    report_path = out / "fit_report.txt"
    report_path.write_text(report.format_block() + "\n" + report.format_line() + "\n",
                           encoding="ascii")
    echo = _write_echo(rc, out)
    print(report.format_block())
    print(report.format_line())
    return (RunArtifacts(config_echo_path=echo, report_path=str(report_path)), report)


# ---------------------------------------------------------------------------
# entry point

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arcplant",
        description="Electrode-lift plant toolkit: sweep, simulate, identify, validate.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, integrator=True):
        p.add_argument("--config", required=True, help="scenario TOML file")
        p.add_argument("--out", default=None, help="output directory (default: [run].out_dir or .)")
        if integrator:
            p.add_argument("--integrator", choices=("zoh", "rk4"), default="zoh",
                           help="plant integrator (default: exact zero-order hold)")

    p_sweep = sub.add_parser("sweep", help="emit the arc length -> current/impedance table")
    add_common(p_sweep, integrator=False)
    p_sweep.add_argument("--n", type=int, default=100, help="number of sweep points")

    p_step = sub.add_parser("step", help="run a voltage step and identify the plant (K, T)")
    add_common(p_step)

    p_sim = sub.add_parser("simulate", help="run the configured scenario")
    add_common(p_sim)

    p_val = sub.add_parser("validate", help="score the model against a measured series")
    add_common(p_val)
    p_val.add_argument("--field", required=True, help="measured CSV (header t_s,<channel>)")

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "sweep":
            cmd_sweep(args.config, n=args.n, out_dir=args.out)
        elif args.command == "step":
            cmd_step(args.config, out_dir=args.out, integrator=args.integrator)
        elif args.command == "simulate":
            cmd_simulate(args.config, out_dir=args.out, integrator=args.integrator)
        elif args.command == "validate":
            cmd_validate(args.config, args.field, out_dir=args.out,
                         integrator=args.integrator)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 4
    return 0
