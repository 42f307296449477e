"""Time-domain simulation of the cascade plant: drive voltage -> lift LTI -> arc maps.

The electrode-lift plant is linear, so the primary integrator is the exact
zero-order-hold discretization (no step-size error for piecewise-constant
inputs); a classical fixed-step RK4 integrator over the continuous ODE is
provided as an independent cross-check.  Open-loop runs follow an input
program; closed-loop runs regulate the secondary impedance with a P or PI
controller with output clamping and optional anti-windup.

Arc length saturates on [0, L_max] of the active circuit parameters: the
electrode cannot penetrate the melt (velocity zeroed on bottom contact) and
beyond L_max the arc extinguishes (current 0, impedance infinite).  Clamp
events and total clamped time are reported on the trajectory.

A run is single-threaded and bit-deterministic for a fixed scenario,
controller, and seed.  Scenario/Trajectory are immutable after construction,
so parameter sweeps may run in parallel without coordination.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass
from typing import ClassVar

import numpy as np

from .arc_circuit import CircuitParams, arc_current, arc_voltage, valid_arc_range
from .errors import ConfigError
from .hydraulics import PlantLTI

TRAJECTORY_CHANNELS = ("t_s", "u_V", "L_mm", "v_mm_s", "Ua_V", "I_A", "Z_ohm")

_CHANNEL_FIELDS = {
    "t_s": "t", "u_V": "u", "L_mm": "L", "v_mm_s": "v",
    "Ua_V": "Ua", "I_A": "I", "Z_ohm": "Z",
}


@dataclass(frozen=True)
class PlantState:
    """Lift plant sample: time t (s), arc length L (mm), velocity v (mm/s)."""

    t: float
    L: float
    v: float


@dataclass(frozen=True)
class InputProgram:
    """Open-loop drive-voltage program, or the closed-loop marker.

    kind: constant | step | schedule | closed_loop.  A step applies u from t0
    on; a schedule is piecewise constant from each breakpoint on (0 V before
    the first).  closed_loop hands the drive voltage to the controller.
    """

    KINDS: ClassVar[tuple[str, ...]] = ("constant", "step", "schedule", "closed_loop")

    kind: str = "step"
    u: float = 0.0
    t0: float = 0.0
    schedule: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown input kind {self.kind!r} (expected one of {self.KINDS})")
        if not math.isfinite(self.u):
            raise ValueError(f"input level must be finite, got {self.u}")
        if self.t0 < 0.0 or not math.isfinite(self.t0):
            raise ValueError(f"step time t0 must be non-negative, got {self.t0}")
        object.__setattr__(self, "schedule",
                           tuple((float(t), float(u)) for t, u in self.schedule))
        if self.kind == "schedule":
            if not self.schedule:
                raise ValueError("schedule input needs at least one (time, level) entry")
            _check_breakpoints(self.schedule, "input schedule")

    def level(self, t: float) -> float:
        """Programmed drive voltage at time t (open-loop kinds only)."""
        if self.kind == "constant":
            return self.u
        if self.kind == "step":
            return self.u if t >= self.t0 else 0.0
        if self.kind == "schedule":
            return _piecewise_level(self.schedule, t, 0.0)
        raise ValueError("closed_loop program has no open-loop level")


def _check_breakpoints(pairs, what: str):
    prev = None
    for t, value in pairs:
        if t < 0.0 or not math.isfinite(t):
            raise ValueError(f"{what}: breakpoint times must be non-negative, got {t}")
        if not math.isfinite(value):
            raise ValueError(f"{what}: values must be finite, got {value}")
        if prev is not None and t <= prev:
            raise ValueError(f"{what}: breakpoint times must be strictly increasing")
        prev = t


def _piecewise_level(pairs, t: float, default: float) -> float:
    level = default
    for ti, vi in pairs:
        if t >= ti:
            level = vi
        else:
            break
    return level


@dataclass(frozen=True)
class ControllerConfig:
    """Impedance-error controller: u = kp*e + ki*int(e), e = setpoint - Z.

    kind: none | p | pi.  Output clamps to [u_min, u_max]; with anti_windup
    the integrator is back-calculated on saturation.  kp in V/ohm, ki in
    V/(ohm*s), setpoint in ohm.
    """

    KINDS: ClassVar[tuple[str, ...]] = ("none", "p", "pi")

    kind: str = "none"
    kp: float = 0.0
    ki: float = 0.0
    setpoint: float = 0.0
    u_min: float = -10.0
    u_max: float = 10.0
    anti_windup: bool = True

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown controller kind {self.kind!r} (expected one of {self.KINDS})")
        for name in ("kp", "ki", "setpoint", "u_min", "u_max"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"controller {name} must be finite")
        if not self.u_min < self.u_max:
            raise ValueError(f"controller needs u_min < u_max, got ({self.u_min}, {self.u_max})")


NO_CONTROLLER = ControllerConfig()


@dataclass(frozen=True)
class Scenario:
    """One simulation setup, immutable once built.

    disturbance: piecewise-constant additive arc-length offset in mm (scrap
    movement surrogate), applied as instantaneous length changes at the
    breakpoints.  beta_schedule: piecewise-constant arc-voltage gradient over
    time (melting-stage progression); a change re-derives L_max and
    re-validates the length.  z_noise_sigma (ohm) perturbs the controller's
    impedance measurement; v_noise_sigma (mm/s) is the measurement noise used
    by the step-identification command.  Both draw from a generator seeded
    with `seed`.
    """

    lti: PlantLTI
    circuit: CircuitParams
    input: InputProgram
    disturbance: tuple[tuple[float, float], ...] = ()
    beta_schedule: tuple[tuple[float, float], ...] = ()
    dt: float = 0.002
    t_end: float = 1.0
    L0: float = 20.0
    seed: int = 0
    v_noise_sigma: float = 0.0
    z_noise_sigma: float = 0.0

    def __post_init__(self):
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.dt > self.lti.T / 5.0 * (1.0 + 1e-12):
            raise ValueError(
                f"dt = {self.dt} s too large: must not exceed T/5 = {self.lti.T / 5.0} s")
        if not (self.t_end >= self.dt and math.isfinite(self.t_end)):
            raise ValueError(f"t_end must cover at least one step, got {self.t_end}")
        _, l_max = valid_arc_range(self.circuit)
        if not 0.0 <= self.L0 <= l_max:
            raise ValueError(f"initial arc length L0 = {self.L0} mm outside [0, {l_max:.6g}] mm")
        object.__setattr__(self, "disturbance",
                           tuple((float(t), float(d)) for t, d in self.disturbance))
        _check_breakpoints(self.disturbance, "disturbance")
        object.__setattr__(self, "beta_schedule",
                           tuple((float(t), float(b)) for t, b in self.beta_schedule))
        _check_breakpoints(self.beta_schedule, "beta schedule")
        for _, b in self.beta_schedule:
            if b <= 0.0:
                raise ValueError(f"beta schedule values must be positive, got {b}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed!r}")
        if self.v_noise_sigma < 0.0 or self.z_noise_sigma < 0.0:
            raise ValueError("noise sigmas must be non-negative")


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled run record.

    Columns (equal-length arrays): t (s), u (V), L (mm), v (mm/s), Ua (V),
    I (A), Z (ohm; inf where the arc is extinguished).  clamp_count counts
    every event where the arc length had to be saturated; clamp_time is the
    total simulated time spent clamped during state advances.
    """

    t: np.ndarray
    u: np.ndarray
    L: np.ndarray
    v: np.ndarray
    Ua: np.ndarray
    I: np.ndarray
    Z: np.ndarray
    clamp_count: int = 0
    clamp_time: float = 0.0
    scenario_hash: str = ""

    @property
    def n_samples(self) -> int:
        return int(self.t.size)

    def channel(self, name: str) -> np.ndarray:
        """Column by its CSV header name (t_s, u_V, L_mm, v_mm_s, Ua_V, I_A, Z_ohm)."""
        try:
            return getattr(self, _CHANNEL_FIELDS[name])
        except KeyError:
            raise ValueError(
                f"unknown trajectory channel {name!r} (expected one of {TRAJECTORY_CHANNELS})"
            ) from None


def scenario_fingerprint(sc: Scenario, ctrl: ControllerConfig = NO_CONTROLLER) -> str:
    """sha256 over the canonical scenario + controller contents."""
    payload = json.dumps([asdict(sc), asdict(ctrl)], sort_keys=True)
    return hashlib.sha256(payload.encode("ascii")).hexdigest()


def step_state(s: PlantState, u: float, lti: PlantLTI, dt: float) -> PlantState:
    """Advance one sample by the exact hold-input discretization of the plant.

    v+ = v*a + K*u*(1-a),  L+ = L + v*T*(1-a) + K*u*(dt - T*(1-a)),
    a = exp(-dt/T).  Exact for constant u over the step, any dt > 0.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    a = math.exp(-dt / lti.T)
    hold = lti.T * (1.0 - a)
    return PlantState(
        t=s.t + dt,
        L=s.L + s.v * hold + lti.K * u * (dt - hold),
        v=s.v * a + lti.K * u * (1.0 - a),
    )


def _rk4_step(L: float, v: float, u: float, lti: PlantLTI, dt: float) -> tuple[float, float]:
    """Classical RK4 step of L' = v, v' = (K*u - v)/T with u held constant."""
    def f(vx):
        return (lti.K * u - vx) / lti.T

    k1l, k1v = v, f(v)
    k2l, k2v = v + 0.5 * dt * k1v, f(v + 0.5 * dt * k1v)
    k3l, k3v = v + 0.5 * dt * k2v, f(v + 0.5 * dt * k2v)
    k4l, k4v = v + dt * k3v, f(v + dt * k3v)
    return (L + dt * (k1l + 2.0 * k2l + 2.0 * k3l + k4l) / 6.0,
            v + dt * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0)


def _clamp_length(L: float, v: float, l_max: float) -> tuple[float, float, bool]:
    """Saturate L on [0, l_max]; bottom contact kills downward velocity."""
    if L < 0.0:
        return 0.0, max(v, 0.0), True
    if L > l_max:
        return l_max, v, True
    return L, v, False


def simulate(sc: Scenario, ctrl: ControllerConfig = NO_CONTROLLER) -> Trajectory:
    """Run the scenario with the exact zero-order-hold plant update."""
    return _run(sc, ctrl, use_rk4=False)


def rk4_reference(sc: Scenario, ctrl: ControllerConfig = NO_CONTROLLER) -> Trajectory:
    """Same contract as simulate, integrating the continuous ODE with fixed-step RK4.

    Cross-validation reference only; simulate's exact discretization is the
    primary integrator.
    """
    return _run(sc, ctrl, use_rk4=True)


def _run(sc: Scenario, ctrl: ControllerConfig, use_rk4: bool) -> Trajectory:
    closed = sc.input.kind == "closed_loop"
    if closed and ctrl.kind == "none":
        raise ConfigError("closed_loop input program needs a P or PI controller")
    if not closed and ctrl.kind != "none":
        raise ConfigError(
            f"controller kind {ctrl.kind!r} configured but input program "
            f"{sc.input.kind!r} is open-loop")

    circ = sc.circuit
    _, l_max = valid_arc_range(circ)
    if closed:
        i0 = arc_current(0.0, circ)
        z_floor = circ.secondary_voltage / i0
        if not (ctrl.setpoint > z_floor and math.isfinite(ctrl.setpoint)):
            raise ConfigError(
                f"unreachable setpoint: {ctrl.setpoint!r} ohm is not above the "
                f"shortest-arc impedance {z_floor:.6g} ohm")

    lti = sc.lti
    dt = sc.dt
    n_steps = int(round(sc.t_end / dt))
    n = n_steps + 1
    t_col = np.arange(n) * dt
    u_col = np.empty(n)
    l_col = np.empty(n)
    v_col = np.empty(n)
    ua_col = np.empty(n)
    i_col = np.empty(n)
    z_col = np.empty(n)

    rng = np.random.default_rng(sc.seed)
    integ = 0.0
    beta_idx = 0
    dist_idx = 0
    dist_level = 0.0
    L = sc.L0
    v = 0.0
    clamp_count = 0
    clamp_time = 0.0

    for k in range(n):
        tk = t_col[k]

        # melting-stage progression: new beta re-derives the valid range
        while beta_idx < len(sc.beta_schedule) and tk >= sc.beta_schedule[beta_idx][0]:
            circ = circ.with_beta(sc.beta_schedule[beta_idx][1])
            beta_idx += 1
            _, l_max = valid_arc_range(circ)
            L, v, clamped = _clamp_length(L, v, l_max)
            clamp_count += clamped

        # scrap-movement surrogate: instantaneous arc-length offsets
        while dist_idx < len(sc.disturbance) and tk >= sc.disturbance[dist_idx][0]:
            new_level = sc.disturbance[dist_idx][1]
            L += new_level - dist_level
            dist_level = new_level
            dist_idx += 1
            L, v, clamped = _clamp_length(L, v, l_max)
            clamp_count += clamped

        ua = arc_voltage(L, circ)
        i = arc_current(L, circ)
        z = circ.secondary_voltage / i if i > 0.0 else math.inf

        if closed:
            z_meas = z + rng.normal(0.0, sc.z_noise_sigma) if sc.z_noise_sigma > 0.0 else z
            e = ctrl.setpoint - z_meas
            if not math.isfinite(e):
                # extinguished arc reads Z = inf: drive down at full authority
                u_k = ctrl.u_min if e < 0.0 else ctrl.u_max
            else:
                if ctrl.kind == "pi":
                    integ += ctrl.ki * e * dt
                u_raw = ctrl.kp * e + integ
                u_k = min(max(u_raw, ctrl.u_min), ctrl.u_max)
                if ctrl.anti_windup and u_k != u_raw:
                    integ = u_k - ctrl.kp * e
        else:
            u_k = sc.input.level(tk)

        u_col[k] = u_k
        l_col[k] = L
        v_col[k] = v
        ua_col[k] = ua
        i_col[k] = i
        z_col[k] = z

        if k == n_steps:
            break
        if use_rk4:
            L, v = _rk4_step(L, v, u_k, lti, dt)
        else:
            nxt = step_state(PlantState(t=tk, L=L, v=v), u_k, lti, dt)
            L, v = nxt.L, nxt.v
        L, v, clamped = _clamp_length(L, v, l_max)
        if clamped:
            clamp_count += 1
            clamp_time += dt

    return Trajectory(
        t=t_col, u=u_col, L=l_col, v=v_col, Ua=ua_col, I=i_col, Z=z_col,
        clamp_count=clamp_count, clamp_time=clamp_time,
        scenario_hash=scenario_fingerprint(sc, ctrl),
    )
