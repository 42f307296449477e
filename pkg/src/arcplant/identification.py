"""Step-response parameter estimation and model-vs-data fit scoring.

The lift plant's velocity answers a voltage step with K*u*(1 - exp(-t/T)), so
K is the steady-state level per volt and T the time of the 63.2% crossing.
identify_step reads both off a recorded response (crossing refined by
log-linear interpolation, then an optional least-squares fit over (K, T)
initialized from them, which is the authoritative result when it converges).

Model fit is scored with the normalized-RMSE percentage

    fit = 100 * (1 - ||y - y_hat||_2 / ||y - mean(y)||_2)

the convention of common system-identification comparison tooling: 100% is
exact agreement, 0% no better than the measured mean.  The score uses sample
values only, so any common transform of both series' time axes leaves it
unchanged.  The RMSE is always reported alongside so other metrics can be
recomputed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter1d
from scipy.optimize import curve_fit

from .errors import DataError, DomainError
from .sim_engine import NO_CONTROLLER, ControllerConfig, Scenario, rk4_reference, simulate

CHANNELS = ("v_mm_s", "L_mm", "I_A")

METHOD_CROSSING = "tangent-free 63.2% rule"
METHOD_REFINE = "least-squares refine"

_CROSS_LEVEL = 1.0 - math.exp(-1.0)  # 0.63212..., the first-order landmark
_TAIL_FRACTION = 0.2
_SETTLE_BAND = 0.02
_SMOOTH_WINDOW = 5


@dataclass(frozen=True)
class StepRecord:
    """Uniformly sampled response to a voltage step of magnitude u_step (V).

    channel tags the response units: v_mm_s (velocity), L_mm (position),
    I_A (current).
    """

    t: np.ndarray
    y: np.ndarray
    u_step: float
    channel: str = "v_mm_s"

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "y", y)
        if t.ndim != 1 or y.shape != t.shape:
            raise DataError("step record needs matching 1-D time and response arrays")
        if t.size < 20:
            raise DataError(f"step record needs at least 20 samples, got {t.size}")
        dt = np.diff(t)
        if dt[0] <= 0.0 or not np.allclose(dt, dt[0], rtol=1e-6, atol=1e-12):
            raise DataError("step record must be uniformly sampled with increasing time")
        if self.u_step == 0.0 or not math.isfinite(self.u_step):
            raise DataError(f"step magnitude must be nonzero, got {self.u_step}")
        if self.channel not in CHANNELS:
            raise DataError(f"unknown channel {self.channel!r} (expected one of {CHANNELS})")


@dataclass(frozen=True)
class FieldSeries:
    """Ingested measured series: timestamps (s), values, and a channel tag."""

    t: np.ndarray
    y: np.ndarray
    channel: str

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "y", y)
        if t.ndim != 1 or y.shape != t.shape or t.size < 2:
            raise DataError("field series needs matching 1-D arrays with at least 2 samples")
        if np.any(np.diff(t) <= 0.0):
            raise DataError("field series timestamps must be strictly increasing")
        if self.channel not in CHANNELS:
            raise DataError(
                f"field series units/channel mismatch: {self.channel!r} "
                f"is not one of {CHANNELS}")


@dataclass(frozen=True)
class StepIdResult:
    """Estimated plant parameters from one step record."""

    K_hat: float  # mm/(s*V)
    T_hat: float  # s
    method: str
    residual_rms: float

    def format_line(self) -> str:
        return (f"K_hat_mm_per_sV={self.K_hat!r} T_hat_s={self.T_hat!r} "
                f"method={self.method.replace(' ', '_')} residual_rms={self.residual_rms!r}")

    def format_block(self) -> str:
        return "\n".join([
            "step identification result",
            f"  K_hat        = {self.K_hat:.6g} mm/(s*V)",
            f"  T_hat        = {self.T_hat:.6g} s",
            f"  method       = {self.method}",
            f"  residual rms = {self.residual_rms:.6g}",
        ])


@dataclass(frozen=True)
class FitReport:
    """Model-vs-measurement comparison: fit percentage, RMSE, and alignment."""

    fit_percent: float
    rmse: float
    n_samples: int
    channel: str
    offset_s: float = 0.0

    def format_line(self) -> str:
        return (f"fit_percent={self.fit_percent!r} rmse={self.rmse!r} "
                f"n_samples={self.n_samples} channel={self.channel} offset_s={self.offset_s!r}")

    def format_block(self) -> str:
        return "\n".join([
            "model fit report",
            f"  fit          = {self.fit_percent:.2f} %",
            f"  rmse         = {self.rmse:.6g}",
            f"  samples      = {self.n_samples}",
            f"  channel      = {self.channel}",
            f"  time offset  = {self.offset_s:.6g} s",
        ])


def _first_order(t: np.ndarray, K: float, T: float, u_step: float) -> np.ndarray:
    return K * u_step * -np.expm1(-t / T)


def identify_step(rec: StepRecord, refine: bool = True) -> StepIdResult:
    """Estimate (K, T) from a velocity step response.

    Steady state is the tail-window mean (last 20% of samples, required flat
    within a 2% band plus a noise allowance).  T comes from the earliest
    63.2% crossing of a 5-sample moving average, refined by log-linear
    interpolation between the bracketing samples; with refine=True a
    least-squares fit over (K, T) initialized there is the authoritative
    output when it converges.
    """
    if rec.channel != "v_mm_s":
        raise DataError(
            f"step identification expects a velocity-channel record, got {rec.channel!r}")
    t = rec.t - rec.t[0]
    y = rec.y
    n = y.size
    smooth = uniform_filter1d(y, size=_SMOOTH_WINDOW, mode="nearest")

    n_tail = max(4, int(round(_TAIL_FRACTION * n)))
    tail = y[-n_tail:]
    y_ss = float(tail.mean())
    sigma_tail = float(tail.std())
    if abs(y_ss) <= 2.0 * sigma_tail:
        raise DataError("step too short: no steady level distinguishable from noise")

    half = n_tail // 2
    m1 = float(tail[:half].mean())
    m2 = float(tail[half:].mean())
    # 2% settling band, widened by the standard error of the two half-means
    # so seeded measurement noise does not masquerade as drift
    se = sigma_tail * math.sqrt(1.0 / half + 1.0 / (n_tail - half))
    if abs(m2 - m1) > _SETTLE_BAND * abs(y_ss) + 4.0 * se:
        raise DataError("step too short: response has not reached steady state")

    k0 = y_ss / rec.u_step
    if k0 <= 0.0:
        raise DataError("not a first-order response: steady level opposes the step sign")

    phi = smooth / y_ss  # normalized response, ~0 at rest to ~1 at steady state
    band = max(0.05, 5.0 * sigma_tail / abs(y_ss))
    if float(phi.max()) > 1.0 + band:
        raise DataError("not a first-order response: overshoot beyond the noise band")
    if float(phi[-n_tail:].min()) < 1.0 - band:
        raise DataError("not a first-order response: tail dips beyond the noise band")

    crossed = np.nonzero(phi >= _CROSS_LEVEL)[0]
    if crossed.size == 0:
        raise DataError("step too short: response never reached the 63.2% landmark")
    i = int(crossed[0])
    if i == 0:
        raise DataError("not a first-order response: record does not start from rest")

    # ln(1 - phi) is linear in t for a first-order rise; the 63.2% level
    # sits at exactly -1 on that axis
    z1 = math.log(max(1.0 - float(phi[i - 1]), 1e-300))
    z2 = math.log(max(1.0 - float(phi[i]), 1e-300))
    if z2 != z1:
        t_star = t[i - 1] + (-1.0 - z1) * (t[i] - t[i - 1]) / (z2 - z1)
    else:
        t_star = t[i]
    t_hat = float(t_star) if t_star > 0.0 else float(t[i])

    k_hat = k0
    method = METHOD_CROSSING
    if refine:
        try:
            popt, _ = curve_fit(
                lambda tt, K, T: _first_order(tt, K, T, rec.u_step),
                t, y, p0=[k0, t_hat],
                bounds=([0.0, 1e-12], [np.inf, np.inf]), maxfev=10000)
            if np.all(np.isfinite(popt)) and popt[0] > 0.0 and popt[1] > 0.0:
                k_hat, t_hat = float(popt[0]), float(popt[1])
                method = METHOD_REFINE
        except (RuntimeError, ValueError):
            pass  # keep the crossing estimate

    residual = y - _first_order(t, k_hat, t_hat, rec.u_step)
    rms = float(np.sqrt(np.mean(residual * residual)))
    return StepIdResult(K_hat=k_hat, T_hat=t_hat, method=method, residual_rms=rms)


def fit_percent(measured, modeled, channel: str = "", offset_s: float = 0.0) -> FitReport:
    """Normalized-RMSE fit of modeled against measured, as a percentage.

    100 iff the sequences are identical; 0 when the model is no better than
    the measured mean; negative when worse.
    """
    m = np.asarray(measured, dtype=float)
    mod = np.asarray(modeled, dtype=float)
    if m.ndim != 1 or mod.shape != m.shape:
        raise DataError(
            f"fit needs equal-length series, got {m.shape} measured vs {mod.shape} modeled")
    if m.size < 2:
        raise DataError(f"fit needs at least 2 samples, got {m.size}")
    denom = float(np.linalg.norm(m - m.mean()))
    if denom == 0.0:
        raise DataError("undefined normalization: measured series is constant")
    err = m - mod
    fit = 100.0 * (1.0 - float(np.linalg.norm(err)) / denom)
    rmse = float(np.sqrt(np.mean(err * err)))
    return FitReport(fit_percent=fit, rmse=rmse, n_samples=int(m.size),
                     channel=channel, offset_s=offset_s)


def validate_against_field(field: FieldSeries, sc: Scenario,
                           ctrl: ControllerConfig = NO_CONTROLLER,
                           max_offset_s: float = 0.5,
                           integrator: str = "zoh") -> FitReport:
    """Score the scenario's model output against a measured series.

    Runs the scenario, extracts the channel the field series carries,
    resamples the model onto the field timestamps (linear interpolation), and
    searches time offsets on the field sampling grid within +-max_offset_s
    for the best fit.  The chosen offset is reported, never silent.
    """
    if integrator not in ("zoh", "rk4"):
        raise ValueError(f"unknown integrator {integrator!r} (expected zoh or rk4)")
    run = simulate if integrator == "zoh" else rk4_reference
    traj = run(sc, ctrl)
    if traj.clamp_count > 0:
        raise DomainError(
            "model trajectory leaves the valid arc range during the step "
            f"({traj.clamp_count} clamp events); validation would compare saturated output")
    model_t = traj.t
    model_y = traj.channel(field.channel)

    if max_offset_s < 0.0:
        raise ValueError(f"max_offset_s must be non-negative, got {max_offset_s}")
    dt_field = float(np.median(np.diff(field.t)))
    n_off = int(math.floor(max_offset_s / dt_field + 1e-9)) if max_offset_s > 0.0 else 0
    offsets = sorted((k * dt_field for k in range(-n_off, n_off + 1)), key=abs)
    if not offsets:
        offsets = [0.0]

    best = None
    tol = 1e-9 * max(1.0, float(model_t[-1]))
    for offset in offsets:
        shifted = field.t + offset
        if shifted[0] < model_t[0] - tol or shifted[-1] > model_t[-1] + tol:
            continue
        modeled = np.interp(shifted, model_t, model_y)
        report = fit_percent(field.y, modeled, channel=field.channel, offset_s=offset)
        if best is None or report.fit_percent > best.fit_percent:
            best = report
    if best is None:
        raise DataError(
            "field series time span does not overlap the model trajectory "
            f"(field [{field.t[0]:.6g}, {field.t[-1]:.6g}] s vs "
            f"model [{model_t[0]:.6g}, {model_t[-1]:.6g}] s)")
    return best
