"""Static arc maps of the furnace secondary loop: length to voltage, current, impedance.

Single-phase reduction of the furnace circuit.  The arc column behaves as an
affine voltage source Ua = beta*L + alpha in series with the secondary
resistance R2 and the total reactance X, fed by the referred phase voltage
E2' = U1 / (sqrt(3)*kT).  The voltage balance

    E2'^2 = (Ua + I*R2)^2 + (I*X)^2

solved on its positive branch gives the arc current, and Z = E2/I the
secondary-circuit impedance.  Arc length is in mm, beta in V/mm, every
electrical quantity in SI units.  All functions here are pure; the parameter
types are immutable and safe to share between threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import DomainError, UnsustainableArcError

SQRT3 = math.sqrt(3.0)

# Arc-voltage gradient beta (V/mm) by melting stage.  The melting value is
# the top of that stage's range and may be overridden downwards.
STAGE_BETA = {"melting": 12.0, "oxidization": 3.7, "reviving": 1.2}

# Relative slack when comparing Ua against E2' at the extinction boundary;
# absorbs rounding in beta*L + alpha for L at the very end of the range.
_UA_SLACK = 1e-12


@dataclass(frozen=True)
class CircuitParams:
    """Electrical constants of the furnace secondary circuit.

    U1: primary line voltage (V); kT: furnace transformer ratio; X2/R2: total
    secondary reactance/resistance (ohm); alpha: anode-cathode drop (V);
    beta: arc-voltage gradient (V/mm); Xr/XT: reactor and transformer
    reactances on the primary side (ohm), referred through kT^2.

    E2 is the secondary phase voltage used by the impedance map.  When left
    unset it defaults to the referred voltage E2', which keeps Z*I = E2
    consistent without a separately measured value; set it explicitly when a
    measured secondary voltage is available.
    """

    U1: float
    kT: float
    X2: float = 3.0e-3
    R2: float = 0.507e-3
    alpha: float = 9.0
    beta: float = 12.0
    Xr: float = 0.0
    XT: float = 0.0
    E2: float | None = None

    def __post_init__(self):
        if not (self.U1 > 0.0 and math.isfinite(self.U1)):
            raise ValueError(f"primary voltage U1 must be positive, got {self.U1}")
        if not (self.kT > 0.0 and math.isfinite(self.kT)):
            raise ValueError(f"transformer ratio kT must be positive, got {self.kT}")
        if not (self.X2 > 0.0 and math.isfinite(self.X2)):
            raise ValueError(f"secondary reactance X2 must be positive, got {self.X2}")
        if not (self.R2 >= 0.0 and math.isfinite(self.R2)):
            # R2 = 0 is the permitted degenerate case with a purely reactive loop
            raise ValueError(f"secondary resistance R2 must be non-negative, got {self.R2}")
        if not (self.alpha >= 0.0 and math.isfinite(self.alpha)):
            raise ValueError(f"anode-cathode drop alpha must be non-negative, got {self.alpha}")
        if not (self.beta > 0.0 and math.isfinite(self.beta)):
            raise ValueError(f"arc-voltage gradient beta must be positive, got {self.beta}")
        if not (self.Xr >= 0.0 and self.XT >= 0.0):
            raise ValueError(f"tap reactances must be non-negative, got Xr={self.Xr}, XT={self.XT}")
        if self.E2 is not None and not (self.E2 > 0.0 and math.isfinite(self.E2)):
            raise ValueError(f"secondary voltage E2 must be positive when set, got {self.E2}")

    @property
    def referred_voltage(self) -> float:
        """E2' = U1 / (sqrt(3)*kT), secondary phase voltage seen from the primary (V)."""
        return self.U1 / (SQRT3 * self.kT)

    @property
    def total_reactance(self) -> float:
        """X = (Xr + XT)/kT^2 + X2, primary reactances referred to the secondary (ohm)."""
        return (self.Xr + self.XT) / (self.kT * self.kT) + self.X2

    @property
    def secondary_voltage(self) -> float:
        """E2 if configured, else the referral default E2'."""
        return self.E2 if self.E2 is not None else self.referred_voltage

    def with_beta(self, beta: float) -> "CircuitParams":
        return replace(self, beta=beta)

    def with_tap(self, table: "TapTable", tap: int) -> "CircuitParams":
        """Params with Xr, XT replaced by the table entry for the given tap."""
        xr, xt = table.reactances(tap)
        return replace(self, Xr=xr, XT=xt)

    @classmethod
    def from_referred(cls, referred_voltage: float, **kwargs) -> "CircuitParams":
        """Params pinned to a referred voltage: kT = 1, U1 = sqrt(3)*E2'.

        Convenience for tests and scenarios where the primary-side reactances
        are folded into X2 and only E2' matters.
        """
        return cls(U1=SQRT3 * referred_voltage, kT=1.0, **kwargs)


@dataclass(frozen=True)
class MeltingStagePreset:
    """Arc-voltage gradient preset for a melting stage.

    stage is one of melting | oxidization | reviving.  beta defaults to the
    stage value; only the melting stage may be overridden, within (3.7, 12].
    """

    stage: str
    beta: float | None = None

    def __post_init__(self):
        if self.stage not in STAGE_BETA:
            raise ValueError(
                f"unknown melting stage {self.stage!r} (expected one of {sorted(STAGE_BETA)})")
        if self.beta is None:
            object.__setattr__(self, "beta", STAGE_BETA[self.stage])
        elif self.stage == "melting":
            if not 3.7 < self.beta <= 12.0:
                raise ValueError(
                    f"melting-stage beta must lie in (3.7, 12] V/mm, got {self.beta}")
        elif self.beta != STAGE_BETA[self.stage]:
            raise ValueError(
                f"{self.stage} stage pins beta = {STAGE_BETA[self.stage]} V/mm, got {self.beta}")

    def apply(self, p: CircuitParams) -> CircuitParams:
        """Re-evaluate params with this stage's beta; presets carry no other state."""
        return p.with_beta(self.beta)


@dataclass(frozen=True)
class TapTable:
    """Reactor/transformer tap settings: tap index -> (Xr, XT) in ohms.

    Tap-to-reactance values are equipment data and must be user-supplied;
    the repo ships an illustrative example table only.
    """

    entries: tuple[tuple[int, float, float], ...]

    def __post_init__(self):
        seen = set()
        for tap, xr, xt in self.entries:
            if not isinstance(tap, int) or isinstance(tap, bool) or tap <= 0:
                raise ValueError(f"tap index must be a positive integer, got {tap!r}")
            if tap in seen:
                raise ValueError(f"duplicate tap index {tap}")
            seen.add(tap)
            if not (xr >= 0.0 and xt >= 0.0):
                raise ValueError(f"tap {tap}: reactances must be non-negative, got ({xr}, {xt})")
        object.__setattr__(self, "entries", tuple(sorted(self.entries)))

    def taps(self) -> tuple[int, ...]:
        return tuple(tap for tap, _, _ in self.entries)

    def reactances(self, tap: int) -> tuple[float, float]:
        for t, xr, xt in self.entries:
            if t == tap:
                return xr, xt
        raise ValueError(f"tap {tap} not in table (available taps: {list(self.taps())})")

    @classmethod
    def from_mapping(cls, mapping) -> "TapTable":
        """Build from {tap: (Xr, XT)} pairs."""
        return cls(tuple((int(k), float(v[0]), float(v[1])) for k, v in mapping.items()))


@dataclass(frozen=True)
class ArcOperatingPoint:
    """One point of the arc characteristic: L (mm), Ua (V), I (A), Z (ohm)."""

    L: float
    Ua: float
    I: float
    Z: float


def arc_voltage(L: float, p: CircuitParams) -> float:
    """Arc voltage Ua = beta*L + alpha (V) for arc length L (mm)."""
    if L < 0.0:
        raise DomainError(f"arc length must be non-negative, got {L} mm")
    return p.beta * L + p.alpha


def arc_current(L: float, p: CircuitParams) -> float:
    """Arc current (A) from the positive branch of the circuit voltage balance.

    I = [-R2*Ua + sqrt((X^2+R2^2)*E2'^2 - X^2*Ua^2)] / (X^2+R2^2)

    with Ua = beta*L + alpha.  Reaches zero at the extinction length where
    Ua = E2'; beyond it no real non-negative current exists.
    """
    ua = arc_voltage(L, p)
    e2p = p.referred_voltage
    if ua > e2p * (1.0 + _UA_SLACK):
        raise UnsustainableArcError(
            f"arc length beyond sustainable range: Ua = {ua:.6g} V exceeds E2' = {e2p:.6g} V")
    x = p.total_reactance
    s = x * x + p.R2 * p.R2
    disc = s * e2p * e2p - x * x * ua * ua
    if disc < 0.0:
        disc = 0.0  # rounding at the extinction boundary (Ua ~ E2' with R2 ~ 0)
    i = (-p.R2 * ua + math.sqrt(disc)) / s
    return i if i > 0.0 else 0.0


def impedance(L: float, p: CircuitParams) -> float:
    """Secondary-circuit impedance Z = E2 / I (ohm)."""
    i = arc_current(L, p)
    if i == 0.0:
        raise DomainError("open-arc impedance undefined (infinite): arc current is zero")
    return p.secondary_voltage / i


def valid_arc_range(p: CircuitParams) -> tuple[float, float]:
    """(L_min, L_max) in mm over which the arc can be sustained.

    L_max = (E2' - alpha)/beta is the length at which the current reaches
    zero; current and impedance are defined on [0, L_max).
    """
    e2p = p.referred_voltage
    if e2p <= p.alpha:
        raise DomainError(
            f"supply voltage cannot sustain any arc: E2' = {e2p:.6g} V <= alpha = {p.alpha:.6g} V")
    return 0.0, (e2p - p.alpha) / p.beta


def operating_point(L: float, p: CircuitParams) -> ArcOperatingPoint:
    """Evaluate all arc maps at one length; requires a strictly positive current."""
    ua = arc_voltage(L, p)
    i = arc_current(L, p)
    if i == 0.0:
        raise DomainError("open-arc impedance undefined (infinite): arc current is zero")
    return ArcOperatingPoint(L=L, Ua=ua, I=i, Z=p.secondary_voltage / i)


def characteristic_sweep(p: CircuitParams, n: int) -> list[ArcOperatingPoint]:
    """n operating points uniformly spaced on [0, L_max), last one just below L_max."""
    if n < 2:
        raise ValueError(f"sweep needs at least 2 points, got {n}")
    _, l_max = valid_arc_range(p)
    top = l_max * (1.0 - 1e-9)
    step = top / (n - 1)
    return [operating_point(k * step, p) for k in range(n)]
