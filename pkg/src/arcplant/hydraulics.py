"""Electrode-lift actuator model: valve flow, force balance, and the resulting LTI plant.

A servo valve meters oil into the lift cylinder.  Around the origin operating
point the valve flow linearizes to Q = k1*u + k2*Pc (u: driving voltage,
Pc = P1 - P2: cylinder pressure difference).  Combining with the piston flow
Q = A*dL/dt and the force balance on the electrode mass, gravity cancels and
the motion obeys

    m*L'' + (c - A^2/k2)*L' = -(k1*A/k2)*u

Neglecting the (small) viscous term c, this is the integrator-plus-lag plant

    L(s)/U(s) = K / (s*(T*s + 1)),   K = k1/A,   T = -m*k2/A^2

k2 < 0 (flow falls as back-pressure rises) makes both K and T positive, and a
positive u lifts the electrode.  Internal force/flow math is SI; arc length
and velocity cross into mm at this module's outputs, nowhere else.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

MM_PER_M = 1000.0


@dataclass(frozen=True)
class HydraulicParams:
    """Valve/cylinder/electrode constants (SI).

    m: electrode mass (kg); A: piston section area (m^2); k1: flow-voltage
    gain (m^3/(s*V)); k2: flow-pressure coefficient (m^5/(s*N), negative for
    a self-stabilizing valve); c: viscous coefficient (N*s/m, force per
    velocity).  rho (oil density) and g are carried for completeness but are
    inert: gravity cancels in the force balance and density never enters.
    """

    m: float
    A: float
    k1: float
    k2: float
    c: float = 0.05
    rho: float = 850.0
    g: float = 9.8

    def __post_init__(self):
        if not (self.m > 0.0 and math.isfinite(self.m)):
            raise ValueError(f"electrode mass must be positive, got {self.m}")
        if not (self.A > 0.0 and math.isfinite(self.A)):
            raise ValueError(f"piston area must be positive, got {self.A}")
        if not (self.c >= 0.0 and math.isfinite(self.c)):
            raise ValueError(f"viscous coefficient must be non-negative, got {self.c}")
        if not (self.k1 > 0.0 and math.isfinite(self.k1)):
            raise ValueError(f"flow-voltage gain must be positive, got {self.k1}")
        if not (self.k2 < 0.0 and math.isfinite(self.k2)):
            raise ValueError(
                "flow-pressure coefficient must be negative "
                f"(unstable/degenerate plant), got {self.k2}")


# Shipped defaults.  m, A, c, rho, g are equipment data; k1 and k2 are NOT
# measured values: they are inverted from the identified pair
# (K = 15 mm/(s*V), T = 0.1 s) through K = k1/A and T = -m*k2/A^2.
DEFAULT_HYDRAULICS = HydraulicParams(
    m=7850.0,
    A=1.54e-2,
    k1=0.015 * 1.54e-2,              # m^3/(s*V), makes K exactly 15 mm/(s*V)
    k2=-0.1 * 1.54e-2 ** 2 / 7850.0, # m^5/(s*N), makes T exactly 0.1 s
)


@dataclass(frozen=True)
class PlantLTI:
    """Identified electrode-lift plant: velocity gain K (mm/(s*V)) and lag T (s)."""

    K: float
    T: float

    def __post_init__(self):
        if not (self.K > 0.0 and math.isfinite(self.K)):
            raise ValueError(f"plant gain K must be positive, got {self.K}")
        if not (self.T > 0.0 and math.isfinite(self.T)):
            raise ValueError(f"plant time constant T must be positive, got {self.T}")


@dataclass(frozen=True)
class HydraulicDerivation:
    """Reconstructed internal flow/pressure state for diagnostics (SI units).

    Q: valve flow (m^3/s); Pc: cylinder pressure difference P1 - P2 (Pa);
    P1: lifting pressure (Pa); P2: electrode-weight pressure (Pa);
    F: force on the piston (N).
    """

    Q: float
    Pc: float
    P1: float
    P2: float
    F: float


@dataclass(frozen=True)
class TransferFunction:
    """Rational transfer function as polynomial coefficients, descending powers of s."""

    num: tuple[float, ...]
    den: tuple[float, ...]


@dataclass(frozen=True)
class PlantTransfer:
    """Position and velocity transfer functions of the lift plant."""

    position: TransferFunction  # K / (s*(T*s + 1)),  mm/V
    velocity: TransferFunction  # K / (T*s + 1),      mm/(s*V)


def derive_lti(h: HydraulicParams) -> PlantLTI:
    """Reduce the physical constants to the (K, T) plant.

    K = (k1/A) * 1000 in mm/(s*V), T = -m*k2/A^2 in s.  Independent of rho
    and g by construction.
    """
    return PlantLTI(K=(h.k1 / h.A) * MM_PER_M, T=-h.m * h.k2 / (h.A * h.A))


def hydraulic_state(u: float, v: float, h: HydraulicParams) -> HydraulicDerivation:
    """Internal pressures/flows consistent with drive u (V) and velocity v (m/s).

    Q = A*v;  Pc = (A*v - k1*u)/k2;  P2 = m*g/A;  P1 = Pc + P2;
    F = A*Pc + m*g.
    """
    q = h.A * v
    pc = (q - h.k1 * u) / h.k2
    p2 = h.m * h.g / h.A
    return HydraulicDerivation(Q=q, Pc=pc, P1=pc + p2, P2=p2, F=h.A * pc + h.m * h.g)


def transfer_function(lti: PlantLTI) -> PlantTransfer:
    """Coefficient form of the plant: position K/(s(Ts+1)), velocity K/(Ts+1)."""
    return PlantTransfer(
        position=TransferFunction(num=(lti.K,), den=(lti.T, 1.0, 0.0)),
        velocity=TransferFunction(num=(lti.K,), den=(lti.T, 1.0)),
    )


def analytic_step(lti: PlantLTI, u: float, t: float) -> tuple[float, float]:
    """Exact step response at time t: (L in mm, v in mm/s).

    v(t) = K*u*(1 - exp(-t/T));  L(t) = K*u*(t - T*(1 - exp(-t/T))).
    """
    if t < 0.0:
        raise ValueError(f"time must be non-negative, got {t}")
    rise = -math.expm1(-t / lti.T)
    return lti.K * u * (t - lti.T * rise), lti.K * u * rise
