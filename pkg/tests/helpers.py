"""Shared test oracles: brute-force solvers independent of the library's own paths."""
import math


def bisect_arc_current(p, L, iters=200):
    """Solve the circuit voltage balance for I by bisection.

    Treats the current as the unknown of (Ua + I*R2)^2 + (I*X)^2 = E2'^2 with
    Ua fixed by the arc-voltage law; independent oracle for the closed form.
    """
    ua = p.beta * L + p.alpha
    e2p = p.referred_voltage
    x = p.total_reactance
    s = x * x + p.R2 * p.R2

    def g(i):
        return (ua + i * p.R2) ** 2 + (i * x) ** 2 - e2p * e2p

    lo, hi = 0.0, 2.0 * e2p / math.sqrt(s)
    assert g(lo) <= 0.0 <= g(hi), "oracle bracket must straddle the root"
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bisect_impedance_root(p, z_target, iters=200):
    """Arc length solving Z(L) = z_target, by bisection on the impedance map."""
    from arcplant import impedance, valid_arc_range

    lo, hi = 0.0, valid_arc_range(p)[1] * (1.0 - 1e-9)
    assert impedance(lo, p) <= z_target <= impedance(hi, p)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if impedance(mid, p) < z_target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
