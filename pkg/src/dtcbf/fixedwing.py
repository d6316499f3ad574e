"""Flight-envelope barrier for the fixed-wing model.

The envelope requires speed in [v_min, v_max], pitch in [pitch_min,
pitch_max], and altitude at or above alt_floor. Five margins encode it:

    m1 = v_max - v
    m2 = v - v_min
    m3 = pitch_max - gamma
    m4 = gamma - pitch_min
    m5 = z + v * min(0, gamma) * (max(tau, 0) + dt) - alt_floor

where tau = -gamma / (budget / v) is the time to reach level flight while
pitching up at the per-speed budget

    budget = min(pitch_max * decay * v / dt, g * (load_max - 1)).

The margins' pointwise minimum is the barrier; its evasive maneuver holds
speed exactly (thrust cancels drag and the gravity component) while
pitching up as fast as the budget and the remaining pitch headroom allow,
wings level:

    load   = cos(gamma) + min(decay * v * (pitch_max - gamma) / dt, budget) / g
    thrust = weight * sin(gamma) + drag(v, load)
    bank   = 0.

The speed margins alone are not barriers (with zero drag, matched thrust
limits, and pitch beyond the envelope no control can hold speed), so the
minimum composition leans on the shared maneuver rather than on each margin
separately; construction validates the parameter hypotheses that make the
maneuver admissible and raises ConfigError naming any violated inequality.
"""

from __future__ import annotations

import math

from .barrier import BarrierFn
from .dynamics import FwControl, FwState, fw_drag
from .errors import ConfigError, DomainError
from .params import FwParams, SimParams


def pitch_accel_budget(s: FwState, fw: FwParams, sim: SimParams) -> float:
    """Pitch-rate budget (times speed): min of the envelope-shrinking rate
    and what the load-factor ceiling can deliver beyond level flight."""
    return min(fw.pitch_max * sim.decay * s.v / sim.dt, sim.gravity * fw.load_max - sim.gravity)


def evasive_control(s: FwState, fw: FwParams, sim: SimParams) -> FwControl:
    """Hold speed, pitch up within the budget, wings level."""
    if s.v <= 0:
        raise DomainError(f"evasive control needs v > 0, got v={s.v}")
    budget = pitch_accel_budget(s, fw, sim)
    lift = min(sim.decay * s.v * (fw.pitch_max - s.gamma) / sim.dt, budget)
    load = math.cos(s.gamma) + lift / sim.gravity
    thrust = fw.weight * math.sin(s.gamma) + fw_drag(s.v, load, fw)
    return FwControl(thrust=thrust, load=load, bank=0.0)


def time_to_level(s: FwState, fw: FwParams, sim: SimParams) -> float:
    """Time to reach zero pitch while pitching at budget/v per second."""
    budget = pitch_accel_budget(s, fw, sim)
    if budget == 0.0:
        raise DomainError("pitch budget is zero; time to level is undefined")
    return -s.gamma / (budget / s.v)


def envelope_margins(s: FwState, fw: FwParams, sim: SimParams) -> tuple[float, float, float, float, float]:
    """The five envelope margins (speed high/low, pitch high/low, altitude)."""
    climb = min(0.0, s.gamma)
    if climb == 0.0:
        # Zero factor; skip tau, which is undefined when the budget is zero.
        m5 = s.z - fw.alt_floor
    else:
        tau = time_to_level(s, fw, sim)
        m5 = s.z + s.v * climb * (max(tau, 0.0) + sim.dt) - fw.alt_floor
    return (
        fw.v_max - s.v,
        s.v - fw.v_min,
        fw.pitch_max - s.gamma,
        s.gamma - fw.pitch_min,
        m5,
    )


def envelope_margin(s: FwState, index: int, fw: FwParams, sim: SimParams) -> float:
    """One margin by 1-based index."""
    if not 1 <= index <= 5:
        raise DomainError(f"margin index must be 1..5, got {index}")
    return envelope_margins(s, fw, sim)[index - 1]


def _golden_min(f, lo: float, hi: float, tol: float = 1e-8) -> tuple[float, float]:
    """Golden-section minimum of f on [lo, hi] to a bracket of width tol."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def evasive_thrust(v: float, gamma: float, fw: FwParams, sim: SimParams) -> float:
    """Thrust commanded by the evasive maneuver at a given speed and pitch."""
    return evasive_control(FwState(v, gamma, 0.0, 0.0, 0.0, 0.0), fw, sim).thrust


def thrust_extrema(
    fw: FwParams, sim: SimParams, grid: int = 200, tol: float = 1e-8
) -> tuple[float, float]:
    """Extrema of the evasive thrust over the speed/pitch envelope box.

    Dense grid scan followed by coordinate golden-section refinement around
    the best grid cells; grid must be at least 200 per axis.
    """
    grid = max(grid, 200)
    vs = [fw.v_min + (fw.v_max - fw.v_min) * i / grid for i in range(grid + 1)]
    gs = [fw.pitch_min + (fw.pitch_max - fw.pitch_min) * i / grid for i in range(grid + 1)]

    best_min = (math.inf, fw.v_min, fw.pitch_min)
    best_max = (-math.inf, fw.v_min, fw.pitch_min)
    for v in vs:
        for g in gs:
            t = evasive_thrust(v, g, fw, sim)
            if t < best_min[0]:
                best_min = (t, v, g)
            if t > best_max[0]:
                best_max = (t, v, g)

    dv = (fw.v_max - fw.v_min) / grid
    dg = (fw.pitch_max - fw.pitch_min) / grid

    def refine(value: float, v: float, g: float, sign: float) -> float:
        # Coordinate descent over the surrounding grid cell pair.
        for _ in range(4):
            v, val = _golden_min(
                lambda x: sign * evasive_thrust(x, g, fw, sim),
                max(fw.v_min, v - dv),
                min(fw.v_max, v + dv),
                tol,
            )
            g, val = _golden_min(
                lambda x: sign * evasive_thrust(v, x, fw, sim),
                max(fw.pitch_min, g - dg),
                min(fw.pitch_max, g + dg),
                tol,
            )
        return sign * min(sign * value, val)

    t_min = refine(*best_min[:3], sign=1.0)
    t_max = refine(*best_max[:3], sign=-1.0)
    return t_min, t_max


def validate_hypotheses(fw: FwParams, sim: SimParams, grid: int = 200) -> tuple[float, float]:
    """Check the admissibility inequalities for the evasive maneuver.

    Raises ConfigError naming the first violated inequality; returns the
    evasive-thrust extrema on success.
    """
    if not fw.v_min > 0:
        raise ConfigError(f"requires v_min > 0, got {fw.v_min}")
    if not fw.load_max > 1:
        raise ConfigError(f"requires load_max > 1, got {fw.load_max}")
    if not fw.pitch_max > 0:
        raise ConfigError(f"requires pitch_max > 0, got {fw.pitch_max}")
    cos_bound = min(math.cos(fw.pitch_min), math.cos(fw.pitch_max))
    if not fw.load_min <= cos_bound:
        raise ConfigError(
            f"requires load_min <= min cos(pitch) = {cos_bound:.6f}, got {fw.load_min}"
        )
    t_min, t_max = thrust_extrema(fw, sim, grid=grid)
    if not 0 <= t_min:
        raise ConfigError(f"requires evasive thrust minimum >= 0, got {t_min}")
    if not t_max <= fw.thrust_max:
        raise ConfigError(
            f"requires evasive thrust maximum <= thrust_max = {fw.thrust_max}, got {t_max}"
        )
    return t_min, t_max


def flight_envelope_barrier(fw: FwParams, sim: SimParams, grid: int = 200) -> BarrierFn:
    """min of the five envelope margins, evasive maneuver attached.

    Hypotheses are validated once here, at construction, since they are
    parameter-level facts.
    """
    validate_hypotheses(fw, sim, grid=grid)
    return BarrierFn(
        name="flight-envelope",
        evaluate=lambda s: min(envelope_margins(s, fw, sim)),
        evasive=lambda s: evasive_control(s, fw, sim),
    )


def in_envelope(s: FwState, fw: FwParams, tol: float = 0.0) -> bool:
    """Raw envelope membership (the safety condition itself, no margins)."""
    return (
        fw.v_min - tol <= s.v <= fw.v_max + tol
        and fw.pitch_min - tol <= s.gamma <= fw.pitch_max + tol
        and s.z >= fw.alt_floor - tol
    )


def sample_safe_state(fw: FwParams, sim: SimParams, stream, alt_span: float = 200.0) -> FwState:
    """Rejection-sample a state with every envelope margin nonnegative."""
    while True:
        s = FwState(
            v=stream.uniform(fw.v_min, fw.v_max),
            gamma=stream.uniform(fw.pitch_min, fw.pitch_max),
            psi=stream.uniform(-math.pi, math.pi),
            x=stream.uniform(-100.0, 100.0),
            y=stream.uniform(-100.0, 100.0),
            z=stream.uniform(fw.alt_floor, fw.alt_floor + alt_span),
        )
        if min(envelope_margins(s, fw, sim)) >= 0:
            return s
