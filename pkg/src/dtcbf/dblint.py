"""Closed-form double-integrator braking machinery.

The evasive maneuver brakes toward zero speed at a fixed rate without ever
crossing zero: max(a_minus, -v/dt) while moving forward, min(a_plus, -v/dt)
while moving backward. Under that law the speed reaches zero after

    N = floor(|v| / (dt * |A|)),  A = a_minus if v >= 0 else a_plus

full-rate steps plus one partial step, and the position permanently stops at

    stop = p + dt*N*v + N(N-1)/2 * dt^2 * A + dt*(v + dt*N*A).

stop_position is the workhorse: it equals the braking rollout's final
position exactly, one step of the closed loop leaves it unchanged, and it
is monotone in v. The two position barriers keep min(p, stop) above a
floor and max(p, stop) below a ceiling; their evasive maneuver is
brake_accel and both are closed-form, with the rollout kept as a test
oracle only.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from .barrier import BarrierFn
from .dynamics import DblIntState, dblint_step
from .errors import DomainError
from .params import SimParams

# floor() of the exact speed ratio can flip at representation boundaries;
# snap to the nearest integer first so the step-invariance identity for
# stop_position survives float rounding.
_SNAP = 1e-12


class EvasiveAccelPair(NamedTuple):
    """Braking/accelerating rates used by the evasive maneuver."""

    a_minus: float  # < 0, applied while v >= 0
    a_plus: float  # > 0, applied while v < 0


def validate_pair(pair: EvasiveAccelPair, acc_min: float, acc_max: float) -> EvasiveAccelPair:
    if not (acc_min <= pair.a_minus < 0):
        raise DomainError(f"a_minus must lie in [{acc_min}, 0), got {pair.a_minus}")
    if not (0 < pair.a_plus <= acc_max):
        raise DomainError(f"a_plus must lie in (0, {acc_max}], got {pair.a_plus}")
    return pair


def brake_accel(s: DblIntState, pair: EvasiveAccelPair, dt: float) -> float:
    """Evasive acceleration: fixed-rate braking, final partial step lands on
    zero speed without overshoot (up to float rounding dust)."""
    if s.v >= 0:
        return max(pair.a_minus, -s.v / dt)
    return min(pair.a_plus, -s.v / dt)


def brake_steps(s: DblIntState, pair: EvasiveAccelPair, dt: float) -> int:
    """Number of full-rate braking steps before the final partial step."""
    rate = pair.a_minus if s.v >= 0 else pair.a_plus
    ratio = abs(s.v) / abs(dt * rate)
    nearest = round(ratio)
    if abs(ratio - nearest) <= _SNAP * max(1.0, nearest):
        ratio = float(nearest)
    return int(math.floor(ratio))


def stop_position(s: DblIntState, pair: EvasiveAccelPair, dt: float) -> float:
    """Position where the braking rollout permanently stops."""
    rate = pair.a_minus if s.v >= 0 else pair.a_plus
    n = brake_steps(s, pair, dt)
    return (
        s.p
        + dt * n * s.v
        + 0.5 * n * (n - 1) * dt * dt * rate
        + dt * (s.v + dt * n * rate)
    )


def floor_margin(s: DblIntState, p_min: float, pair: EvasiveAccelPair, dt: float) -> float:
    """min(p, stop) - p_min: nonnegative iff braking keeps p above p_min."""
    return min(s.p, stop_position(s, pair, dt)) - p_min


def ceiling_margin(s: DblIntState, p_max: float, pair: EvasiveAccelPair, dt: float) -> float:
    """p_max - max(p, stop): nonnegative iff braking keeps p below p_max."""
    return p_max - max(s.p, stop_position(s, pair, dt))


def _brake_evasive(pair: EvasiveAccelPair, dt: float):
    def evasive(s: DblIntState) -> tuple:
        return (brake_accel(s, pair, dt),)

    return evasive


def floor_barrier(p_min: float, pair: EvasiveAccelPair, sim: SimParams) -> BarrierFn:
    """Barrier keeping the position at or above p_min."""
    dt = sim.dt
    return BarrierFn(
        name=f"dblint-floor({p_min})",
        evaluate=lambda s: floor_margin(s, p_min, pair, dt),
        evasive=_brake_evasive(pair, dt),
    )


def ceiling_barrier(p_max: float, pair: EvasiveAccelPair, sim: SimParams) -> BarrierFn:
    """Barrier keeping the position at or below p_max."""
    dt = sim.dt
    return BarrierFn(
        name=f"dblint-ceiling({p_max})",
        evaluate=lambda s: ceiling_margin(s, p_max, pair, dt),
        evasive=_brake_evasive(pair, dt),
    )


def braking_stepper(sim: SimParams):
    """Stepper in the (state, control-tuple) shape the filters expect."""

    def stepper(s: DblIntState, u) -> DblIntState:
        return dblint_step(s, u[0], sim)

    return stepper
