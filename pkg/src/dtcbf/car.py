"""Two-lane car barriers: lane containment, lead headway, speed limit, and
their composition with one shared evasive maneuver.

Geometry: lane 1 spans y in [0, lane_width], lane 2 spans [lane_width,
2*lane_width]. The widest lateral extent of the car body around its center
is offset(s) = lf*|sin psi| + (car_width/2)*|cos psi|, so staying inside a
lane means keeping y within the lane band shrunk by offset(s) on each side.

The shared evasive maneuver brakes the ego car to a stop (brake_accel on
its speed) while steering its heading to zero:

    steer = beta_inv(asin(clip(-psi * lr / (dt * v), sin beta(-steer_max),
                                                     sin beta(steer_max))))

with steer = 0 at v = 0. Unclamped, one step lands the heading exactly on
zero; clamped, the heading walks monotonically toward zero without
overshoot. Lane barriers are rollout constructions along this maneuver;
they settle once the speed or the heading reaches (numerically) zero, after
which the lateral state is frozen.

Lead-car headway compares stopping positions: the lead braked at the full
actuator rate from a speed capped at the ego's, versus the ego braked at
its evasive rate, minus the hard gap and the speed-scaled headway. Lead
cars are assumed to hold their lane, never reverse, and never turn; that
assumption is asserted here and enforced by the environment. The two
stopping positions use different acceleration pairs on purpose: the leads'
full actuator box versus the ego's evasive pair.

The composed barrier is

    min(speed, lane1-low, lane2-high,
        max(min(lane1-high, lead1), min(lane2-low, lead2), min(lead1, lead2)))

read as: stay on the road and under the speed limit, and either keep lane 1
with headway to lead 1, keep lane 2 with headway to lead 2, or keep headway
to both while free to change lanes.
"""

from __future__ import annotations

import functools
import math

from .barrier import BarrierFn, compose_max, compose_min, rollout_barrier, rollout_trajectory
from .dblint import EvasiveAccelPair, brake_accel, stop_position, validate_pair
from .dynamics import (
    CarControl,
    CarJointState,
    CarState,
    DblIntState,
    car_beta,
    car_beta_inv,
    car_step,
)
from .errors import DomainError
from .params import CarParams, SimParams

# Settle thresholds for the lane rollout: once |v| or |psi| is this small,
# the remaining lateral drift under the maneuver is below 1e-9 m.
_V_SETTLED = 1e-9
_PSI_SETTLED = 1e-12

DEFAULT_LANE_HORIZON = 128


def evasive_pair(car: CarParams) -> EvasiveAccelPair:
    return validate_pair(
        EvasiveAccelPair(car.evasive_brake, car.evasive_push),
        car.lead_acc_min,
        car.lead_acc_max,
    )


def lead_pair(car: CarParams) -> EvasiveAccelPair:
    """Full actuator-rate pair used for worst-case lead braking."""
    return EvasiveAccelPair(car.lead_acc_min, car.lead_acc_max)


def body_offset(s: CarState, car: CarParams) -> float:
    """Largest lateral extent of the car body around its center."""
    return car.lf * abs(math.sin(s.psi)) + 0.5 * car.car_width * abs(math.cos(s.psi))


def align_steer(s: CarState, car: CarParams, sim: SimParams) -> float:
    """Steering command that drives the heading toward zero.

    Zero at standstill; otherwise the clamp keeps the command inside the
    steering box by construction.
    """
    if s.v == 0.0:
        return 0.0
    lo = math.sin(car_beta(-car.steer_max, car))
    hi = math.sin(car_beta(car.steer_max, car))
    q = min(max(-s.psi * car.lr / (sim.dt * s.v), lo), hi)
    return car_beta_inv(math.asin(q), car)


def evasive_control(s: CarState, pair: EvasiveAccelPair, car: CarParams, sim: SimParams) -> CarControl:
    """Brake to a stop while aligning the heading with the road."""
    return CarControl(
        accel=brake_accel(DblIntState(s.x, s.v), pair, sim.dt),
        steer=align_steer(s, car, sim),
    )


def lane_safety_functions(car: CarParams) -> dict:
    """Raw lane margins keyed by name: lane1-low/high, lane2-low/high."""
    w = car.lane_width

    return {
        "lane1-low": lambda s: s.y - body_offset(s, car),
        "lane1-high": lambda s: w - body_offset(s, car) - s.y,
        "lane2-low": lambda s: s.y - body_offset(s, car) - w,
        "lane2-high": lambda s: 2.0 * w - body_offset(s, car) - s.y,
    }


def _lane_settled(s: CarState) -> bool:
    return abs(s.v) <= _V_SETTLED or abs(s.psi) <= _PSI_SETTLED


def lane_barriers(
    car: CarParams,
    sim: SimParams,
    max_steps: int = DEFAULT_LANE_HORIZON,
    cache_size: int = 512,
) -> dict[str, BarrierFn]:
    """Rollout barriers for the four lane margins over the ego state.

    All four share one closed-loop trajectory under the evasive maneuver,
    memoized so that composed evaluations roll out once per state.
    """
    pair = evasive_pair(car)

    def evasive(s: CarState) -> CarControl:
        return evasive_control(s, pair, car, sim)

    def stepper(s: CarState, u: CarControl) -> CarState:
        return car_step(s, u, sim, car)

    trajectory = functools.lru_cache(maxsize=cache_size)(
        rollout_trajectory(evasive, stepper, max_steps, settled=_lane_settled)
    )
    return {
        name: rollout_barrier(
            rho,
            evasive,
            stepper,
            max_steps,
            settled=_lane_settled,
            name=name,
            trajectory=trajectory,
        )
        for name, rho in lane_safety_functions(car).items()
    }


def check_lead_assumption(joint: CarJointState, car: CarParams, tol: float = 1e-9) -> None:
    """Assert the lead-car assumption: in lane, aligned, not reversing."""
    half = 0.5 * car.car_width
    bands = (
        (joint.lead1, half, car.lane_width - half, "lead1"),
        (joint.lead2, car.lane_width + half, 2.0 * car.lane_width - half, "lead2"),
    )
    for lead, lo, hi, label in bands:
        if abs(lead.psi) > tol:
            raise DomainError(f"{label} heading must be 0, got {lead.psi}")
        if lead.v < -tol:
            raise DomainError(f"{label} speed must be >= 0, got {lead.v}")
        if not lo - tol <= lead.y <= hi + tol:
            raise DomainError(
                f"{label} must stay inside its lane: y={lead.y} not in [{lo}, {hi}]"
            )


def lead_gap_margin(joint: CarJointState, which: int, car: CarParams, sim: SimParams) -> float:
    """Stopping-position headway margin to lead 1 or 2.

    Nonnegative iff, with the lead braking at the full actuator rate from a
    speed capped at the ego's, the ego's evasive braking keeps at least
    min_gap plus the speed-scaled headway behind the lead's stopping point.
    """
    check_lead_assumption(joint, car)
    if which not in (1, 2):
        raise DomainError(f"lead index must be 1 or 2, got {which}")
    lead = joint.lead1 if which == 1 else joint.lead2
    ego = joint.ego
    dt = sim.dt
    v_fwd = max(0.0, ego.v)
    lead_stop = stop_position(
        DblIntState(lead.x, min(lead.v, v_fwd)), lead_pair(car), dt
    )
    ego_stop = stop_position(DblIntState(ego.x, v_fwd), evasive_pair(car), dt)
    return (lead_stop - ego_stop) - car.min_gap - v_fwd * car.headway


def joint_evasive(car: CarParams, sim: SimParams):
    """The shared evasive maneuver lifted to the joint state."""
    pair = evasive_pair(car)

    def evasive(joint: CarJointState) -> CarControl:
        return evasive_control(joint.ego, pair, car, sim)

    return evasive


def lead_barrier(which: int, car: CarParams, sim: SimParams) -> BarrierFn:
    return BarrierFn(
        name=f"lead{which}-headway",
        evaluate=lambda joint: lead_gap_margin(joint, which, car, sim),
        evasive=joint_evasive(car, sim),
    )


def speed_barrier(car: CarParams, sim: SimParams) -> BarrierFn:
    """speed_limit - max(0, ego speed); braking keeps it from shrinking."""
    return BarrierFn(
        name="speed-limit",
        evaluate=lambda joint: car.speed_limit - max(0.0, joint.ego.v),
        evasive=joint_evasive(car, sim),
    )


def _lift_to_joint(b: BarrierFn, shared) -> BarrierFn:
    """View an ego-state barrier as a joint-state barrier."""
    return BarrierFn(
        name=b.name,
        evaluate=lambda joint: b.evaluate(joint.ego),
        evasive=shared,
        horizon_hint=b.horizon_hint,
    )


def combined_barrier(
    car: CarParams,
    sim: SimParams,
    max_steps: int = DEFAULT_LANE_HORIZON,
) -> BarrierFn:
    """The composed road/speed/headway barrier over the joint state."""
    shared = joint_evasive(car, sim)
    lanes = {
        name: _lift_to_joint(b, shared)
        for name, b in lane_barriers(car, sim, max_steps=max_steps).items()
    }
    lead1 = lead_barrier(1, car, sim)
    lead2 = lead_barrier(2, car, sim)

    on_road = compose_min(
        speed_barrier(car, sim),
        compose_min(lanes["lane1-low"], lanes["lane2-high"], shared),
        shared,
        name="road-and-speed",
    )
    keep_lane1 = compose_min(lanes["lane1-high"], lead1, shared, name="keep-lane1")
    keep_lane2 = compose_min(lanes["lane2-low"], lead2, shared, name="keep-lane2")
    change_ok = compose_min(lead1, lead2, shared, name="headway-both")
    options = compose_max(compose_max(keep_lane1, keep_lane2), change_ok, name="lane-options")
    return compose_min(on_road, options, shared, name="car-safety")


def lead_step(lead: CarState, accel: float, sim: SimParams) -> CarState:
    """Straight-line lead dynamics (zero steering, lane held)."""
    return CarState(x=lead.x + sim.dt * lead.v, y=lead.y, v=lead.v + sim.dt * accel, psi=lead.psi)


def joint_step(
    joint: CarJointState,
    ego_u: CarControl,
    lead_accels: tuple[float, float],
    car: CarParams,
    sim: SimParams,
) -> CarJointState:
    return CarJointState(
        lead1=lead_step(joint.lead1, lead_accels[0], sim),
        lead2=lead_step(joint.lead2, lead_accels[1], sim),
        ego=car_step(joint.ego, ego_u, sim, car),
    )


def worst_case_joint_step(car: CarParams, sim: SimParams):
    """Joint stepper with both leads braking at the full actuator rate.

    The ego has no control over the leads, so constraint checks assume this
    worst case; any actual lead behavior that never reverses leaves every
    composed component at least as large.
    """
    pair = lead_pair(car)

    def stepper(joint: CarJointState, ego_u: CarControl) -> CarJointState:
        accels = (
            brake_accel(DblIntState(joint.lead1.x, joint.lead1.v), pair, sim.dt),
            brake_accel(DblIntState(joint.lead2.x, joint.lead2.v), pair, sim.dt),
        )
        return joint_step(joint, ego_u, accels, car, sim)

    return stepper


def raw_safety_margin(joint: CarJointState, car: CarParams) -> float:
    """Raw (instantaneous) safety margin mirroring the composed barrier.

    Replaces every barrier component with its underlying inequality: the
    current lane margins, the current gap minus min_gap and headway, and the
    speed limit. Used for violation accounting, never for control.
    """
    ego = joint.ego
    off = body_offset(ego, car)
    w = car.lane_width
    lane1_low = ego.y - off
    lane1_high = w - off - ego.y
    lane2_low = ego.y - off - w
    lane2_high = 2.0 * w - off - ego.y
    v_fwd = max(0.0, ego.v)
    gap1 = (joint.lead1.x - ego.x - car.min_gap) - v_fwd * car.headway
    gap2 = (joint.lead2.x - ego.x - car.min_gap) - v_fwd * car.headway
    speed = car.speed_limit - v_fwd
    on_road = min(speed, lane1_low, lane2_high)
    options = max(min(lane1_high, gap1), min(lane2_low, gap2), min(gap1, gap2))
    return min(on_road, options)
