"""Exact discrete-time steppers for the three systems.

All steppers are pure functions over immutable state tuples: equal inputs
give bit-identical outputs. Every right-hand side is evaluated from the
incoming state before anything is written, so position/heading updates use
the pre-update speed and angles. No actuator clamping happens here; keeping
the maps exact is what lets rollout constructions and test oracles share
them.

Fixed-wing state: speed v (m/s), pitch gamma (rad), heading psi (rad),
position x, y, z (m). Control: thrust (N), load factor (lift over weight,
dimensionless), bank (rad). The speed and pitch equations divide by v and
use cos(gamma) in the heading equation, hence the domain guards.

Car state: position x, y (m), speed v (m/s), heading psi (rad), with the
rear-axle slip angle beta(steer) = atan(tan(steer) * lr / (lf + lr)).

Double integrator state: position p (m), speed v (m/s); position updates
with the pre-update speed.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from .errors import DomainError
from .params import CarParams, FwParams, SimParams


class FwState(NamedTuple):
    v: float
    gamma: float
    psi: float
    x: float
    y: float
    z: float


class FwControl(NamedTuple):
    thrust: float
    load: float
    bank: float


class CarState(NamedTuple):
    x: float
    y: float
    v: float
    psi: float


class CarControl(NamedTuple):
    accel: float
    steer: float


class CarJointState(NamedTuple):
    lead1: CarState
    lead2: CarState
    ego: CarState


class DblIntState(NamedTuple):
    p: float
    v: float


class Box(NamedTuple):
    """Axis-aligned control box with membership, clamping, and sampling."""

    lo: tuple
    hi: tuple

    def contains(self, u, tol: float = 0.0) -> bool:
        return all(a - tol <= x <= b + tol for x, a, b in zip(u, self.lo, self.hi))

    def clamp(self, u) -> tuple:
        return tuple(min(max(x, a), b) for x, a, b in zip(u, self.lo, self.hi))

    def sample(self, stream) -> tuple:
        return stream.box(self.lo, self.hi)


def fw_control_box(fw: FwParams) -> Box:
    return Box((0.0, fw.load_min, -fw.bank_max), (fw.thrust_max, fw.load_max, fw.bank_max))


def car_control_box(car: CarParams) -> Box:
    return Box((car.lead_acc_min, -car.steer_max), (car.lead_acc_max, car.steer_max))


def dblint_control_box(acc_min: float, acc_max: float) -> Box:
    return Box((acc_min,), (acc_max,))


def fw_drag(v: float, load: float, fw: FwParams) -> float:
    """Drag force: parasitic 0.5*rho*v^2*A*Cd0 plus induced 2*K*n^2*W^2/(rho*v^2*A)."""
    if v <= 0:
        raise DomainError(f"drag needs v > 0, got v={v}")
    q = fw.air_density * v * v * fw.wing_area
    return 0.5 * q * fw.drag_parasitic + 2.0 * fw.drag_induced * load * load * fw.weight**2 / q


def fw_step(s: FwState, u: FwControl, sim: SimParams, fw: FwParams) -> FwState:
    """One step of the fixed-wing point-mass model."""
    v, gamma, psi, x, y, z = s
    thrust, load, bank = u
    if v <= 0:
        raise DomainError(f"fixed-wing step needs v > 0, got v={v}")
    cg = math.cos(gamma)
    if abs(cg) < 1e-12:
        raise DomainError(f"fixed-wing step needs cos(gamma) != 0, got gamma={gamma}")
    dt, g = sim.dt, sim.gravity
    drag = fw_drag(v, load, fw)
    return FwState(
        v=v + dt * g * ((thrust - drag) / fw.weight - math.sin(gamma)),
        gamma=gamma + dt * g * (load * math.cos(bank) - cg) / v,
        psi=psi + dt * g * load * math.sin(bank) / (v * cg),
        x=x + dt * v * cg * math.cos(psi),
        y=y + dt * v * cg * math.sin(psi),
        z=z + dt * v * math.sin(gamma),
    )


def car_beta(steer: float, car: CarParams) -> float:
    """Slip angle of the velocity vector for a given front steering angle."""
    return math.atan(math.tan(steer) * car.lr / (car.lf + car.lr))


def car_beta_inv(angle: float, car: CarParams) -> float:
    """Inverse of car_beta on (-pi/2, pi/2)."""
    return math.atan(math.tan(angle) * (car.lf + car.lr) / car.lr)


def car_step(s: CarState, u: CarControl, sim: SimParams, car: CarParams) -> CarState:
    """One step of the kinematic bicycle model."""
    x, y, v, psi = s
    accel, steer = u
    dt = sim.dt
    b = car_beta(steer, car)
    return CarState(
        x=x + dt * v * math.cos(psi + b),
        y=y + dt * v * math.sin(psi + b),
        v=v + dt * accel,
        psi=psi + dt * (v / car.lr) * math.sin(b),
    )


def dblint_step(s: DblIntState, accel: float, sim: SimParams) -> DblIntState:
    """One step of the double integrator (position lags speed by one step)."""
    return DblIntState(p=s.p + sim.dt * s.v, v=s.v + sim.dt * accel)
