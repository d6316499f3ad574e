"""Barrier function core: constraint evaluation, composition, rollout
construction, and forward-invariance checking.

A barrier is an output function h over states with superlevel safe set
{s : h(s) >= 0} and a paired evasive maneuver that certifies the one-step
constraint

    c(s, u) = h(f(s, u)) - (1 - decay) * h(s) >= 0

for at least one admissible control at every safe state. Barriers compose:
the pointwise max of two barriers is a barrier, and the pointwise min is a
barrier when one shared control satisfies both constraints simultaneously
(the shared-maneuver hypothesis, asserted by the caller of compose_min).

A barrier can also be constructed from a plain safety function rho (the raw
margin whose sign encodes the requirement) by rolling the system out under
the evasive maneuver and taking the running minimum of rho. The rollout
stops at the first settled state, so the caller must supply a settledness
test that implies rho can no longer decrease; the default test is an exact
fixpoint of the closed loop.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Callable

from .errors import HorizonError, PreconditionError

# Certified maneuvers must satisfy the constraint up to this slack (pure
# float error on exact theorems); raw safety margins get the looser
# VIOLATION_TOL before a state counts as unsafe.
CONSTRAINT_TOL = 1e-9
VIOLATION_TOL = 1e-6

State = Any
Control = Any
Stepper = Callable[[State, Control], State]


@dataclass(frozen=True)
class BarrierFn:
    """An evaluatable barrier with its evasive maneuver.

    evaluate maps a state to the barrier value; evasive maps a state to a
    control that keeps the constraint nonnegative whenever evaluate(s) >= 0.
    evaluate_with_steps, present on rollout-constructed barriers, also
    reports how many steps the rollout took to settle.
    """

    name: str
    evaluate: Callable[[State], float]
    evasive: Callable[[State], Control]
    horizon_hint: int | None = None
    evaluate_with_steps: Callable[[State], tuple[float, int]] | None = None

    def __repr__(self) -> str:  # pragma: no cover
        return f"BarrierFn({self.name!r})"


def constraint_value(
    h: BarrierFn,
    stepper: Stepper,
    s: State,
    u: Control,
    decay: float,
    h_s: float | None = None,
) -> float:
    """c(s, u) = h(f(s, u)) - (1 - decay) * h(s).

    Pass h_s to reuse an already computed h(s); decay must lie in (0, 1].
    """
    if not 0 < decay <= 1:
        raise PreconditionError(f"decay must be in (0, 1], got {decay}")
    if h_s is None:
        h_s = h.evaluate(s)
    return h.evaluate(stepper(s, u)) - (1.0 - decay) * h_s


def compose_min(
    h1: BarrierFn,
    h2: BarrierFn,
    shared_evasive: Callable[[State], Control],
    name: str | None = None,
) -> BarrierFn:
    """Pointwise minimum of two barriers under one shared evasive maneuver.

    The caller asserts that shared_evasive satisfies both constituent
    constraints at every state where both are safe; that hypothesis is what
    makes the minimum a barrier.
    """
    return BarrierFn(
        name=name or f"min({h1.name},{h2.name})",
        evaluate=lambda s: min(h1.evaluate(s), h2.evaluate(s)),
        evasive=shared_evasive,
        horizon_hint=_max_hint(h1, h2),
    )


def compose_max(h1: BarrierFn, h2: BarrierFn, name: str | None = None) -> BarrierFn:
    """Pointwise maximum of two barriers.

    The evasive maneuver is taken from whichever argument attains the max at
    the evaluated state; ties go to the first argument.
    """

    def evasive(s: State) -> Control:
        if h1.evaluate(s) >= h2.evaluate(s):
            return h1.evasive(s)
        return h2.evasive(s)

    return BarrierFn(
        name=name or f"max({h1.name},{h2.name})",
        evaluate=lambda s: max(h1.evaluate(s), h2.evaluate(s)),
        evasive=evasive,
        horizon_hint=_max_hint(h1, h2),
    )


def _max_hint(h1: BarrierFn, h2: BarrierFn) -> int | None:
    hints = [h.horizon_hint for h in (h1, h2) if h.horizon_hint is not None]
    return max(hints) if hints else None


def rollout_trajectory(
    evasive: Callable[[State], Control],
    stepper: Stepper,
    max_steps: int,
    settled: Callable[[State], bool] | None = None,
) -> Callable[[State], list[State]]:
    """Closed-loop rollout under the evasive maneuver up to settledness.

    Returns a function mapping a start state to the state sequence
    [s_0, ..., s_K] where s_K is the first settled state. With no settled
    test, a state counts as settled when stepping it reproduces it exactly.
    Raises HorizonError if no state settles within max_steps steps.
    """

    def trajectory(s0: State) -> list[State]:
        states = [s0]
        s = s0
        for _ in range(max_steps):
            if settled is not None:
                if settled(s):
                    return states
                s_next = stepper(s, evasive(s))
            else:
                s_next = stepper(s, evasive(s))
                if s_next == s:
                    return states
            states.append(s_next)
            s = s_next
        if settled is not None and settled(s):
            return states
        raise HorizonError(
            f"rollout did not settle within {max_steps} steps from {s0!r}"
        )

    return trajectory


def rollout_barrier(
    rho: Callable[[State], float],
    evasive: Callable[[State], Control],
    stepper: Stepper,
    max_steps: int,
    settled: Callable[[State], bool] | None = None,
    name: str = "rollout",
    trajectory: Callable[[State], list[State]] | None = None,
) -> BarrierFn:
    """Barrier h(s) = min of rho along the evasive rollout from s.

    The settled test must guarantee that rho cannot decrease after the
    settling state, so the finite minimum equals the infinite-horizon
    infimum. Pass a shared (possibly cached) trajectory function when
    several barriers use the same maneuver and stepper.
    """
    traj = trajectory or rollout_trajectory(evasive, stepper, max_steps, settled)

    def evaluate_with_steps(s: State) -> tuple[float, int]:
        states = traj(s)
        return min(rho(x) for x in states), len(states) - 1

    return BarrierFn(
        name=name,
        evaluate=lambda s: evaluate_with_steps(s)[0],
        evasive=evasive,
        horizon_hint=max_steps,
        evaluate_with_steps=evaluate_with_steps,
    )


@dataclass(frozen=True)
class InvarianceReport:
    """Outcome of simulating a policy against a barrier."""

    steps: int
    min_value: float
    first_violation: int | None  # step index of the first h < -VIOLATION_TOL

    @property
    def violated(self) -> bool:
        return self.first_violation is not None


def check_forward_invariance(
    h: BarrierFn,
    stepper: Stepper,
    policy: Callable[[State], Control],
    s0: State,
    steps: int,
    tol: float = VIOLATION_TOL,
) -> InvarianceReport:
    """Simulate and report whether the trajectory ever leaves the safe set.

    Violations are data, not errors; only an unsafe start state raises.
    """
    h0 = h.evaluate(s0)
    if h0 < 0:
        raise PreconditionError(f"start state is unsafe: h(s0) = {h0}")
    min_value = h0
    first_violation = None
    s = s0
    for k in itertools.count(1):
        if k > steps:
            break
        s = stepper(s, policy(s))
        value = h.evaluate(s)
        min_value = min(min_value, value)
        if value < -tol and first_violation is None:
            first_violation = k
    return InvarianceReport(steps=steps, min_value=min_value, first_violation=first_violation)
