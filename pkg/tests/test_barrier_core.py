import pytest

from dtcbf.barrier import (
    CONSTRAINT_TOL,
    BarrierFn,
    check_forward_invariance,
    compose_max,
    compose_min,
    constraint_value,
    rollout_barrier,
    rollout_trajectory,
)
from dtcbf.dblint import EvasiveAccelPair, braking_stepper, floor_barrier
from dtcbf.dynamics import DblIntState
from dtcbf.errors import HorizonError, PreconditionError
from dtcbf.params import default_params
from dtcbf.rng import RngStream

SIM = default_params()[0]
PAIR = EvasiveAccelPair(-2.0, 2.0)


def _const(value, name="const"):
    return BarrierFn(name=name, evaluate=lambda s: value, evasive=lambda s: (0.0,))


def _identity_stepper(s, u):
    return s


class TestConstraint:
    def test_full_decay_drops_current_term(self):
        h = _const(4.0)
        assert constraint_value(h, _identity_stepper, 0.0, (0.0,), 1.0) == 4.0

    def test_constant_barrier_scales_with_decay(self):
        h = _const(3.0)
        c = constraint_value(h, _identity_stepper, 0.0, (0.0,), 0.25)
        assert c == pytest.approx(0.25 * 3.0, abs=1e-15)

    def test_decay_domain(self):
        with pytest.raises(PreconditionError):
            constraint_value(_const(1.0), _identity_stepper, 0.0, (0.0,), 0.0)
        with pytest.raises(PreconditionError):
            constraint_value(_const(1.0), _identity_stepper, 0.0, (0.0,), 1.5)

    def test_braking_satisfies_floor_constraint(self):
        barrier = floor_barrier(-3.0, PAIR, SIM)
        stepper = braking_stepper(SIM)
        s = DblIntState(0.0, -2.0)
        assert barrier.evaluate(s) >= 0
        c = constraint_value(barrier, stepper, s, barrier.evasive(s), SIM.decay)
        assert c >= -CONSTRAINT_TOL


class TestComposition:
    def test_min_value(self):
        h = compose_min(_const(3.0), _const(5.0), lambda s: (1.0,))
        assert h.evaluate(None) == 3.0

    def test_min_idempotent(self):
        a = _const(2.5)
        assert compose_min(a, a, a.evasive).evaluate(None) == a.evaluate(None)

    def test_max_value_and_tie_break(self):
        hi = BarrierFn("hi", lambda s: 5.0, lambda s: "hi-control")
        lo = BarrierFn("lo", lambda s: 3.0, lambda s: "lo-control")
        assert compose_max(hi, lo).evaluate(None) == 5.0
        assert compose_max(hi, lo).evasive(None) == "hi-control"
        assert compose_max(lo, hi).evasive(None) == "hi-control"
        tied = BarrierFn("tied", lambda s: 5.0, lambda s: "tied-control")
        assert compose_max(hi, tied).evasive(None) == "hi-control"

    def test_min_uses_shared_evasive(self):
        shared = lambda s: "shared"
        h = compose_min(_const(1.0), _const(2.0), shared)
        assert h.evasive(None) == "shared"

    def test_value_associativity_and_commutativity(self):
        rng = RngStream(5)
        for _ in range(100):
            a, b, c = (_const(rng.uniform(-2, 2), n) for n in "abc")
            z = lambda s: (0.0,)
            left = compose_min(compose_min(a, b, z), c, z).evaluate(None)
            right = compose_min(a, compose_min(b, c, z), z).evaluate(None)
            assert left == right
            assert compose_max(a, b).evaluate(None) == compose_max(b, a).evaluate(None)


class TestRolloutBarrier:
    def test_constant_safety_function(self):
        stepper = braking_stepper(SIM)
        evasive = lambda s: (0.0,)

        h = rollout_barrier(lambda s: 2.25, evasive, stepper, max_steps=50,
                            settled=lambda s: s.v == 0.0)
        assert h.evaluate(DblIntState(0.0, 0.0)) == 2.25

    def test_matches_closed_form_floor(self):
        closed = floor_barrier(0.0, PAIR, SIM)
        stepper = braking_stepper(SIM)
        rolled = rollout_barrier(
            lambda s: s.p, closed.evasive, stepper, max_steps=10_000, name="low"
        )
        rng = RngStream(11)
        for _ in range(500):
            s = DblIntState(rng.uniform(-4, 4), rng.uniform(-6, 6))
            assert rolled.evaluate(s) == pytest.approx(closed.evaluate(s), abs=1e-9)

    def test_reports_settling_steps(self):
        stepper = braking_stepper(SIM)
        evasive = floor_barrier(0.0, PAIR, SIM).evasive
        h = rollout_barrier(
            lambda s: s.p,
            evasive,
            stepper,
            max_steps=100,
            settled=lambda s: abs(s.v) <= 1e-9,
            name="steps",
        )
        value, steps = h.evaluate_with_steps(DblIntState(0.0, 1.1))
        # floor(1.1 / 0.2) = 5 full-rate steps plus the final partial step.
        assert steps == 6
        assert value == 0.0
        # An exactly divisible speed needs no partial step.
        assert h.evaluate_with_steps(DblIntState(0.0, 1.0))[1] == 5

    def test_horizon_error_when_never_settling(self):
        drift = lambda s, u: DblIntState(s.p + 1.0, s.v)
        h = rollout_barrier(lambda s: s.p, lambda s: (0.0,), drift, max_steps=10)
        with pytest.raises(HorizonError):
            h.evaluate(DblIntState(0.0, 0.0))

    def test_trajectory_includes_settled_state(self):
        stepper = braking_stepper(SIM)
        evasive = floor_barrier(0.0, PAIR, SIM).evasive
        traj = rollout_trajectory(evasive, stepper, 100, settled=lambda s: abs(s.v) <= 1e-9)
        states = traj(DblIntState(0.0, 0.5))
        assert abs(states[-1].v) <= 1e-9
        assert states[0] == DblIntState(0.0, 0.5)


class TestForwardInvariance:
    def test_braking_policy_never_violates(self):
        barrier = floor_barrier(-10.0, PAIR, SIM)
        stepper = braking_stepper(SIM)
        report = check_forward_invariance(
            barrier, stepper, barrier.evasive, DblIntState(0.0, -3.0), steps=200
        )
        assert not report.violated
        assert report.min_value >= -CONSTRAINT_TOL

    def test_detects_violation(self):
        barrier = floor_barrier(0.0, PAIR, SIM)
        stepper = braking_stepper(SIM)
        full_reverse = lambda s: (-2.0,)
        report = check_forward_invariance(
            barrier, stepper, full_reverse, DblIntState(0.5, 0.0), steps=100
        )
        # A policy that ignores the barrier and reverses hits the floor.
        assert report.violated
        assert report.first_violation is not None
        assert report.min_value < 0

    def test_unsafe_start_rejected(self):
        barrier = floor_barrier(1.0, PAIR, SIM)
        with pytest.raises(PreconditionError):
            check_forward_invariance(
                barrier, braking_stepper(SIM), barrier.evasive, DblIntState(0.0, 0.0), 10
            )
