"""Numeric verification suites.

Each suite re-derives a family of guarantees by sampling, rollout oracles,
or exhaustive grids and reports failures with counterexample states. The
CLI `verify` subcommand drives these with moderate sample counts; the
acceptance tests call the same functions at full scale.

Tolerances: certified one-step constraints are checked against
-CONSTRAINT_TOL (1e-9, pure float error on exact theorems); trajectory
safety is checked against -VIOLATION_TOL (1e-6); the stop-position
step-invariance identity is held to 1e-12 relative (with a floor of 1 on
the scale); exact algebraic identities are additionally checked in rational
arithmetic, where they must hold bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

from . import car as carmod
from . import dblint as dbl
from . import fixedwing as fwmod
from .barrier import (
    CONSTRAINT_TOL,
    BarrierFn,
    check_forward_invariance,
    compose_max,
    compose_min,
    constraint_value,
)
from .dynamics import (
    CarJointState,
    CarState,
    DblIntState,
    FwState,
    car_control_box,
    dblint_control_box,
    dblint_step,
    fw_control_box,
    fw_step,
)
from .envs import CarEnv, FwEnv, wrap_with_filter
from .errors import ConfigError
from .filters import (
    MODE_NOMINAL,
    filter_line,
    filter_single,
    filter_with_candidates,
    grid_oracle,
)
from .params import CarParams, FwParams, SimParams, default_params
from .policies import builtin_policy
from .rng import RngStream

_REL_TOL = 1e-12
_MAX_FAILURES = 10  # counterexamples kept per suite


@dataclass
class CheckResult:
    name: str
    passed: bool
    checks: int
    failures: list[str] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "checks": self.checks,
            "failures": self.failures,
            "details": self.details,
        }


class _Collector:
    def __init__(self, name: str):
        self.name = name
        self.checks = 0
        self.failures: list[str] = []
        self.details: dict = {}

    def expect(self, ok: bool, message: str) -> None:
        self.checks += 1
        if not ok:
            self.details["failed_checks"] = self.details.get("failed_checks", 0) + 1
            if len(self.failures) < _MAX_FAILURES:
                self.failures.append(message)

    def result(self) -> CheckResult:
        failed = self.details.get("failed_checks", 0)
        return CheckResult(
            name=self.name,
            passed=failed == 0,
            checks=self.checks,
            failures=self.failures,
            details=self.details,
        )


# ---------------------------------------------------------------------------
# double integrator


def rollout_stop(s: DblIntState, pair: dbl.EvasiveAccelPair, dt: float, extra: int = 5):
    """Float rollout oracle: brake until stopped, return the position path.

    Returns (positions, stop_index) where positions extends `extra` steps
    past the stop to witness permanence.
    """
    sim = SimParams(dt=dt)
    n = dbl.brake_steps(s, pair, dt)
    positions = [s.p]
    cur = s
    for _ in range(n + 1 + extra):
        cur = dblint_step(cur, dbl.brake_accel(cur, pair, dt), sim)
        positions.append(cur.p)
    return positions, n + 1


def rollout_stop_exact(s: DblIntState, pair: dbl.EvasiveAccelPair, dt: float) -> Fraction:
    """Exact rational rollout: the stopping position with no rounding."""
    p, v = Fraction(s.p), Fraction(s.v)
    d = Fraction(dt)
    a_minus, a_plus = Fraction(pair.a_minus), Fraction(pair.a_plus)
    while v != 0:
        a = max(a_minus, -v / d) if v >= 0 else min(a_plus, -v / d)
        p, v = p + d * v, v + d * a
    return p


def stop_position_exact(s: DblIntState, pair: dbl.EvasiveAccelPair, dt: float) -> Fraction:
    """The closed form evaluated in rational arithmetic."""
    p, v = Fraction(s.p), Fraction(s.v)
    d = Fraction(dt)
    rate = Fraction(pair.a_minus) if v >= 0 else Fraction(pair.a_plus)
    n = abs(v) / (d * abs(rate))
    n = math.floor(n)
    return p + d * n * v + Fraction(n * (n - 1), 2) * d * d * rate + d * (v + d * n * rate)


def _sample_pair(rng: RngStream) -> dbl.EvasiveAccelPair:
    return dbl.EvasiveAccelPair(rng.uniform(-3.0, -0.5), rng.uniform(0.5, 3.0))


def check_dblint_lemma(
    sim: SimParams | None = None,
    n: int = 20_000,
    exact_n: int = 1_000,
    seed: int = 1001,
) -> CheckResult:
    """Braking-law lemmas: permanence, one-sidedness, step invariance,
    continuity, monotonicity, and the floor/ceiling barrier constraints."""
    sim = sim or default_params()[0]
    dt = sim.dt
    col = _Collector("dblint-lemma")
    rng = RngStream(seed)

    for i in range(n):
        pair = _sample_pair(rng)
        wide = i % 5 == 0
        s = DblIntState(rng.uniform(-10.0, 10.0), rng.uniform(-35.0, 35.0) if wide else rng.uniform(-6.0, 6.0))
        stop = dbl.stop_position(s, pair, dt)

        positions, stop_idx = rollout_stop(s, pair, dt)
        tail = positions[stop_idx:]
        if any(abs(p - stop) > 1e-9 * max(1.0, abs(stop)) for p in tail):
            col.expect(False, f"stop position not reached/held: s={s}, pair={pair}")
        else:
            col.expect(True, "")

        if s.v >= 0:
            col.expect(
                all(p <= stop + 1e-9 for p in positions),
                f"path exceeded stop position: s={s}, pair={pair}",
            )
        else:
            col.expect(
                all(p >= stop - 1e-9 for p in positions),
                f"path undershot stop position: s={s}, pair={pair}",
            )

        s_next = dblint_step(s, dbl.brake_accel(s, pair, dt), sim)
        stop_next = dbl.stop_position(s_next, pair, dt)
        col.expect(
            abs(stop_next - stop) <= _REL_TOL * max(1.0, abs(stop)),
            f"stop position moved after one braking step: s={s}, {stop} -> {stop_next}",
        )

        # Monotone in v: compare against a nearby higher speed.
        dv = abs(rng.uniform(0.0, 1.0))
        higher = dbl.stop_position(DblIntState(s.p, s.v + dv), pair, dt)
        col.expect(
            higher >= stop - 1e-12,
            f"stop position not monotone in v: s={s}, dv={dv}",
        )

    # Continuity sweeps across the floor boundary of the step count.
    for k in range(1, 60):
        pair = dbl.EvasiveAccelPair(-2.0, 2.0)
        v_edge = k * dt * 2.0
        for eps in (1e-9, 1e-7):
            lo = dbl.stop_position(DblIntState(0.0, v_edge - eps), pair, dt)
            hi = dbl.stop_position(DblIntState(0.0, v_edge + eps), pair, dt)
            col.expect(
                abs(hi - lo) <= 1e-4,
                f"stop position jumps at step-count boundary v={v_edge}: {lo} vs {hi}",
            )

    # Exact rational identity: closed form == rollout, bit for bit.
    rng_exact = RngStream(seed, 1)
    for _ in range(exact_n):
        pair = _sample_pair(rng_exact)
        s = DblIntState(rng_exact.uniform(-10.0, 10.0), rng_exact.uniform(-6.0, 6.0))
        col.expect(
            stop_position_exact(s, pair, dt) == rollout_stop_exact(s, pair, dt),
            f"closed form != exact rollout at s={s}, pair={pair}",
        )

    # Barrier theorem: braking satisfies the constraint on both barriers.
    stepper = dbl.braking_stepper(sim)
    rng_thm = RngStream(seed, 2)
    for _ in range(n // 2):
        pair = _sample_pair(rng_thm)
        s = DblIntState(rng_thm.uniform(-5.0, 5.0), rng_thm.uniform(-6.0, 6.0))
        for barrier in (dbl.floor_barrier(-5.0, pair, sim), dbl.ceiling_barrier(5.0, pair, sim)):
            if barrier.evaluate(s) < 0:
                continue
            c = constraint_value(barrier, stepper, s, barrier.evasive(s), sim.decay)
            col.expect(
                c >= -CONSTRAINT_TOL,
                f"{barrier.name} constraint violated: c={c} at s={s}, pair={pair}",
            )

    return col.result()


# ---------------------------------------------------------------------------
# fixed wing


def check_fw_theorems(
    fw: FwParams | None = None,
    sim: SimParams | None = None,
    n: int = 20_000,
    invariance_runs: int = 10,
    invariance_steps: int = 1000,
    remark_grid: int = 25,
    seed: int = 2002,
) -> CheckResult:
    """Envelope containment, maneuver admissibility, per-margin constraints,
    evasive-only invariance, and the speed-margins-alone counterexample."""
    if fw is None or sim is None:
        s_, f_, _ = default_params()
        sim = sim or s_
        fw = fw or f_
    col = _Collector("fw-theorems")
    rng = RngStream(seed)
    box = fw_control_box(fw)

    def stepper(s, u):
        return fw_step(s, u, sim, fw)

    barrier = fwmod.flight_envelope_barrier(fw, sim)
    for _ in range(n):
        s = fwmod.sample_safe_state(fw, sim, rng)
        col.expect(fwmod.in_envelope(s, fw), f"margins >= 0 but outside envelope: {s}")
        u = fwmod.evasive_control(s, fw, sim)
        col.expect(box.contains(u, tol=CONSTRAINT_TOL), f"evasive outside box at {s}: {u}")
        margins = fwmod.envelope_margins(s, fw, sim)
        nxt = stepper(s, u)
        margins_next = fwmod.envelope_margins(nxt, fw, sim)
        for i, (m0, m1) in enumerate(zip(margins, margins_next), start=1):
            col.expect(
                m1 - (1.0 - sim.decay) * m0 >= -CONSTRAINT_TOL,
                f"margin {i} constraint violated at {s}: {m1 - (1.0 - sim.decay) * m0}",
            )
        col.expect(
            abs(nxt.v - s.v) <= _REL_TOL * max(1.0, abs(s.v)),
            f"evasive maneuver failed to hold speed at {s}: {s.v} -> {nxt.v}",
        )

    rng_inv = RngStream(seed, 1)
    for _ in range(invariance_runs):
        s0 = fwmod.sample_safe_state(fw, sim, rng_inv)
        report = check_forward_invariance(barrier, stepper, barrier.evasive, s0, invariance_steps)
        col.expect(
            not report.violated,
            f"evasive-only trajectory left the safe set from {s0} at step {report.first_violation}",
        )

    # Counterexample family: with zero drag and thrust capped at
    # weight*sin(pitch_max), no control can keep speed above v_min once the
    # pitch exceeds the envelope, so the speed margin alone is not a barrier.
    patho = replace(
        fw,
        thrust_max=fw.weight * math.sin(fw.pitch_max),
        drag_parasitic=0.0,
        drag_induced=0.0,
    )
    pbox = fw_control_box(patho)
    escapes = 0
    total = 0
    for gamma in (fw.pitch_max + 0.05, fw.pitch_max + 0.3, math.pi / 2 - 0.01):
        s = FwState(fw.v_min, gamma, 0.0, 0.0, 0.0, 500.0)
        for i in range(remark_grid + 1):
            thrust = pbox.lo[0] + (pbox.hi[0] - pbox.lo[0]) * i / remark_grid
            for j in range(remark_grid + 1):
                load = pbox.lo[1] + (pbox.hi[1] - pbox.lo[1]) * j / remark_grid
                for k in range(remark_grid + 1):
                    bank = pbox.lo[2] + (pbox.hi[2] - pbox.lo[2]) * k / remark_grid
                    total += 1
                    nxt = fw_step(s, (thrust, load, bank), sim, patho)
                    if nxt.v - patho.v_min >= 0:
                        escapes += 1
    col.expect(escapes == 0, f"counterexample admits {escapes} safe controls out of {total}")
    col.details["remark_grid_points"] = total

    t_min, t_max = fwmod.validate_hypotheses(fw, sim)
    col.details["evasive_thrust_extrema"] = [t_min, t_max]
    return col.result()


def brute_force_thrust_extrema(fw: FwParams, sim: SimParams, grid: int = 999) -> tuple[float, float]:
    """Independent dense-grid extrema of the evasive thrust (test oracle)."""
    t_min, t_max = math.inf, -math.inf
    for i in range(grid + 1):
        v = fw.v_min + (fw.v_max - fw.v_min) * i / grid
        for j in range(grid + 1):
            g = fw.pitch_min + (fw.pitch_max - fw.pitch_min) * j / grid
            t = fwmod.evasive_thrust(v, g, fw, sim)
            t_min = min(t_min, t)
            t_max = max(t_max, t)
    return t_min, t_max


# ---------------------------------------------------------------------------
# car


def _sample_lead(rng: RngStream, car: CarParams, lane: int, x_lo: float, x_hi: float, v_hi: float) -> CarState:
    half = 0.5 * car.car_width
    lo = (lane - 1) * car.lane_width + half
    hi = lane * car.lane_width - half
    return CarState(
        x=rng.uniform(x_lo, x_hi),
        y=rng.uniform(lo + 1e-3, hi - 1e-3),
        v=rng.uniform(0.0, v_hi),
        psi=0.0,
    )


def sample_joint_state(rng: RngStream, car: CarParams, v_hi: float = 31.3) -> CarJointState:
    ego = CarState(
        x=0.0,
        y=rng.uniform(0.5, 2.0 * car.lane_width - 0.5),
        v=rng.uniform(-2.0, v_hi),
        psi=rng.uniform(-0.25, 0.25),
    )
    return CarJointState(
        lead1=_sample_lead(rng, car, 1, 20.0, 600.0, v_hi),
        lead2=_sample_lead(rng, car, 2, 20.0, 600.0, v_hi),
        ego=ego,
    )


def check_car_theorem(
    car: CarParams | None = None,
    sim: SimParams | None = None,
    n: int = 20_000,
    seed: int = 3003,
) -> CheckResult:
    """Headway barrier constraints through each proof case, the speed
    barrier, and the composed barrier under the shared maneuver."""
    if car is None or sim is None:
        s_, _, c_ = default_params()
        sim = sim or s_
        car = car or c_
    col = _Collector("car-theorem")
    stepper = carmod.worst_case_joint_step(car, sim)
    decay = sim.decay
    box = car_control_box(car)
    lead1 = carmod.lead_barrier(1, car, sim)
    lead2 = carmod.lead_barrier(2, car, sim)
    speed = carmod.speed_barrier(car, sim)
    composed = carmod.combined_barrier(car, sim)

    def _case1(rng):
        return rng.uniform(-5.0, 0.0), rng.uniform(0.0, 31.3)

    def _case2a(rng):
        v3 = rng.uniform(0.0, 31.3)
        return v3, rng.uniform(0.0, v3)

    def _case2b(rng):
        v3 = rng.uniform(0.0, 31.3)
        return v3, rng.uniform(v3, 35.0)

    cases = {
        "case1-reversing": _case1,
        "case2a-lead-slower": _case2a,
        "case2b-lead-faster": _case2b,
    }

    per_case = max(1, n // len(cases))
    for case_id, (label, draw) in enumerate(cases.items()):
        rng = RngStream(seed, case_id)
        done = 0
        while done < per_case:
            v3, v_lead = draw(rng)
            joint = sample_joint_state(rng, car)
            joint = CarJointState(
                lead1=joint.lead1._replace(v=v_lead),
                lead2=joint.lead2._replace(v=rng.uniform(0.0, 35.0)),
                ego=joint.ego._replace(v=v3),
            )
            for h in (lead1, lead2):
                if h.evaluate(joint) < 0:
                    continue
                u = h.evasive(joint)
                col.expect(box.contains(u, tol=CONSTRAINT_TOL), f"{label}: maneuver outside box at {joint}")
                c = constraint_value(h, stepper, joint, u, decay)
                col.expect(
                    c >= -CONSTRAINT_TOL,
                    f"{label}: {h.name} constraint violated, c={c} at {joint}",
                )
            done += 1

    rng = RngStream(seed, 7)
    for _ in range(n // 2):
        joint = sample_joint_state(rng, car)
        if speed.evaluate(joint) < 0:
            continue
        c = constraint_value(speed, stepper, joint, speed.evasive(joint), decay)
        col.expect(c >= -CONSTRAINT_TOL, f"speed barrier constraint violated: c={c} at {joint}")

    rng = RngStream(seed, 8)
    accepted = 0
    while accepted < n // 4:
        joint = sample_joint_state(rng, car)
        if composed.evaluate(joint) < 0:
            continue
        accepted += 1
        u = composed.evasive(joint)
        col.expect(box.contains(u, tol=CONSTRAINT_TOL), f"composed maneuver outside box at {joint}")
        c = constraint_value(composed, stepper, joint, u, decay)
        col.expect(c >= -CONSTRAINT_TOL, f"composed constraint violated: c={c} at {joint}")
    return col.result()


# ---------------------------------------------------------------------------
# composition


def check_composition(n: int = 20_000, seed: int = 4004) -> CheckResult:
    """Min/max composition algebra and the shared-control min lemma."""
    col = _Collector("composition")
    rng = RngStream(seed)

    def rand_quadratic(r: RngStream):
        a = [r.uniform(-1.0, 1.0) for _ in range(6)]
        return lambda s: a[0] + a[1] * s[0] + a[2] * s[1] + a[3] * s[0] * s[1] + a[4] * s[0] ** 2 + a[5] * s[1] ** 2

    def rand_linear_system(r: RngStream):
        m = [r.uniform(-1.0, 1.0) for _ in range(6)]

        def f(s, u):
            return (
                m[0] * s[0] + m[1] * s[1] + m[2] * u[0],
                m[3] * s[0] + m[4] * s[1] + m[5] * u[0],
            )

        return f

    accepted = 0
    while accepted < n:
        q1, q2 = rand_quadratic(rng), rand_quadratic(rng)
        f = rand_linear_system(rng)
        lam = rng.uniform(0.05, 1.0)
        s = (rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0))
        u = (rng.uniform(-2.0, 2.0),)
        nxt = f(s, u)
        c1 = q1(nxt) - (1.0 - lam) * q1(s)
        c2 = q2(nxt) - (1.0 - lam) * q2(s)
        if c1 < 0 or c2 < 0:
            continue
        accepted += 1
        c3 = min(q1(nxt), q2(nxt)) - (1.0 - lam) * min(q1(s), q2(s))
        col.expect(
            c3 >= -CONSTRAINT_TOL,
            f"min-composed constraint violated: c3={c3} with c1={c1}, c2={c2}",
        )

    # Value algebra: associativity and commutativity of min/max composition.
    def bf(fn, name):
        return BarrierFn(name=name, evaluate=fn, evasive=lambda s: (0.0,))

    zeta = lambda s: (0.0,)
    rng_alg = RngStream(seed, 1)
    for _ in range(500):
        hs = [bf(rand_quadratic(rng_alg), f"q{i}") for i in range(3)]
        s = (rng_alg.uniform(-2.0, 2.0), rng_alg.uniform(-2.0, 2.0))
        left = compose_min(compose_min(hs[0], hs[1], zeta), hs[2], zeta).evaluate(s)
        right = compose_min(hs[0], compose_min(hs[1], hs[2], zeta), zeta).evaluate(s)
        col.expect(left == right, f"min composition not associative at {s}")
        ab = compose_max(hs[0], hs[1]).evaluate(s)
        ba = compose_max(hs[1], hs[0]).evaluate(s)
        col.expect(ab == ba, f"max composition not commutative at {s}")
        same = compose_min(hs[0], hs[0], zeta).evaluate(s)
        col.expect(same == hs[0].evaluate(s), f"min composition not idempotent at {s}")
    return col.result()


# ---------------------------------------------------------------------------
# filters


def _dblint_setup(sim: SimParams):
    pair = dbl.EvasiveAccelPair(-2.86, 2.86)
    low = dbl.floor_barrier(-20.0, pair, sim)
    high = dbl.ceiling_barrier(20.0, pair, sim)
    barrier = compose_min(low, high, low.evasive, name="dblint-corridor")
    return barrier, dbl.braking_stepper(sim), dblint_control_box(-3.0, 3.0), pair


def sample_safe_dblint(rng: RngStream, barrier: BarrierFn, pair, sim: SimParams) -> DblIntState:
    while True:
        s = DblIntState(rng.uniform(-20.0, 20.0), rng.uniform(-10.0, 10.0))
        if barrier.evaluate(s) >= 0:
            return s


def check_filter_soundness(
    n_dblint: int = 20_000,
    n_fw: int = 3_000,
    n_car: int = 500,
    segments: int = 32,
    seed: int = 5005,
) -> CheckResult:
    """Every decision is admissible, satisfies the constraint, is
    deterministic, and passes safe nominals through bit-exactly."""
    sim, fw, car = default_params()
    col = _Collector("filter-soundness")

    systems = []
    dbarrier, dstepper, dbox, dpair = _dblint_setup(sim)
    rng_d = RngStream(seed)
    systems.append(
        (
            "dblint",
            n_dblint,
            dbarrier,
            dstepper,
            dbox,
            lambda: sample_safe_dblint(rng_d, dbarrier, dpair, sim),
            lambda: (rng_d.uniform(-4.0, 4.0),),
        )
    )

    fbarrier = fwmod.flight_envelope_barrier(fw, sim)
    fbox = fw_control_box(fw)
    rng_f = RngStream(seed, 1)

    def fstepper(s, u):
        return fw_step(s, u, sim, fw)

    systems.append(
        (
            "fw",
            n_fw,
            fbarrier,
            fstepper,
            fbox,
            lambda: fwmod.sample_safe_state(fw, sim, rng_f),
            lambda: tuple(rng_f.uniform(lo - 2.0, hi + 2.0) for lo, hi in zip(fbox.lo, fbox.hi)),
        )
    )

    cbarrier = carmod.combined_barrier(car, sim)
    cstepper = carmod.worst_case_joint_step(car, sim)
    cbox = car_control_box(car)
    rng_c = RngStream(seed, 2)

    def safe_joint():
        while True:
            joint = sample_joint_state(rng_c, car)
            if cbarrier.evaluate(joint) >= 0:
                return joint

    systems.append(
        (
            "car",
            n_car,
            cbarrier,
            cstepper,
            cbox,
            safe_joint,
            lambda: tuple(rng_c.uniform(1.5 * lo, 1.5 * hi) for lo, hi in zip(cbox.lo, cbox.hi)),
        )
    )

    for label, count, barrier, stepper, box, draw_state, draw_nominal in systems:
        for _ in range(count):
            s = draw_state()
            nominal = draw_nominal()
            mid = tuple(0.5 * (a + b) for a, b in zip(box.lo, box.hi))
            decisions = [
                filter_single(barrier, stepper, s, nominal, sim.decay, box),
                filter_line(barrier, stepper, s, nominal, sim.decay, box, segments),
                filter_with_candidates(
                    barrier, stepper, s, nominal, [mid], sim.decay, box, segments
                ),
            ]
            repeat = filter_line(barrier, stepper, s, nominal, sim.decay, box, segments)
            col.expect(
                repeat == decisions[1],
                f"{label}: line filter not deterministic at {s}, nominal={nominal}",
            )
            for dec in decisions:
                col.expect(
                    box.contains(dec.applied, tol=1e-12),
                    f"{label}: applied control outside box: {dec.applied}",
                )
                col.expect(
                    dec.constraint_value >= -CONSTRAINT_TOL,
                    f"{label}: decision constraint {dec.constraint_value} at {s}",
                )
                c_applied = constraint_value(barrier, stepper, s, dec.applied, sim.decay)
                col.expect(
                    c_applied >= -CONSTRAINT_TOL,
                    f"{label}: recomputed constraint {c_applied} at {s}",
                )
                if dec.mode == MODE_NOMINAL:
                    col.expect(
                        tuple(dec.applied) == box.clamp(nominal),
                        f"{label}: passed nominal not bit-equal after clamp",
                    )
                    col.expect(
                        dec.override_distance == 0.0,
                        f"{label}: passed nominal with nonzero distance",
                    )
    return col.result()


def check_filter_dominance(
    n: int = 2_000,
    segments: int = 32,
    resolution: int = 1000,
    seed: int = 5406,
) -> CheckResult:
    """Oracle <= candidate-line <= line <= single on override distance, with
    every output safe (double integrator, unsafe nominals only).

    The oracle searches the box grid plus the evasive maneuver plus the
    other filters' outputs, which is what makes the chain well defined.
    """
    sim, _, _ = default_params()
    barrier, stepper, box, pair = _dblint_setup(sim)
    col = _Collector("filter-dominance")
    rng = RngStream(seed)
    produced = 0
    while produced < n:
        s = sample_safe_dblint(rng, barrier, pair, sim)
        nominal = (rng.uniform(-3.5, 3.5),)
        single = filter_single(barrier, stepper, s, nominal, sim.decay, box)
        if single.mode == MODE_NOMINAL:
            continue
        produced += 1
        line = filter_line(barrier, stepper, s, nominal, sim.decay, box, segments)
        oracle_u = grid_oracle(
            barrier,
            stepper,
            s,
            nominal,
            sim.decay,
            box,
            resolution=resolution,
            extra_candidates=[single.applied, line.applied],
        )
        cand = filter_with_candidates(
            barrier, stepper, s, nominal, [oracle_u], sim.decay, box, segments
        )
        oracle_final = grid_oracle(
            barrier,
            stepper,
            s,
            nominal,
            sim.decay,
            box,
            resolution=resolution,
            extra_candidates=[single.applied, line.applied, cand.applied],
        )
        nom = box.clamp(nominal)
        d_oracle = math.dist(oracle_final, nom)
        chain = (d_oracle, cand.override_distance, line.override_distance, single.override_distance)
        ok = all(a <= b + 1e-12 for a, b in zip(chain, chain[1:]))
        col.expect(ok, f"dominance chain broken at s={s}, nominal={nominal}: {chain}")
        for u in (oracle_final, cand.applied, line.applied, single.applied):
            c = constraint_value(barrier, stepper, s, u, sim.decay)
            col.expect(c >= -CONSTRAINT_TOL, f"unsafe output in chain at s={s}: c={c}")
    return col.result()


# ---------------------------------------------------------------------------
# invariance and horizon


def check_invariance(
    episodes: int = 20,
    modes: tuple = ("single", "line", "candidates"),
    seed: int = 6006,
) -> CheckResult:
    """Shielded episodes accumulate zero cost in both environments."""
    sim, fw, car = default_params()
    col = _Collector("invariance")
    for env_name, base in (("fw", FwEnv(sim, fw)), ("car", CarEnv(sim, car))):
        for mode in modes:
            env = wrap_with_filter(base, mode)
            total_cost = 0
            for i in range(episodes):
                env.reset(seed, 2 * i)
                policy = builtin_policy("random", env, RngStream(seed, 2 * i + 1))
                while True:
                    result = env.step(policy(env.state))
                    total_cost += result.cost
                    if result.done:
                        break
            col.expect(
                total_cost == 0,
                f"{env_name}/{mode}: shielded episodes accumulated cost {total_cost}",
            )
            col.details[f"{env_name}/{mode}/episodes"] = episodes
    return col.result()


def check_horizon(
    car: CarParams | None = None,
    sim: SimParams | None = None,
    v_hi: float = 31.3,
    psi_hi: float = 0.2,
    v_points: int = 130,
    psi_points: int = 81,
    bound: int = 33,
    seed: int = 7007,
) -> CheckResult:
    """Lane-barrier settling steps over a speed/heading grid, and genuine
    settling (doubling the budget changes no value)."""
    if car is None or sim is None:
        s_, _, c_ = default_params()
        sim = sim or s_
        car = car or c_
    col = _Collector("horizon")
    barriers = carmod.lane_barriers(car, sim)
    lane1_low = barriers["lane1-low"]
    max_steps_seen = 0
    arg_max = None
    for i in range(v_points + 1):
        v = v_hi * i / v_points
        for j in range(psi_points + 1):
            psi = -psi_hi + 2.0 * psi_hi * j / psi_points
            s = CarState(0.0, 1.8, v, psi)
            _, steps = lane1_low.evaluate_with_steps(s)
            if steps > max_steps_seen:
                max_steps_seen = steps
                arg_max = (v, psi)
    col.details["max_settle_steps"] = max_steps_seen
    col.details["arg_max"] = arg_max
    col.expect(
        max_steps_seen <= bound,
        f"settling took {max_steps_seen} steps at (v, psi)={arg_max}, bound {bound}",
    )

    doubled = carmod.lane_barriers(car, sim, max_steps=2 * carmod.DEFAULT_LANE_HORIZON)
    rng = RngStream(seed)
    for _ in range(500):
        s = CarState(0.0, rng.uniform(-1.0, 8.2), rng.uniform(0.0, v_hi), rng.uniform(-0.25, 0.25))
        for name in barriers:
            a = barriers[name].evaluate(s)
            b = doubled[name].evaluate(s)
            col.expect(a == b, f"{name} value changed with doubled budget at {s}: {a} vs {b}")
    return col.result()


SUITES = {
    "dblint-lemma": check_dblint_lemma,
    "fw-theorems": check_fw_theorems,
    "car-theorem": check_car_theorem,
    "composition": check_composition,
    "filter-soundness": check_filter_soundness,
    "filter-dominance": check_filter_dominance,
    "invariance": check_invariance,
    "horizon": check_horizon,
}


def run_suite(name: str, **kwargs) -> CheckResult:
    if name not in SUITES:
        raise ConfigError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name](**kwargs)
