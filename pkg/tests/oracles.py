"""Independent test oracles.

Everything here recomputes expected values by a route different from the
code under test: brute-force rollouts, exact rational arithmetic, or
literal re-evaluation of the defining formulas. Golden constants were
produced by a 40-digit mpmath evaluation of the same formulas on the exact
double-precision inputs.
"""

from __future__ import annotations

import math
from fractions import Fraction

# One fixed-wing Euler step at s=(17.5, 0, 0, 0, 0, 500), u=(10, 1.2, 0.1),
# dt=0.1, g=9.81, default airframe.
FW_STEP_GOLDEN = (
    17.541874763131844372,
    0.010875365906588109032,
    0.0067156513186654923161,
    1.7500000000000000971,
    0.0,
    500.0,
)

# One bicycle step at s=(0, 1.8, 20, 0.05), u=(1.0, 0.01), lf=1.17, lr=1.77.
CAR_STEP_GOLDEN = (
    1.9968625201923944618,
    1.9119824783208492592,
    20.100000000000000006,
    0.056802824562515711864,
)

DRAG_17_5_LOAD1 = 6.451372699413102419272410259234026396828
DRAG_17_5_LOAD0 = 5.049174918900000726706732776666342324396
BETA_1DEG = 0.010508274733323214471
ALPHA_17_5 = 14.715000000000000746
TAU_NEG01_17_5 = 0.11892626571525654152
B5_EXAMPLE = 99.616879034998301021
OFFSET_PSI_005 = 0.97233211630808779534


def brake_rollout(p: float, v: float, a_minus: float, a_plus: float, dt: float, steps: int):
    """Literal rollout of the braking law; returns the position sequence."""
    path = [p]
    for _ in range(steps):
        a = max(a_minus, -v / dt) if v >= 0 else min(a_plus, -v / dt)
        p, v = p + dt * v, v + dt * a
        path.append(p)
    return path


def brake_rollout_exact(p, v, a_minus, a_plus, dt) -> Fraction:
    """Exact final position of the braking rollout in rational arithmetic."""
    p, v, dt = Fraction(p), Fraction(v), Fraction(dt)
    a_minus, a_plus = Fraction(a_minus), Fraction(a_plus)
    while v != 0:
        a = max(a_minus, -v / dt) if v >= 0 else min(a_plus, -v / dt)
        p, v = p + dt * v, v + dt * a
    return p


def rel_close(a: float, b: float, tol: float = 1e-12) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def fw_margins_by_hand(s, fw, sim):
    """The five envelope margins evaluated straight from their formulas."""
    v, gamma, _psi, _x, _y, z = s
    budget = min(fw.pitch_max * sim.decay * v / sim.dt, sim.gravity * fw.load_max - sim.gravity)
    tau = -gamma / (budget / v)
    m5 = z + v * min(0.0, gamma) * (max(tau, 0.0) + sim.dt) - fw.alt_floor
    return (
        fw.v_max - v,
        v - fw.v_min,
        fw.pitch_max - gamma,
        gamma - fw.pitch_min,
        m5,
    )


def car_composed_by_hand(joint, car, sim, lane_values):
    """Compose the car barrier from independently supplied pieces.

    lane_values maps the four lane-barrier names to their values at joint;
    the headway and speed terms are recomputed here from their formulas.
    """
    ego = joint.ego
    v_fwd = max(0.0, ego.v)

    def stop(p, v, a_minus, a_plus):
        n = math.floor(abs(v) / abs(sim.dt * (a_minus if v >= 0 else a_plus)))
        rate = a_minus if v >= 0 else a_plus
        return (
            p
            + sim.dt * n * v
            + 0.5 * n * (n - 1) * sim.dt**2 * rate
            + sim.dt * (v + sim.dt * n * rate)
        )

    def lead_margin(lead):
        lead_stop = stop(lead.x, min(lead.v, v_fwd), car.lead_acc_min, car.lead_acc_max)
        ego_stop = stop(ego.x, v_fwd, car.evasive_brake, car.evasive_push)
        return (lead_stop - ego_stop) - car.min_gap - v_fwd * car.headway

    h1 = lead_margin(joint.lead1)
    h2 = lead_margin(joint.lead2)
    speed = car.speed_limit - v_fwd
    first = min(speed, lane_values["lane1-low"], lane_values["lane2-high"])
    second = max(
        min(lane_values["lane1-high"], h1),
        min(lane_values["lane2-low"], h2),
        min(h1, h2),
    )
    return min(first, second)
