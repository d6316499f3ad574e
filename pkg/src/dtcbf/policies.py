"""Built-in nominal policies (stand-ins for learned controllers)."""

from __future__ import annotations

import math

from .dynamics import CarControl, FwControl, fw_drag
from .envs import CarEnv, FwEnv
from .errors import ConfigError
from .rng import RngStream

POLICY_NAMES = ("random", "constant", "greedy-waypoint", "greedy-speed")


def _wrap_pi(angle: float) -> float:
    return math.atan2(math.sin(angle), math.cos(angle))


def builtin_policy(name: str, env, stream: RngStream):
    """A state -> control callable for the given environment.

    random: uniform over the actuator box. constant: a fixed mid-box trim
    action. greedy-waypoint (fixed-wing): proportional heading/pitch pursuit
    of the next waypoint. greedy-speed (car): proportional speed tracking
    with lane-keeping steer.
    """
    base = env.env if hasattr(env, "env") else env
    box = base.control_box()

    if name == "random":
        return lambda _s: box.sample(stream)

    if name == "constant":
        if isinstance(base, FwEnv):
            u = FwControl(0.5 * base.fw.thrust_max, 1.0, 0.0)
        else:
            u = CarControl(0.0, 0.0)
        return lambda _s: u

    if name == "greedy-waypoint":
        if not isinstance(base, FwEnv):
            raise ConfigError("greedy-waypoint only drives the fixed-wing environment")
        fw = base.fw
        v_ref = 0.5 * (fw.v_min + fw.v_max)

        def fw_policy(s):
            w = base.current_target()
            if w is None:
                return FwControl(0.5 * fw.thrust_max, math.cos(s.gamma), 0.0)
            dx, dy, dz = w[0] - s.x, w[1] - s.y, w[2] - s.z
            pitch_goal = math.atan2(dz, math.hypot(dx, dy))
            pitch_goal = min(max(pitch_goal, fw.pitch_min), fw.pitch_max)
            heading_err = _wrap_pi(math.atan2(dy, dx) - s.psi)
            bank = min(max(2.0 * heading_err, -fw.bank_max), fw.bank_max)
            load = math.cos(s.gamma) + 2.0 * (pitch_goal - s.gamma)
            load = min(max(load, fw.load_min), fw.load_max)
            thrust = fw_drag(s.v, load, fw) + fw.weight * math.sin(s.gamma)
            thrust += 2.0 * (v_ref - s.v)
            return FwControl(min(max(thrust, 0.0), fw.thrust_max), load, bank)

        return fw_policy

    if name == "greedy-speed":
        if not isinstance(base, CarEnv):
            raise ConfigError("greedy-speed only drives the car environment")
        car = base.car
        v_tgt = base.config.target_speed

        def car_policy(joint):
            ego = joint.ego
            accel = min(max(v_tgt - ego.v, car.lead_acc_min), car.lead_acc_max)
            lane_center = 0.5 * car.lane_width if ego.y < car.lane_width else 1.5 * car.lane_width
            steer = -0.5 * ego.psi - 0.02 * (ego.y - lane_center)
            steer = min(max(steer, -car.steer_max), car.steer_max)
            return CarControl(accel, steer)

        return car_policy

    raise ConfigError(f"unknown policy {name!r}; choose from {POLICY_NAMES}")
