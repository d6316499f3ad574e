"""Episodic evaluation environments and the safety-filter wrapper.

Both environments follow one protocol: reset(seed, stream) returns
(state, observation) and seeds every random draw from an RngStream, so a
(seed, stream, action sequence) triple fully determines every StepResult
field. step raises ProtocolError once the episode is done.

Costs are computed from the raw safety inequalities (never from barrier
values): a step costs 1 exactly when some safety component is violated by
more than VIOLATION_TOL. Episode termination and cost are separate ideas;
a terminal state that is also unsafe still records its cost.

Fixed-wing episode: start from a fixed trim state, chase 5 waypoints chained
100 m apart in x with uniform +/-25 m lateral/vertical offsets. Reward is
0.01 times the decrease in distance to the next waypoint, plus
exp(-d / 25) when crossing a waypoint's x-plane at distance d. Episodes end
at 1000 steps, on reaching the last waypoint, when the current waypoint
takes more than 10 s, or on hitting the ground (z <= 0). Unshielded flight
can also leave the model's domain (v <= 0 or |pitch| >= pi/2); that ends
the episode rather than stepping outside the dynamics' domain.

Car episode: the ego starts at 95% of the target speed in the center of
lane 1; each lane has a lead car spawned 100-500 m ahead at 0-70 mph,
resampled until the composed safety barrier is nonnegative. Leads hold a
target speed, redrawing it every 0-5 s, and move toward it at the full
acceleration rate without reversing. Passing a lead respawns a fresh one
ahead in the same lane. Reward is 1 - |v - v_target| / v_target; episodes
end on a same-lane gap below min_gap, on leaving the road, or at 1000
steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import car as carmod
from . import fixedwing as fwmod
from .barrier import VIOLATION_TOL, BarrierFn
from .dynamics import (
    Box,
    CarControl,
    CarJointState,
    CarState,
    FwControl,
    FwState,
    car_control_box,
    fw_control_box,
    fw_step,
)
from .errors import ConfigError, ProtocolError
from .filters import (
    DEFAULT_SEGMENTS,
    filter_line,
    filter_single,
    filter_with_candidates,
)
from .params import CarParams, FwParams, SimParams
from .rng import RngStream


@dataclass
class StepResult:
    observation: np.ndarray
    reward: float
    cost: int
    done: bool
    done_reason: str | None
    info: dict


@dataclass(frozen=True)
class FwEnvConfig:
    waypoint_count: int = 5
    waypoint_spacing: float = 100.0  # m along x between waypoints
    lateral_range: float = 25.0  # m, uniform +/- range for y and z offsets
    obs_scale: float = 50.0
    reward_scale: float = 0.01
    bonus_decay: float = 25.0  # m, e-folding distance of the crossing bonus
    max_steps: int = 1000
    waypoint_timeout: float = 10.0  # s allowed per waypoint
    initial_state: FwState = FwState(17.5, 0.0, 0.0, 0.0, 0.0, 500.0)


@dataclass(frozen=True)
class CarEnvConfig:
    offset_min: float = 100.0  # m, lead spawn distance ahead of the ego
    offset_max: float = 500.0
    lead_speed_min: float = 0.0
    lead_speed_max: float | None = None  # defaults to the speed limit
    retarget_min: float = 0.0  # s, lead target-speed holding time
    retarget_max: float = 5.0
    target_speed: float | None = None  # defaults to the speed limit
    initial_speed_fraction: float = 0.95
    max_steps: int = 1000
    reset_draw_limit: int = 10_000
    respawn_draw_limit: int = 1_000


class FwEnv:
    """Waypoint-following fixed-wing environment."""

    def __init__(self, sim: SimParams, fw: FwParams, config: FwEnvConfig | None = None):
        self.sim = sim
        self.fw = fw
        self.config = config or FwEnvConfig()
        self._barrier: BarrierFn | None = None
        self._done = True
        self.state: FwState | None = None
        self.waypoints: list[tuple[float, float, float]] = []

    # 4 scalars + next-waypoint vector + (count - 1) delta slots of 3 + flag
    @property
    def observation_size(self) -> int:
        return 7 + 4 * (self.config.waypoint_count - 1)

    def control_box(self) -> Box:
        return fw_control_box(self.fw)

    def safety_barrier(self) -> BarrierFn:
        if self._barrier is None:
            self._barrier = fwmod.flight_envelope_barrier(self.fw, self.sim)
        return self._barrier

    def prediction_stepper(self):
        def stepper(s: FwState, u) -> FwState:
            return fw_step(s, FwControl(*u), self.sim, self.fw)

        return stepper

    def reset(self, seed: int, stream: int = 0) -> tuple[FwState, np.ndarray]:
        rng = RngStream(seed, stream)
        cfg = self.config
        self.state = cfg.initial_state
        pos = (self.state.x, self.state.y, self.state.z)
        self.waypoints = []
        prev = pos
        for _ in range(cfg.waypoint_count):
            nxt = (
                prev[0] + cfg.waypoint_spacing,
                prev[1] + rng.uniform(-cfg.lateral_range, cfg.lateral_range),
                prev[2] + rng.uniform(-cfg.lateral_range, cfg.lateral_range),
            )
            self.waypoints.append(nxt)
            prev = nxt
        self._target = 0
        self._steps = 0
        self._steps_since_wp = 0
        self._done = False
        return self.state, self.observe()

    def current_target(self) -> tuple[float, float, float] | None:
        if self._target >= len(self.waypoints):
            return None
        return self.waypoints[self._target]

    def _distance_to_target(self, s: FwState) -> float:
        w = self.current_target()
        if w is None:
            return 0.0
        return math.dist(w, (s.x, s.y, s.z))

    def observe(self) -> np.ndarray:
        s = self.state
        fw, cfg = self.fw, self.config
        obs = [
            (s.v - fw.v_min) / (fw.v_min - fw.v_max),
            s.gamma / fw.pitch_max,
            math.sin(s.psi),
            math.cos(s.psi),
        ]
        w = self.current_target()
        if w is None:
            obs += [0.0, 0.0, 0.0]
        else:
            obs += [
                (w[0] - s.x) / cfg.obs_scale,
                (w[1] - s.y) / cfg.obs_scale,
                (w[2] - s.z) / cfg.obs_scale,
            ]
        for slot in range(cfg.waypoint_count - 1):
            l = self._target + slot
            if l + 1 < len(self.waypoints):
                a, b = self.waypoints[l], self.waypoints[l + 1]
                obs += [(b[k] - a[k]) / cfg.obs_scale for k in range(3)]
                obs.append(1.0)
            else:
                obs += [0.0, 0.0, 0.0, 0.0]
        return np.array(obs, dtype=float)

    def step(self, action) -> StepResult:
        if self._done:
            raise ProtocolError("step() called on a finished episode")
        cfg = self.config
        box = self.control_box()
        clamped_vals = box.clamp(action)
        clamped = tuple(action) != clamped_vals
        u = FwControl(*clamped_vals)

        d_prev = self._distance_to_target(self.state)
        s_next = fw_step(self.state, u, self.sim, self.fw)
        self.state = s_next
        self._steps += 1
        self._steps_since_wp += 1

        reward = 0.0
        if self.current_target() is not None:
            reward = cfg.reward_scale * (d_prev - self._distance_to_target(s_next))
        hit = 0
        while True:
            w = self.current_target()
            if w is None or s_next.x <= w[0]:
                break
            d_hit = math.dist(w, (s_next.x, s_next.y, s_next.z))
            reward += math.exp(-d_hit / cfg.bonus_decay)
            self._target += 1
            self._steps_since_wp = 0
            hit += 1

        cost = 0 if fwmod.in_envelope(s_next, self.fw, tol=VIOLATION_TOL) else 1

        done_reason = None
        if s_next.z <= 0.0:
            done_reason = "ground"
        elif s_next.v <= 0.0 or abs(s_next.gamma) >= math.pi / 2:
            done_reason = "dynamics-domain"
        elif self._target >= len(self.waypoints):
            done_reason = "waypoints-complete"
        elif self._steps_since_wp * self.sim.dt > cfg.waypoint_timeout + 1e-9:
            done_reason = "waypoint-timeout"
        elif self._steps >= cfg.max_steps:
            done_reason = "horizon"
        self._done = done_reason is not None

        return StepResult(
            observation=self.observe(),
            reward=reward,
            cost=cost,
            done=self._done,
            done_reason=done_reason,
            info={"state": s_next, "clamped": clamped, "waypoints_hit": hit},
        )


@dataclass
class _LeadPlan:
    target: float
    steps_left: int


class CarEnv:
    """Lane merging and cruise control environment."""

    def __init__(self, sim: SimParams, car: CarParams, config: CarEnvConfig | None = None):
        self.sim = sim
        self.car = car
        cfg = config or CarEnvConfig()
        if cfg.lead_speed_max is None:
            cfg = replace(cfg, lead_speed_max=car.speed_limit)
        if cfg.target_speed is None:
            cfg = replace(cfg, target_speed=car.speed_limit)
        self.config = cfg
        self._barrier: BarrierFn | None = None
        self._done = True
        self.state: CarJointState | None = None

    @property
    def observation_size(self) -> int:
        return 8

    def control_box(self) -> Box:
        return car_control_box(self.car)

    def safety_barrier(self) -> BarrierFn:
        if self._barrier is None:
            self._barrier = carmod.combined_barrier(self.car, self.sim)
        return self._barrier

    def prediction_stepper(self):
        return carmod.worst_case_joint_step(self.car, self.sim)

    def _lane_center(self, lane: int) -> float:
        return (lane - 0.5) * self.car.lane_width

    def _draw_lead(self, lane: int, ahead_of: float) -> CarState:
        cfg = self.config
        return CarState(
            x=ahead_of + self._rng.uniform(cfg.offset_min, cfg.offset_max),
            y=self._lane_center(lane),
            v=self._rng.uniform(cfg.lead_speed_min, cfg.lead_speed_max),
            psi=0.0,
        )

    def _draw_plan(self) -> _LeadPlan:
        cfg = self.config
        hold = self._rng.uniform(cfg.retarget_min, cfg.retarget_max)
        return _LeadPlan(
            target=self._rng.uniform(cfg.lead_speed_min, cfg.lead_speed_max),
            steps_left=int(round(hold / self.sim.dt)),
        )

    def reset(self, seed: int, stream: int = 0) -> tuple[CarJointState, np.ndarray]:
        self._rng = RngStream(seed, stream)
        cfg = self.config
        ego = CarState(
            x=0.0,
            y=self._lane_center(1),
            v=cfg.initial_speed_fraction * cfg.target_speed,
            psi=0.0,
        )
        h = self.safety_barrier()
        for _ in range(cfg.reset_draw_limit):
            joint = CarJointState(
                lead1=self._draw_lead(1, ego.x),
                lead2=self._draw_lead(2, ego.x),
                ego=ego,
            )
            if h.evaluate(joint) >= 0.0:
                break
        else:
            raise ConfigError(
                f"no safe initial lead placement found in {cfg.reset_draw_limit} draws"
            )
        self.state = joint
        self._plans = [self._draw_plan(), self._draw_plan()]
        self._steps = 0
        self._done = False
        return self.state, self.observe()

    def observe(self) -> np.ndarray:
        j = self.state
        cfg = self.config
        w = self.car.lane_width
        vt = cfg.target_speed
        return np.array(
            [
                (j.lead1.x - j.ego.x - 500.0) / 500.0,
                (j.lead2.x - j.ego.x - 500.0) / 500.0,
                (j.ego.y - w) / w,
                (j.lead1.v - vt) / vt,
                (j.lead2.v - vt) / vt,
                (j.ego.v - vt) / vt,
                math.sin(j.ego.psi),
                math.cos(j.ego.psi),
            ],
            dtype=float,
        )

    def _advance_lead(self, lead: CarState, plan: _LeadPlan) -> CarState:
        if plan.steps_left <= 0:
            fresh = self._draw_plan()
            plan.target, plan.steps_left = fresh.target, fresh.steps_left
        plan.steps_left -= 1
        accel = min(
            max((plan.target - lead.v) / self.sim.dt, self.car.lead_acc_min),
            self.car.lead_acc_max,
        )
        nxt = carmod.lead_step(lead, accel, self.sim)
        if nxt.v < 0.0:  # rounding dust only; leads never reverse
            nxt = CarState(nxt.x, nxt.y, 0.0, nxt.psi)
        return nxt

    def _respawn_if_passed(self, joint: CarJointState) -> tuple[CarJointState, bool]:
        respawned = False
        for which in (1, 2):
            lead = joint.lead1 if which == 1 else joint.lead2
            if joint.ego.x <= lead.x:
                continue
            respawned = True
            best, best_margin = None, -math.inf
            for _ in range(self.config.respawn_draw_limit):
                cand = self._draw_lead(which, joint.ego.x)
                trial = joint._replace(**{f"lead{which}": cand})
                margin = carmod.lead_gap_margin(trial, which, self.car, self.sim)
                if margin >= 0.0:
                    best = trial
                    break
                if margin > best_margin:
                    best, best_margin = trial, margin
            joint = best
        return joint, respawned

    def _occupies(self, ego: CarState, lane: int) -> bool:
        off = carmod.body_offset(ego, self.car)
        if lane == 1:
            return ego.y - off < self.car.lane_width
        return ego.y + off > self.car.lane_width

    def step(self, action) -> StepResult:
        if self._done:
            raise ProtocolError("step() called on a finished episode")
        cfg = self.config
        box = self.control_box()
        clamped_vals = box.clamp(action)
        clamped = tuple(action) != clamped_vals
        u = CarControl(*clamped_vals)

        joint = CarJointState(
            lead1=self._advance_lead(self.state.lead1, self._plans[0]),
            lead2=self._advance_lead(self.state.lead2, self._plans[1]),
            ego=carmod.car_step(self.state.ego, u, self.sim, self.car),
        )
        joint, respawned = self._respawn_if_passed(joint)
        carmod.check_lead_assumption(joint, self.car)
        self.state = joint
        self._steps += 1

        ego = joint.ego
        reward = 1.0 - abs(ego.v - cfg.target_speed) / cfg.target_speed
        cost = 1 if carmod.raw_safety_margin(joint, self.car) < -VIOLATION_TOL else 0

        done_reason = None
        off = carmod.body_offset(ego, self.car)
        collided = any(
            self._occupies(ego, lane)
            and (joint.lead1 if lane == 1 else joint.lead2).x - ego.x < self.car.min_gap
            for lane in (1, 2)
        )
        if collided:
            done_reason = "collision"
        elif ego.y - off < 0.0 or ego.y + off > 2.0 * self.car.lane_width:
            done_reason = "off-road"
        elif self._steps >= cfg.max_steps:
            done_reason = "horizon"
        self._done = done_reason is not None

        return StepResult(
            observation=self.observe(),
            reward=reward,
            cost=cost,
            done=self._done,
            done_reason=done_reason,
            info={"state": joint, "clamped": clamped, "respawned": respawned},
        )


class FilteredEnv:
    """Pass every action through a safety override before stepping.

    The filter predicts one step ahead with the environment's prediction
    stepper (worst-case lead braking for the car); the environment itself
    advances with the actual behaviors. The FilterDecision lands in
    StepResult.info["filter"].
    """

    def __init__(
        self,
        env,
        mode: str,
        segments: int = DEFAULT_SEGMENTS,
        candidates_fn: Callable | None = None,
    ):
        if mode not in ("single", "line", "candidates"):
            raise ConfigError(f"unknown filter mode {mode!r}")
        self.env = env
        self.mode = mode
        self.segments = segments
        self.candidates_fn = candidates_fn

    @property
    def sim(self):
        return self.env.sim

    @property
    def state(self):
        return self.env.state

    @property
    def observation_size(self) -> int:
        return self.env.observation_size

    def control_box(self) -> Box:
        return self.env.control_box()

    def safety_barrier(self) -> BarrierFn:
        return self.env.safety_barrier()

    def reset(self, seed: int, stream: int = 0):
        return self.env.reset(seed, stream)

    def decide(self, nominal):
        h = self.env.safety_barrier()
        f = self.env.prediction_stepper()
        box = self.env.control_box()
        decay = self.env.sim.decay
        s = self.env.state
        if self.mode == "single":
            return filter_single(h, f, s, nominal, decay, box)
        if self.mode == "line":
            return filter_line(h, f, s, nominal, decay, box, self.segments)
        candidates = self.candidates_fn(s, nominal) if self.candidates_fn else ()
        return filter_with_candidates(h, f, s, nominal, candidates, decay, box, self.segments)

    def step(self, action) -> StepResult:
        decision = self.decide(action)
        result = self.env.step(decision.applied)
        result.info["filter"] = decision
        return result


def wrap_with_filter(env, mode: str, segments: int = DEFAULT_SEGMENTS, candidates_fn=None):
    """Wrap an environment in a safety override; mode "none" is a no-op."""
    if mode in (None, "none"):
        return env
    return FilteredEnv(env, mode, segments=segments, candidates_fn=candidates_fn)
