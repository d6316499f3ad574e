import pytest

from dtcbf.car import body_offset, check_lead_assumption, raw_safety_margin
from dtcbf.dynamics import CarControl, FwControl
from dtcbf.envs import CarEnv, CarEnvConfig, FwEnv, FwEnvConfig, wrap_with_filter
from dtcbf.errors import ConfigError, ProtocolError
from dtcbf.fixedwing import in_envelope
from dtcbf.params import default_params
from dtcbf.policies import builtin_policy
from dtcbf.rng import RngStream

SIM, FW, CAR = default_params()


def make_fw():
    return FwEnv(SIM, FW)


def make_car():
    return CarEnv(SIM, CAR)


class TestFwReset:
    def test_same_seed_same_waypoints(self):
        a, b = make_fw(), make_fw()
        a.reset(123)
        b.reset(123)
        assert a.waypoints == b.waypoints

    def test_different_seeds_differ(self):
        env = make_fw()
        env.reset(123)
        first = list(env.waypoints)
        env.reset(124)
        assert env.waypoints != first

    def test_waypoints_chained_100m_apart(self):
        env = make_fw()
        env.reset(5)
        xs = [w[0] for w in env.waypoints]
        assert xs == [100.0, 200.0, 300.0, 400.0, 500.0]
        prev = (0.0, 0.0, 500.0)
        for w in env.waypoints:
            assert abs(w[1] - prev[1]) <= 25.0
            assert abs(w[2] - prev[2]) <= 25.0
            prev = w

    def test_initial_observation_components(self):
        env = make_fw()
        _, obs = env.reset(7)
        assert obs[0] == pytest.approx((17.5 - FW.v_min) / (FW.v_min - FW.v_max), abs=0)
        assert obs[1] == 0.0  # level pitch
        assert obs[2] == 0.0  # sin psi
        assert obs[3] == 1.0  # cos psi
        assert len(obs) == env.observation_size == 23

    def test_observation_length_constant_as_waypoints_deplete(self):
        env = make_fw()
        env.reset(7)
        lengths = {len(env.observe())}
        env._target = 4
        lengths.add(len(env.observe()))
        env._target = 5
        lengths.add(len(env.observe()))
        assert lengths == {env.observation_size}

    def test_valid_flags_zero_fill(self):
        env = make_fw()
        env.reset(7)
        obs = env.observe()
        flags = obs[10::4]
        assert list(flags) == [1.0, 1.0, 1.0, 1.0]
        env._target = 3  # two waypoints left: one delta slot remains
        obs = env.observe()
        assert list(obs[10::4]) == [1.0, 0.0, 0.0, 0.0]
        assert not obs[11:].any()


class TestFwStepRewards:
    def test_distance_shrink_scales_reward(self):
        env = make_fw()
        env.reset(7)
        d0 = env._distance_to_target(env.state)
        res = env.step(FwControl(10.0, 1.0, 0.0))
        d1 = env._distance_to_target(env.state)
        if not res.info["waypoints_hit"]:
            assert res.reward == pytest.approx(0.01 * (d0 - d1), abs=1e-12)

    def test_waypoint_bonus_at_zero_distance_is_one(self):
        env = make_fw()
        env.reset(7)
        # Steer the state to sit just before the first waypoint plane.
        w = env.waypoints[0]
        env.state = env.state._replace(x=w[0] - 0.5, y=w[1], z=w[2])
        d0 = env._distance_to_target(env.state)
        res = env.step(FwControl(10.0, 1.0, 0.0))
        # Crossing bonus exp(-d/25) with d near zero, plus the approach term.
        assert res.info["waypoints_hit"] == 1
        assert res.reward > 0.9

    def test_cost_flags_envelope_violation(self):
        env = make_fw()
        env.reset(7)
        env.state = env.state._replace(v=FW.v_max - 1e-4)
        res = env.step(FwControl(FW.thrust_max, 1.0, 0.0))
        assert res.cost == 1
        assert not in_envelope(res.info["state"], FW, tol=1e-6)

    def test_cost_zero_within_tolerance(self):
        env = make_fw()
        env.reset(7)
        res = env.step(FwControl(10.0, 1.0, 0.0))
        assert res.cost == 0


class TestFwTermination:
    def test_horizon(self):
        env = FwEnv(SIM, FW, FwEnvConfig(max_steps=3, waypoint_timeout=1e9))
        env.reset(7)
        for _ in range(2):
            assert not env.step(FwControl(10, 1, 0)).done
        res = env.step(FwControl(10, 1, 0))
        assert res.done and res.done_reason == "horizon"

    def test_waypoint_timeout(self):
        env = FwEnv(SIM, FW, FwEnvConfig(waypoint_timeout=0.5))
        env.reset(7)
        done_reason = None
        for _ in range(10):
            res = env.step(FwControl(10, 1, 0))
            if res.done:
                done_reason = res.done_reason
                break
        assert done_reason == "waypoint-timeout"

    def test_last_waypoint_completes(self):
        env = make_fw()
        env.reset(7)
        env._target = 4
        w = env.waypoints[4]
        env.state = env.state._replace(x=w[0] - 0.5, y=w[1], z=w[2])
        res = env.step(FwControl(10.0, 1.0, 0.0))
        assert res.done and res.done_reason == "waypoints-complete"

    def test_ground_hit(self):
        env = make_fw()
        env.reset(7)
        env.state = env.state._replace(z=0.2, gamma=-0.17)
        res = env.step(FwControl(0.0, 1.0, 0.0))
        assert res.done and res.done_reason == "ground"

    def test_step_after_done_raises(self):
        env = FwEnv(SIM, FW, FwEnvConfig(max_steps=1))
        env.reset(7)
        env.step(FwControl(10, 1, 0))
        with pytest.raises(ProtocolError):
            env.step(FwControl(10, 1, 0))


class TestCarReset:
    def test_initial_state_layout(self):
        env = make_car()
        state, obs = env.reset(11)
        assert state.ego.y == 0.5 * CAR.lane_width
        assert state.ego.v == pytest.approx(0.95 * CAR.speed_limit, abs=1e-12)
        assert state.ego.psi == 0.0
        for lead in (state.lead1, state.lead2):
            assert 100.0 <= lead.x <= 500.0
            assert 0.0 <= lead.v <= CAR.speed_limit

    def test_rejection_yields_safe_start(self):
        env = make_car()
        for seed in range(20):
            state, _ = env.reset(seed)
            assert env.safety_barrier().evaluate(state) >= 0

    def test_observation_formula(self):
        env = make_car()
        state, obs = env.reset(11)
        vt = env.config.target_speed
        assert obs[0] == pytest.approx((state.lead1.x - state.ego.x - 500) / 500, abs=1e-12)
        assert obs[3] == pytest.approx((state.lead1.v - vt) / vt, abs=1e-12)
        assert obs[5] == pytest.approx((state.ego.v - vt) / vt, abs=1e-12)
        assert obs[6] == 0.0 and obs[7] == 1.0
        assert len(obs) == 8

    def test_same_seed_reproduces_lead_schedule(self):
        a, b = make_car(), make_car()
        a.reset(21)
        b.reset(21)
        for _ in range(50):
            ra = a.step(CarControl(0.5, 0.0))
            rb = b.step(CarControl(0.5, 0.0))
            assert ra.observation.tolist() == rb.observation.tolist()
            assert ra.reward == rb.reward


class TestCarStep:
    def test_reward_peaks_at_target_speed(self):
        env = make_car()
        env.reset(11)
        env.state = env.state._replace(
            ego=env.state.ego._replace(v=env.config.target_speed)
        )
        res = env.step(CarControl(0.0, 0.0))
        assert res.reward == pytest.approx(1.0, abs=1e-3)

    def test_leads_satisfy_assumption_every_step(self):
        env = make_car()
        env.reset(13)
        rng = RngStream(99)
        for _ in range(300):
            res = env.step(CarControl(rng.uniform(-2.8, 2.8), rng.uniform(-0.017, 0.017)))
            check_lead_assumption(res.info["state"], CAR)
            if res.done:
                break

    def test_passing_respawns_lead_ahead(self):
        env = make_car()
        env.reset(17)
        env.state = env.state._replace(
            lead1=env.state.lead1._replace(x=env.state.ego.x + 0.5, v=0.0)
        )
        # Ego is moving ~29.7 m/s: next step passes the stopped lead.
        res = env.step(CarControl(0.0, 0.0))
        assert res.info["respawned"]
        assert res.info["state"].lead1.x > res.info["state"].ego.x + 50.0

    def test_cost_matches_raw_margin_recheck(self):
        env = wrap_with_filter(make_car(), "single")
        env.reset(19)
        policy = builtin_policy("random", env, RngStream(19, 1))
        for _ in range(200):
            res = env.step(policy(env.state))
            margin = raw_safety_margin(res.info["state"], CAR)
            assert res.cost == (1 if margin < -1e-6 else 0)
            if res.done:
                break

    def test_speeding_costs(self):
        env = make_car()
        env.reset(23)
        env.state = env.state._replace(
            ego=env.state.ego._replace(v=CAR.speed_limit - 0.01)
        )
        res = env.step(CarControl(CAR.lead_acc_max, 0.0))
        assert res.cost == 1
        assert not res.done  # speeding does not end the episode

    def test_off_road_terminates_with_final_cost(self):
        env = make_car()
        env.reset(29)
        off = body_offset(env.state.ego, CAR)
        env.state = env.state._replace(
            ego=env.state.ego._replace(y=off - 0.005, psi=-0.02)
        )
        res = env.step(CarControl(0.0, -CAR.steer_max))
        assert res.done and res.done_reason == "off-road"
        assert res.cost == 1

    def test_collision_terminates(self):
        env = make_car()
        env.reset(31)
        env.state = env.state._replace(
            lead1=env.state.lead1._replace(x=env.state.ego.x + CAR.min_gap + 1.0, v=0.0)
        )
        res = env.step(CarControl(CAR.lead_acc_max, 0.0))
        assert res.done and res.done_reason == "collision"

    def test_step_after_done_raises(self):
        env = CarEnv(SIM, CAR, CarEnvConfig(max_steps=1))
        env.reset(7)
        env.step(CarControl(0, 0))
        with pytest.raises(ProtocolError):
            env.step(CarControl(0, 0))


class TestFilteredEnv:
    def test_mode_none_returns_env_unwrapped(self):
        env = make_fw()
        assert wrap_with_filter(env, "none") is env
        res_env = wrap_with_filter(env, None)
        assert res_env is env

    def test_unknown_mode_rejected(self):
        with pytest.raises(ConfigError):
            wrap_with_filter(make_fw(), "bisect")

    def test_unfiltered_step_has_no_decision(self):
        env = make_fw()
        env.reset(7)
        res = env.step(FwControl(10, 1, 0))
        assert "filter" not in res.info

    def test_filtered_step_records_decision(self):
        env = wrap_with_filter(make_fw(), "single")
        env.reset(7)
        res = env.step(FwControl(10.0, 1.0, 0.0))
        dec = res.info["filter"]
        assert dec.mode in ("nominal-passed", "single")
        assert dec.override_distance >= 0.0

    def test_shielded_random_episodes_cost_zero(self):
        for mode in ("single", "line", "candidates"):
            env = wrap_with_filter(make_fw(), mode)
            total = 0
            for i in range(3):
                env.reset(101, 2 * i)
                policy = builtin_policy("random", env, RngStream(101, 2 * i + 1))
                while True:
                    res = env.step(policy(env.state))
                    total += res.cost
                    if res.done:
                        break
            assert total == 0

    def test_candidates_mode_accepts_generator(self):
        calls = []

        def gen(state, nominal):
            calls.append(1)
            return [CarControl(0.0, 0.0)]

        env = wrap_with_filter(make_car(), "candidates", candidates_fn=gen)
        env.reset(7)
        policy = builtin_policy("random", env, RngStream(7, 1))
        for _ in range(30):
            res = env.step(policy(env.state))
            if res.done:
                break
        assert not calls or isinstance(res.info["filter"].mode, str)
