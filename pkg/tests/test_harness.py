import csv
import json
import subprocess
import sys

import pytest

from dtcbf.cli import main
from dtcbf.envs import CarEnv, FwEnv
from dtcbf.harness import STEPS_HEADER_CAR, STEPS_HEADER_FW, SUMMARY_HEADER, run
from dtcbf.params import default_params
from dtcbf.policies import builtin_policy
from dtcbf.rng import RngStream

SIM, FW, CAR = default_params()


class TestCsvSchema:
    def test_headers_pinned(self):
        # Schema v1; breaking these strings is a format change.
        assert STEPS_HEADER_FW == (
            "episode,t,v,gamma,psi,x,y,z,"
            "nominal_thrust,nominal_load,nominal_bank,"
            "applied_thrust,applied_load,applied_bank,"
            "reward,cost,mode,override_distance,line_fraction"
        )
        assert STEPS_HEADER_CAR == (
            "episode,t,ego_x,ego_y,ego_v,ego_psi,lead1_x,lead1_v,lead2_x,lead2_v,"
            "nominal_accel,nominal_steer,applied_accel,applied_steer,"
            "reward,cost,mode,override_distance,line_fraction"
        )
        assert SUMMARY_HEADER == (
            "schema,episode,seed,stream,steps,total_reward,total_cost,unsafe,"
            "done_reason,overrides,mean_override_distance,nominal_pass_pct"
        )

    def test_written_files_carry_headers(self, tmp_path):
        run("fw", "random", "single", episodes=2, seed=4, out_dir=tmp_path)
        steps = (tmp_path / "steps.csv").read_text().splitlines()
        summary = (tmp_path / "summary.csv").read_text().splitlines()
        assert steps[0] == STEPS_HEADER_FW
        assert summary[0] == SUMMARY_HEADER

    def test_summary_matches_recomputation_from_steps(self, tmp_path):
        s = run("car", "random", "line", episodes=3, seed=5, out_dir=tmp_path)
        with open(tmp_path / "steps.csv") as fh:
            rows = list(csv.DictReader(fh))
        by_episode = {}
        for row in rows:
            by_episode.setdefault(row["episode"], []).append(row)
        assert len(by_episode) == 3
        total_reward = sum(float(r["reward"]) for r in rows)
        assert s.mean_reward == pytest.approx(total_reward / 3, rel=1e-12)
        total_cost = sum(int(r["cost"]) for r in rows)
        assert s.mean_cost == pytest.approx(total_cost / 3, abs=0)
        passes = sum(1 for r in rows if r["mode"] == "nominal-passed")
        assert s.nominal_pass_pct == pytest.approx(100.0 * passes / len(rows), rel=1e-12)
        override_rows = [r for r in rows if r["mode"] not in ("none", "nominal-passed")]
        if override_rows:
            mean_dist = sum(float(r["override_distance"]) for r in override_rows) / len(
                override_rows
            )
            assert s.mean_override_distance == pytest.approx(mean_dist, rel=1e-12)
        # Per-dimension applied-action std, averaged over dimensions.
        import statistics

        stds = [
            statistics.pstdev([float(r["applied_accel"]) for r in rows]),
            statistics.pstdev([float(r["applied_steer"]) for r in rows]),
        ]
        assert s.action_std == pytest.approx(sum(stds) / 2, rel=1e-9)

    def test_reruns_are_byte_identical(self, tmp_path):
        run("fw", "random", "line", episodes=2, seed=9, out_dir=tmp_path / "a")
        run("fw", "random", "line", episodes=2, seed=9, out_dir=tmp_path / "b")
        assert (tmp_path / "a/steps.csv").read_bytes() == (tmp_path / "b/steps.csv").read_bytes()
        assert (
            tmp_path / "a/summary.csv"
        ).read_bytes() == (tmp_path / "b/summary.csv").read_bytes()


class TestRun:
    def test_shielded_car_run_is_clean(self, tmp_path):
        s = run("car", "random", "single", episodes=3, seed=7, out_dir=tmp_path)
        assert s.mean_cost == 0.0
        assert s.unsafe_episodes == 0
        with open(tmp_path / "summary.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert all(r["total_cost"] == "0" for r in rows)

    def test_unshielded_fw_run_accumulates_cost(self):
        s = run("fw", "random", "none", episodes=3, seed=7)
        assert s.mean_cost > 0
        assert s.unsafe_episodes == 3

    def test_unknown_names_rejected(self):
        from dtcbf.errors import ConfigError

        with pytest.raises(ConfigError):
            run("boat", "random", "none", episodes=1, seed=0)
        with pytest.raises(ConfigError):
            run("fw", "clever", "none", episodes=1, seed=0)

    def test_config_file_passthrough(self, tmp_path):
        cfg = tmp_path / "p.cfg"
        cfg.write_text("fw_v_max = 25\n")
        s = run("fw", "constant", "none", episodes=1, seed=0, config_path=cfg)
        assert s.episodes == 1


class TestPolicies:
    def test_random_policy_stays_in_box(self):
        env = FwEnv(SIM, FW)
        env.reset(3)
        policy = builtin_policy("random", env, RngStream(3, 1))
        box = env.control_box()
        for _ in range(200):
            assert box.contains(policy(env.state))

    def test_greedy_speed_zero_accel_at_target(self):
        env = CarEnv(SIM, CAR)
        env.reset(3)
        policy = builtin_policy("greedy-speed", env, RngStream(3, 1))
        state = env.state._replace(ego=env.state.ego._replace(v=env.config.target_speed))
        u = policy(state)
        assert u.accel == 0.0

    def test_greedy_waypoint_zero_bank_on_axis(self):
        env = FwEnv(SIM, FW)
        env.reset(3)
        env.waypoints[0] = (100.0, 0.0, 500.0)  # straight ahead
        policy = builtin_policy("greedy-waypoint", env, RngStream(3, 1))
        u = policy(env.state)
        assert u.bank == 0.0

    def test_unknown_policy_rejected(self):
        from dtcbf.errors import ConfigError

        env = FwEnv(SIM, FW)
        with pytest.raises(ConfigError):
            builtin_policy("ppo", env, RngStream(0))


class TestCli:
    def test_run_exit_zero(self, tmp_path, capsys):
        code = main(
            [
                "run",
                "--env",
                "fw",
                "--policy",
                "random",
                "--filter",
                "single",
                "--episodes",
                "1",
                "--seed",
                "3",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert out["episodes"] == 1
        assert (tmp_path / "steps.csv").exists()

    def test_verify_pass_and_report(self, capsys):
        code = main(["verify", "composition", "--samples", "500"])
        out = json.loads(capsys.readouterr().out)
        assert code == 0
        assert out["passed"] is True
        assert out["checks"] > 0

    def test_params_check_default_ok(self, capsys):
        assert main(["params-check"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["passed"] is True

    def test_params_check_bad_file(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("fw_thrust_max = 1.0\n")  # hypotheses cannot hold
        assert main(["params-check", "--config", str(cfg)]) == 1
        out = json.loads(capsys.readouterr().out)
        assert out["passed"] is False

    def test_usage_error_exit_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["run", "--env", "submarine", "--policy", "random"])
        assert exc.value.code == 2

    def test_console_script_runs(self):
        proc = subprocess.run(
            [sys.executable, "-m", "dtcbf.cli", "params-check"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
