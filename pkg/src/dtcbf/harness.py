"""Episode runner, metric aggregation, and CSV output.

Episodes use independent random streams derived from one base seed (stream
2i for the environment of episode i, stream 2i+1 for its policy), so runs
are reproducible and episodes could execute concurrently; aggregation is an
order-independent reduction over per-episode records.

CSV schemas are versioned through the literal header strings below; a
golden test pins them. Floats are written with repr (shortest round-trip
form), which makes reruns byte-identical.
"""

from __future__ import annotations

import csv
import statistics
from dataclasses import dataclass
from pathlib import Path

from .envs import CarEnv, FwEnv, StepResult, wrap_with_filter
from .errors import ConfigError
from .filters import MODE_NOMINAL
from .params import CarParams, FwParams, SimParams, default_params, load_params
from .policies import builtin_policy
from .rng import RngStream

SCHEMA_VERSION = 1

STEPS_HEADER_FW = (
    "episode,t,v,gamma,psi,x,y,z,"
    "nominal_thrust,nominal_load,nominal_bank,"
    "applied_thrust,applied_load,applied_bank,"
    "reward,cost,mode,override_distance,line_fraction"
)
STEPS_HEADER_CAR = (
    "episode,t,ego_x,ego_y,ego_v,ego_psi,lead1_x,lead1_v,lead2_x,lead2_v,"
    "nominal_accel,nominal_steer,applied_accel,applied_steer,"
    "reward,cost,mode,override_distance,line_fraction"
)
SUMMARY_HEADER = (
    "schema,episode,seed,stream,steps,total_reward,total_cost,unsafe,"
    "done_reason,overrides,mean_override_distance,nominal_pass_pct"
)


@dataclass
class StepRow:
    t: int
    state: tuple
    nominal: tuple
    applied: tuple
    reward: float
    cost: int
    mode: str
    override_distance: float
    line_fraction: float


@dataclass
class EpisodeRecord:
    episode: int
    seed: int
    stream: int
    rows: list[StepRow]
    total_reward: float
    total_cost: int
    done_reason: str | None

    @property
    def unsafe(self) -> bool:
        # An episode is unsafe iff any of its states is unsafe.
        return self.total_cost > 0

    @property
    def steps(self) -> int:
        return len(self.rows)


@dataclass
class RunSummary:
    env: str
    policy: str
    filter_mode: str
    episodes: int
    mean_reward: float
    mean_cost: float
    unsafe_episodes: int
    mean_override_distance: float
    action_std: float
    nominal_pass_pct: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def make_env(env_name: str, sim: SimParams, fw: FwParams, car: CarParams):
    if env_name == "fw":
        return FwEnv(sim, fw)
    if env_name == "car":
        return CarEnv(sim, car)
    raise ConfigError(f"unknown environment {env_name!r}; choose fw or car")


def _flat_state(env_name: str, state) -> tuple:
    if env_name == "fw":
        return tuple(state)
    j = state
    return (j.ego.x, j.ego.y, j.ego.v, j.ego.psi, j.lead1.x, j.lead1.v, j.lead2.x, j.lead2.v)


def run_episode(env, policy, env_name: str, episode: int, seed: int, stream: int) -> EpisodeRecord:
    state, _obs = env.reset(seed, stream)
    rows: list[StepRow] = []
    total_reward = 0.0
    total_cost = 0
    done_reason = None
    t = 0
    while True:
        nominal = policy(env.state)
        result: StepResult = env.step(nominal)
        decision = result.info.get("filter")
        if decision is not None:
            applied = tuple(decision.applied)
            mode = decision.mode
            dist = decision.override_distance
            frac = decision.line_fraction
        else:
            applied = tuple(env.control_box().clamp(nominal))
            mode = "none"
            dist = 0.0
            frac = 0.0
        rows.append(
            StepRow(
                t=t,
                state=_flat_state(env_name, result.info["state"]),
                nominal=tuple(nominal),
                applied=applied,
                reward=result.reward,
                cost=result.cost,
                mode=mode,
                override_distance=dist,
                line_fraction=frac,
            )
        )
        total_reward += result.reward
        total_cost += result.cost
        t += 1
        if result.done:
            done_reason = result.done_reason
            break
    return EpisodeRecord(
        episode=episode,
        seed=seed,
        stream=stream,
        rows=rows,
        total_reward=total_reward,
        total_cost=total_cost,
        done_reason=done_reason,
    )


def summarize(env_name: str, policy: str, filter_mode: str, records: list[EpisodeRecord]) -> RunSummary:
    rows = [row for rec in records for row in rec.rows]
    override_rows = [r for r in rows if r.mode not in ("none", MODE_NOMINAL)]
    mean_override = (
        sum(r.override_distance for r in override_rows) / len(override_rows)
        if override_rows
        else 0.0
    )
    passes = sum(1 for r in rows if r.mode == MODE_NOMINAL)
    filtered_rows = sum(1 for r in rows if r.mode != "none")
    pass_pct = 100.0 * passes / filtered_rows if filtered_rows else 0.0
    dims = len(rows[0].applied) if rows else 0
    stds = [
        statistics.pstdev([r.applied[d] for r in rows]) if len(rows) > 1 else 0.0
        for d in range(dims)
    ]
    return RunSummary(
        env=env_name,
        policy=policy,
        filter_mode=filter_mode,
        episodes=len(records),
        mean_reward=sum(rec.total_reward for rec in records) / len(records),
        mean_cost=sum(rec.total_cost for rec in records) / len(records),
        unsafe_episodes=sum(1 for rec in records if rec.unsafe),
        mean_override_distance=mean_override,
        action_std=sum(stds) / dims if dims else 0.0,
        nominal_pass_pct=pass_pct,
    )


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csvs(out_dir, env_name: str, records: list[EpisodeRecord]) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    steps_path = out / "steps.csv"
    summary_path = out / "summary.csv"
    header = STEPS_HEADER_FW if env_name == "fw" else STEPS_HEADER_CAR

    with open(steps_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header.split(","))
        for rec in records:
            for row in rec.rows:
                writer.writerow(
                    [rec.episode, row.t]
                    + [_fmt(x) for x in row.state]
                    + [_fmt(x) for x in row.nominal]
                    + [_fmt(x) for x in row.applied]
                    + [_fmt(row.reward), row.cost, row.mode, _fmt(row.override_distance), _fmt(row.line_fraction)]
                )

    with open(summary_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_HEADER.split(","))
        for rec in records:
            override_rows = [r for r in rec.rows if r.mode not in ("none", MODE_NOMINAL)]
            mean_dist = (
                sum(r.override_distance for r in override_rows) / len(override_rows)
                if override_rows
                else 0.0
            )
            filtered = sum(1 for r in rec.rows if r.mode != "none")
            passes = sum(1 for r in rec.rows if r.mode == MODE_NOMINAL)
            writer.writerow(
                [
                    SCHEMA_VERSION,
                    rec.episode,
                    rec.seed,
                    rec.stream,
                    rec.steps,
                    _fmt(rec.total_reward),
                    rec.total_cost,
                    int(rec.unsafe),
                    rec.done_reason or "",
                    len(override_rows),
                    _fmt(mean_dist),
                    _fmt(100.0 * passes / filtered if filtered else 0.0),
                ]
            )
    return steps_path, summary_path


def run(
    env_name: str,
    policy_name: str,
    filter_mode: str,
    episodes: int,
    seed: int,
    out_dir=None,
    config_path=None,
    segments: int = 32,
) -> RunSummary:
    """Run seeded episodes, optionally writing steps.csv and summary.csv."""
    if episodes < 1:
        raise ConfigError(f"episodes must be >= 1, got {episodes}")
    sim, fw, car = load_params(config_path) if config_path else default_params()
    env = wrap_with_filter(make_env(env_name, sim, fw, car), filter_mode, segments=segments)
    records = []
    for i in range(episodes):
        policy = builtin_policy(policy_name, env, RngStream(seed, 2 * i + 1))
        records.append(run_episode(env, policy, env_name, episode=i, seed=seed, stream=2 * i))
    summary = summarize(env_name, policy_name, filter_mode, records)
    if out_dir is not None:
        write_csvs(out_dir, env_name, records)
    return summary
