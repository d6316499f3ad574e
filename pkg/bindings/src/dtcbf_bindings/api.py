"""Binding layer: environment construction, the reset/step protocol, and a
parity checker against a direct run of the core environments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dtcbf.envs import CarEnv, FwEnv, wrap_with_filter
from dtcbf.errors import ConfigError
from dtcbf.params import default_params, load_params
from dtcbf.rng import RngStream

ENV_NAMES = ("fw", "car")
FILTER_MODES = ("none", "single", "line", "candidates")


class BoundEnv:
    """One underlying environment instance behind the episodic protocol.

    reset(...) -> observation (np.ndarray)
    step(action) -> (observation, reward, cost, done, info)

    Costs ride as a separate tuple slot, not inside info, matching
    constrained-RL conventions. Actions outside the actuator box are
    clamped by the core environment; info["clamped"] flags it. Stepping a
    finished episode raises dtcbf.errors.ProtocolError.
    """

    def __init__(self, env, env_name: str, filter_mode: str, seed: int):
        self._env = env
        self.env_name = env_name
        self.filter_mode = filter_mode
        self.seed = seed
        self._episode = 0
        box = env.control_box()
        self.observation_size: int = env.observation_size
        self.action_low = np.array(box.lo, dtype=float)
        self.action_high = np.array(box.hi, dtype=float)
        self.action_size: int = len(box.lo)

    def reset(self, seed: int | None = None, stream: int | None = None) -> np.ndarray:
        """Start an episode; with no arguments, episodes use successive
        streams under the construction seed."""
        if seed is None:
            seed = self.seed
        if stream is None:
            stream = 2 * self._episode
        self._episode += 1
        _state, obs = self._env.reset(seed, stream)
        return obs

    def step(self, action):
        result = self._env.step(tuple(float(a) for a in np.asarray(action).ravel()))
        info = dict(result.info)
        info["done_reason"] = result.done_reason
        return result.observation, result.reward, result.cost, result.done, info

    @property
    def state(self):
        return self._env.state


def make(
    env_name: str,
    filter_mode: str = "single",
    config_path=None,
    seed: int = 0,
    segments: int = 32,
    candidates_fn=None,
) -> BoundEnv:
    """Construct a bound (optionally shielded) environment.

    candidates_fn, when given with filter_mode="candidates", supplies
    externally generated override candidates (e.g. from a learned override
    network) as a (state, nominal) -> sequence-of-controls callable.
    """
    if env_name not in ENV_NAMES:
        raise ConfigError(f"unknown environment {env_name!r}; choose from {ENV_NAMES}")
    if filter_mode not in FILTER_MODES:
        raise ConfigError(f"unknown filter mode {filter_mode!r}; choose from {FILTER_MODES}")
    sim, fw, car = load_params(config_path) if config_path else default_params()
    env = FwEnv(sim, fw) if env_name == "fw" else CarEnv(sim, car)
    wrapped = wrap_with_filter(env, filter_mode, segments=segments, candidates_fn=candidates_fn)
    return BoundEnv(wrapped, env_name, filter_mode, seed)


@dataclass
class ParityReport:
    env_name: str
    seed: int
    steps: int
    max_divergence: float
    first_divergent_step: int | None

    @property
    def passed(self) -> bool:
        return self.first_divergent_step is None


def parity_check(
    env_name: str,
    seed: int,
    n_steps: int,
    filter_mode: str = "single",
    tol: float = 1e-12,
    config_path=None,
) -> ParityReport:
    """Replay one action sequence through the binding and through a direct
    core-environment run; report the first step whose observation, reward,
    or cost diverges beyond tol."""
    sim, fw, car = load_params(config_path) if config_path else default_params()
    native = wrap_with_filter(
        FwEnv(sim, fw) if env_name == "fw" else CarEnv(sim, car), filter_mode
    )
    bound = make(env_name, filter_mode, config_path=config_path, seed=seed)

    actions = RngStream(seed, 999)
    box_lo, box_hi = bound.action_low, bound.action_high

    obs_b = bound.reset(seed, 0)
    _, obs_n = native.reset(seed, 0)
    max_div = float(np.max(np.abs(obs_b - obs_n)))
    first_bad = 0 if max_div > tol else None
    episode_stream = 0
    for k in range(n_steps):
        action = np.array([actions.uniform(lo, hi) for lo, hi in zip(box_lo, box_hi)])
        obs_b, reward_b, cost_b, done_b, _ = bound.step(action)
        res = native.step(tuple(float(a) for a in action))
        div = float(np.max(np.abs(obs_b - res.observation)))
        div = max(div, abs(reward_b - res.reward), abs(cost_b - res.cost))
        if done_b != res.done:
            div = max(div, 1.0)
        max_div = max(max_div, div)
        if div > tol and first_bad is None:
            first_bad = k
        if res.done:
            episode_stream += 2
            obs_b = bound.reset(seed, episode_stream)
            _, obs_n = native.reset(seed, episode_stream)
            div = float(np.max(np.abs(obs_b - obs_n)))
            max_div = max(max_div, div)
            if div > tol and first_bad is None:
                first_bad = k
    return ParityReport(
        env_name=env_name,
        seed=seed,
        steps=n_steps,
        max_divergence=max_div,
        first_divergent_step=first_bad,
    )
