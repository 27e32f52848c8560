"""Experiment configuration files.

INI-style text read with :mod:`configparser`::

    [env]
    lambda = 1
    duration = uniform          ; uniform | discrete | two_point
    duration_lo = 0
    duration_hi = 3
    reward = affine             ; affine | quadratic | table
    reward_a = 1
    reward_b = -0.5
    noise = uniform             ; none | uniform | gaussian
    noise_halfwidth = 1

    [algo.bandit]
    eta_scale = 0.1

    [sweep]
    T = 1000, 10000
    replicas = 50
    replicas_known = 500
    seed = 0
    algos = known, bandit, naive

Discrete laws use ``duration_points`` and ``duration_probs`` (comma lists);
``two_point`` uses ``eps``; a table reward lists ``reward_values`` aligned with
the support points. ``sigma``, ``C``, ``D`` and ``E`` may override the derived
bounds. Keys of an ``[algo.NAME]`` section are passed to that policy's
constructor; values are parsed as numbers, booleans or ``auto``.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from typing import Optional

from .env import (Affine, ConfigurationError, Discrete, EnvironmentSpec, GaussianNoise, NoNoise,
                  Quadratic, Table, Uniform, UniformNoise, two_point)
from .policies import ALGORITHMS

ENV_KEYS = {"lambda", "duration", "duration_lo", "duration_hi", "duration_points",
            "duration_probs", "eps", "reward", "reward_a", "reward_b", "reward_c",
            "reward_values", "noise", "noise_halfwidth", "noise_variance", "sigma", "c", "d", "e"}
# configparser lower-cases keys; restore the spelling of case-sensitive parameters
PARAM_NAMES = {"m": "M"}


@dataclass
class SweepConfig:
    T: list = field(default_factory=lambda: [1000.0])
    replicas: int = 50
    per_algo: dict = field(default_factory=dict)
    seed: int = 0
    algos: list = field(default_factory=lambda: ["naive"])
    workers: int = 1

    def replicas_for(self, algo: str) -> int:
        return self.per_algo.get(algo, self.replicas)


@dataclass
class ExperimentConfig:
    env: EnvironmentSpec
    algo_params: dict = field(default_factory=dict)
    sweep: SweepConfig = field(default_factory=SweepConfig)

    def params(self, algo: str) -> dict:
        return dict(self.algo_params.get(algo, {}))


def _number(section: str, key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigurationError(f"[{section}] {key}: expected a number, got {raw!r}") from None


def _numbers(section: str, key: str, raw: str) -> list:
    return [_number(section, key, p) for p in raw.split(",") if p.strip()]


def _value(section: str, key: str, raw: str):
    """Parse an algorithm parameter: bool, int, float or the literal ``auto``."""
    low = raw.strip().lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if low == "auto":
        return "auto"
    try:
        return int(low)
    except ValueError:
        return _number(section, key, raw)


class _Section:
    def __init__(self, name: str, data):
        self.name, self.data = name, data

    def get(self, key: str, default=None) -> Optional[str]:
        return self.data.get(key, default)

    def require(self, key: str) -> str:
        if key not in self.data:
            raise ConfigurationError(f"[{self.name}] missing key {key!r}")
        return self.data[key]

    def num(self, key: str, default=None) -> Optional[float]:
        raw = self.get(key)
        if raw is None:
            if default is None:
                self.require(key)
            return default
        return _number(self.name, key, raw)


def _build_env(sec: _Section) -> EnvironmentSpec:
    unknown = set(sec.data) - ENV_KEYS
    if unknown:
        raise ConfigurationError(f"[env] unknown key {sorted(unknown)[0]!r}")
    kind = sec.require("duration").strip().lower()
    if kind == "uniform":
        duration = Uniform(sec.num("duration_lo", 0.0), sec.num("duration_hi"))
    elif kind == "discrete":
        pts = _numbers("env", "duration_points", sec.require("duration_points"))
        probs = _numbers("env", "duration_probs", sec.require("duration_probs"))
        if len(pts) != len(probs):
            raise ConfigurationError("[env] duration_probs: length differs from duration_points")
        duration = Discrete(tuple(pts), tuple(probs))
    elif kind == "two_point":
        duration = two_point(sec.num("eps", 0.0))
    else:
        raise ConfigurationError(f"[env] duration: unknown law {kind!r}")

    rkind = sec.require("reward").strip().lower()
    if rkind == "affine":
        reward = Affine(sec.num("reward_a"), sec.num("reward_b", 0.0))
    elif rkind == "quadratic":
        reward = Quadratic(sec.num("reward_a"), sec.num("reward_b", 0.0), sec.num("reward_c", 0.0))
    elif rkind == "table":
        if not isinstance(duration, Discrete):
            raise ConfigurationError("[env] reward: a table needs a discrete duration law")
        vals = _numbers("env", "reward_values", sec.require("reward_values"))
        if len(vals) != len(duration.points):
            raise ConfigurationError("[env] reward_values: one value per support point expected")
        reward = Table(dict(zip(duration.points, vals)))
    else:
        raise ConfigurationError(f"[env] reward: unknown reward {rkind!r}")

    nkind = sec.get("noise", "none").strip().lower()
    if nkind == "none":
        noise = NoNoise()
    elif nkind == "uniform":
        noise = UniformNoise(sec.num("noise_halfwidth"))
    elif nkind == "gaussian":
        noise = GaussianNoise(sec.num("noise_variance"))
    else:
        raise ConfigurationError(f"[env] noise: unknown model {nkind!r}")

    over = {}
    for key, name in (("sigma", "sigma"), ("c", "C"), ("d", "D"), ("e", "E")):
        if key in sec.data:
            over[name] = sec.num(key)
    return EnvironmentSpec(lam=sec.num("lambda", 1.0), duration=duration, reward=reward,
                           noise=noise, **over)


def _build_sweep(sec: _Section) -> SweepConfig:
    sw = SweepConfig()
    for key, raw in sec.data.items():
        if key == "t":
            sw.T = _numbers("sweep", "T", raw)
            if not sw.T or min(sw.T) <= 0:
                raise ConfigurationError("[sweep] T: need positive horizons")
        elif key == "replicas":
            sw.replicas = int(_number("sweep", key, raw))
        elif key.startswith("replicas_"):
            sw.per_algo[key[len("replicas_"):]] = int(_number("sweep", key, raw))
        elif key == "seed":
            sw.seed = int(_number("sweep", key, raw))
        elif key == "workers":
            sw.workers = max(1, int(_number("sweep", key, raw)))
        elif key == "algos":
            sw.algos = [a.strip() for a in raw.split(",") if a.strip()]
            bad = [a for a in sw.algos if a not in ALGORITHMS]
            if bad:
                raise ConfigurationError(f"[sweep] algos: unknown algorithm {bad[0]!r}")
        else:
            raise ConfigurationError(f"[sweep] unknown key {key!r}")
    return sw


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config: {exc}") from None
    if not cp.has_section("env"):
        raise ConfigurationError("missing section [env]")
    env = _build_env(_Section("env", dict(cp["env"])))
    params = {}
    for name in cp.sections():
        if name.startswith("algo."):
            algo = name[len("algo."):]
            if algo not in ALGORITHMS:
                raise ConfigurationError(f"[{name}] unknown algorithm {algo!r}")
            params[algo] = {PARAM_NAMES.get(k, k): _value(name, k, v) for k, v in cp[name].items()}
        elif name not in ("env", "sweep"):
            raise ConfigurationError(f"unknown section [{name}]")
    sweep = _build_sweep(_Section("sweep", dict(cp["sweep"]))) if cp.has_section("sweep") \
        else SweepConfig()
    return ExperimentConfig(env, params, sweep)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())
