"""Reference policies and construction of every policy by name.

Policies share a two-call protocol driven by the simulator:
``decide(x) -> bool`` when a task of duration ``x`` is proposed, then
``update(x, y)`` with the observed reward ``y`` (``None`` if rejected).
Stationary policies additionally expose ``accept_mask`` so the simulator can
process whole blocks of proposals at once.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .bandit import BanditPolicy, FiniteSupportPolicy
from .env import ConfigurationError, EnvironmentSpec, RewardFn
from .known import KnownRewardPolicy
from .monotone import MonotonePolicy
from .oracle import solve_c_star


class _Stationary:
    stationary = True

    def decide(self, x: float) -> bool:
        return bool(self.accept_mask(np.asarray([x]))[0])

    def update(self, x: float, y: Optional[float]) -> None:
        pass


class AcceptAll(_Stationary):
    name = "naive"

    def accept_mask(self, x):
        return np.ones(len(x), dtype=bool)


class RejectAll(_Stationary):
    name = "reject"

    def accept_mask(self, x):
        return np.zeros(len(x), dtype=bool)


class FixedThreshold(_Stationary):
    """Accept every duration of at least ``s``."""

    name = "threshold"

    def __init__(self, s: float):
        self.s = s

    def accept_mask(self, x):
        return x >= self.s


class BaselinePolicy(_Stationary):
    """Oracle policy: accept iff r(x) >= c* x."""

    name = "baseline"

    def __init__(self, c_star: float, reward: RewardFn):
        self.c_star = c_star
        self.reward = reward

    def accept_mask(self, x):
        return np.asarray(self.reward(x)) >= self.c_star * x


ALGORITHMS = ("known", "bandit", "finite", "monotone", "naive", "reject", "baseline", "threshold")


def make_policy(algo: str, spec: EnvironmentSpec, T: float, params: Optional[dict] = None):
    """Instantiate policy ``algo`` for a run of horizon ``T`` on ``spec``."""
    params = dict(params or {})
    try:
        return _build(algo, spec, T, params)
    except TypeError as exc:  # unexpected or missing keyword from the config
        raise ConfigurationError(f"[algo.{algo}] {exc}") from None


def _build(algo, spec, T, params):
    if algo == "known":
        return KnownRewardPolicy(spec.reward, spec.lam, spec.D, spec.E, **params)
    if algo == "bandit":
        return BanditPolicy.from_spec(spec, T, **params)
    if algo == "finite":
        return FiniteSupportPolicy.from_spec(spec, T, **params)
    if algo == "monotone":
        return MonotonePolicy.from_spec(spec, T, **params)
    if algo == "naive":
        return AcceptAll()
    if algo == "reject":
        return RejectAll()
    if algo == "baseline":
        return BaselinePolicy(solve_c_star(spec), spec.reward)
    if algo == "threshold":
        return FixedThreshold(float(params.get("s", 0.0)))
    raise ConfigurationError(f"unknown algorithm {algo!r}; expected one of {', '.join(ALGORITHMS)}")
