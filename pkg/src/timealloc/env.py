"""Task-arrival environments.

An environment is a Poisson stream of task proposals: the agent idles for an
exponential time, is offered a task whose duration is drawn i.i.d. from a
duration distribution, and (if it accepts) earns a noisy reward whose mean is
a deterministic function of the duration.

Every sampler here is a pure function of uniform variates in (0, 1). The
variates themselves come from :mod:`timealloc.streams`, so two runs fed the
same variates produce bitwise identical trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigurationError(ValueError):
    """An environment or policy was configured inconsistently."""


# ---------------------------------------------------------------------------
# Duration distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo < self.hi):
            raise ConfigurationError(f"need 0 <= lo < hi, got ({self.lo}, {self.hi})")

    @property
    def upper(self) -> float:
        return self.hi

    @property
    def mean(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def sample(self, u: ArrayLike) -> ArrayLike:
        return self.lo + u * (self.hi - self.lo)


@dataclass(frozen=True)
class Discrete:
    """Finite support ``points`` with probabilities ``probs``."""

    points: tuple
    probs: tuple
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = tuple(float(x) for x in self.points)
        prb = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "probs", prb)
        if len(pts) == 0 or len(pts) != len(prb):
            raise ConfigurationError("points and probs must be non-empty and of equal length")
        if len(set(pts)) != len(pts):
            raise ConfigurationError("support points must be distinct")
        if any(x <= 0 for x in pts):
            raise ConfigurationError("support points must be positive")
        if any(p < 0 for p in prb) or abs(sum(prb) - 1.0) > 1e-12:
            raise ConfigurationError(f"probabilities must be >= 0 and sum to 1, got {sum(prb)!r}")
        object.__setattr__(self, "_cum", np.cumsum(prb))

    @property
    def upper(self) -> float:
        return max(self.points)

    @property
    def mean(self) -> float:
        return float(np.dot(self.points, self.probs))

    def sample(self, u: ArrayLike) -> ArrayLike:
        idx = np.searchsorted(self._cum, u, side="right")
        idx = np.minimum(idx, len(self.points) - 1)
        pts = np.asarray(self.points)
        if np.ndim(u) == 0:
            return float(pts[int(idx)])
        return pts[idx]


def two_point(eps: float) -> Discrete:
    """Durations 1 and 2 with probabilities 1/2 + eps and 1/2 - eps."""
    if not -0.5 <= eps <= 0.5:
        raise ConfigurationError("eps must lie in [-1/2, 1/2]")
    return Discrete((1.0, 2.0), (0.5 + eps, 0.5 - eps))


DurationDist = Union[Uniform, Discrete]


# ---------------------------------------------------------------------------
# Mean reward functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Affine:
    """r(x) = a x + b."""

    a: float
    b: float

    def __call__(self, x: ArrayLike) -> ArrayLike:
        return self.a * x + self.b

    @property
    def coeffs(self) -> tuple:
        # lowest degree first
        return (self.b, self.a)

    def holder(self, C: float) -> tuple:
        return abs(self.a), 1.0

    def value_range(self, C: float) -> tuple:
        ends = (self.b, self.a * C + self.b)
        return min(ends), max(ends)


@dataclass(frozen=True)
class Quadratic:
    """r(x) = a x^2 + b x + c."""

    a: float
    b: float
    c: float

    def __call__(self, x: ArrayLike) -> ArrayLike:
        return (self.a * x + self.b) * x + self.c

    @property
    def coeffs(self) -> tuple:
        return (self.c, self.b, self.a)

    def holder(self, C: float) -> tuple:
        # Lipschitz constant of r on [0, C]: max |r'| at the endpoints
        return max(abs(self.b), abs(2 * self.a * C + self.b)), 1.0

    def value_range(self, C: float) -> tuple:
        vals = [self(0.0), self(C)]
        if self.a != 0:
            vertex = -self.b / (2 * self.a)
            if 0 < vertex < C:
                vals.append(self(vertex))
        return min(vals), max(vals)


@dataclass(frozen=True)
class Table:
    """Mean reward tabulated on a finite support."""

    values: Mapping[float, float]

    def __post_init__(self):
        object.__setattr__(self, "values", {float(k): float(v) for k, v in dict(self.values).items()})

    def __call__(self, x: ArrayLike) -> ArrayLike:
        if np.ndim(x) == 0:
            try:
                return self.values[float(x)]
            except KeyError:
                raise DomainError(f"duration {x!r} is not in the tabulated support") from None
        keys = np.array(sorted(self.values))
        vals = np.array([self.values[k] for k in keys])
        idx = np.searchsorted(keys, x)
        idx = np.minimum(idx, len(keys) - 1)
        if not np.array_equal(keys[idx], x):
            raise DomainError("some durations are not in the tabulated support")
        return vals[idx]

    def holder(self, C: float) -> tuple:
        raise ConfigurationError("Hoelder constants are not defined for tabulated rewards")

    def value_range(self, C: float) -> tuple:
        vals = list(self.values.values())
        return min(vals), max(vals)


RewardFn = Union[Affine, Quadratic, Table]


# ---------------------------------------------------------------------------
# Noise
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NoNoise:
    @property
    def sigma(self) -> float:
        return 0.0

    def sample(self, u1: ArrayLike, u2: ArrayLike) -> ArrayLike:
        return 0.0 * u1


@dataclass(frozen=True)
class UniformNoise:
    """Noise uniform on [-halfwidth, halfwidth]; subgaussian proxy = halfwidth."""

    halfwidth: float

    @property
    def sigma(self) -> float:
        return self.halfwidth

    def sample(self, u1: ArrayLike, u2: ArrayLike) -> ArrayLike:
        return self.halfwidth * (2.0 * u1 - 1.0)


@dataclass(frozen=True)
class GaussianNoise:
    variance: float

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance)

    def sample(self, u1: ArrayLike, u2: ArrayLike) -> ArrayLike:
        # Box-Muller, cosine branch
        return math.sqrt(self.variance) * np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * math.pi * u2)


NoiseModel = Union[NoNoise, UniformNoise, GaussianNoise]


# ---------------------------------------------------------------------------
# Environment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnvironmentSpec:
    """Arrival rate, duration law, mean reward, noise and the a-priori bounds.

    ``C``, ``D`` and ``E`` default to the tightest values compatible with the
    duration law and reward function (with ``E <= 0 <= D``). ``sigma``
    defaults to the noise model's subgaussian proxy.
    """

    lam: float
    duration: DurationDist
    reward: RewardFn
    noise: NoiseModel = NoNoise()
    C: Optional[float] = None
    D: Optional[float] = None
    E: Optional[float] = None
    sigma: Optional[float] = None

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigurationError("arrival rate must be positive")
        C = self.duration.upper if self.C is None else float(self.C)
        if self.duration.upper > C:
            raise ConfigurationError(f"durations exceed C={C}")
        object.__setattr__(self, "C", C)
        if isinstance(self.reward, Table):
            if not isinstance(self.duration, Discrete):
                raise ConfigurationError("tabulated rewards need a discrete duration law")
            missing = set(self.duration.points) - set(self.reward.values)
            if missing:
                raise ConfigurationError(f"no tabulated reward for durations {sorted(missing)}")
        lo, hi = self.reward.value_range(C)
        D = max(hi, 0.0) if self.D is None else float(self.D)
        E = min(lo, 0.0) if self.E is None else float(self.E)
        if not E <= 0 <= D:
            raise ConfigurationError(f"need E <= 0 <= D, got E={E}, D={D}")
        if lo < E - 1e-12 or hi > D + 1e-12:
            raise ConfigurationError(f"reward range [{lo}, {hi}] escapes [E, D] = [{E}, {D}]")
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "E", E)
        if self.sigma is None:
            object.__setattr__(self, "sigma", self.noise.sigma)

    @property
    def is_discrete(self) -> bool:
        return isinstance(self.duration, Discrete)

    def holder(self) -> tuple:
        """(L, beta) of the mean reward on [0, C]."""
        return self.reward.holder(self.C)


def sample_idle(spec: EnvironmentSpec, u: float) -> float:
    """Exponential idle time by inverse CDF."""
    if not 0.0 < u < 1.0:
        raise DomainError(f"uniform variate must lie in (0, 1), got {u!r}")
    return -math.log(u) / spec.lam


def sample_duration(dist: DurationDist, u: float) -> float:
    if not 0.0 <= u < 1.0:
        raise DomainError(f"uniform variate must lie in [0, 1), got {u!r}")
    return float(dist.sample(u))


def mean_reward(fn: RewardFn, x: float, C: Optional[float] = None) -> float:
    if x < 0 or (C is not None and x > C):
        raise DomainError(f"duration {x!r} outside [0, C]")
    return float(fn(x))


def sample_reward(spec: EnvironmentSpec, x: float, u1: float, u2: float = 0.5) -> float:
    """Observed reward r(x) + noise, the noise drawn from (u1, u2)."""
    return mean_reward(spec.reward, x, spec.C) + float(spec.noise.sample(u1, u2))


# ---------------------------------------------------------------------------
# The environments used in the experiments
# ---------------------------------------------------------------------------


def affine_env(**overrides) -> EnvironmentSpec:
    """r(x) = x - 0.5, X ~ U[0, 3], lambda = 1, noise uniform on [-1, 1]."""
    kw = dict(lam=1.0, duration=Uniform(0.0, 3.0), reward=Affine(1.0, -0.5), noise=UniformNoise(1.0))
    kw.update(overrides)
    return EnvironmentSpec(**kw)


def concave_env(**overrides) -> EnvironmentSpec:
    """r(x) = -0.3 x^2 + x - 0.2, X ~ U[0, 3], lambda = 1, Gaussian noise of variance 0.1."""
    kw = dict(lam=1.0, duration=Uniform(0.0, 3.0), reward=Quadratic(-0.3, 1.0, -0.2),
              noise=GaussianNoise(0.1))
    kw.update(overrides)
    return EnvironmentSpec(**kw)


def two_point_env(eps: float = 0.0, **overrides) -> EnvironmentSpec:
    """X in {1, 2} with P(X = 1) = 1/2 + eps; r(1) = 1/2, r(2) = 2."""
    kw = dict(lam=1.0, duration=two_point(eps), reward=Table({1.0: 0.5, 2.0: 2.0}),
              noise=GaussianNoise(0.1))
    kw.update(overrides)
    return EnvironmentSpec(**kw)


def discrete_env(points: Sequence[float], probs: Sequence[float], rewards: Sequence[float],
                 lam: float = 1.0, noise: NoiseModel = NoNoise(), **overrides) -> EnvironmentSpec:
    return EnvironmentSpec(lam=lam, duration=Discrete(tuple(points), tuple(probs)),
                           reward=Table(dict(zip(points, rewards))), noise=noise, **overrides)
