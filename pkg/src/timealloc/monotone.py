"""Learner for non-decreasing profitability.

When ``r(x)/x`` is non-decreasing, the optimal policy accepts exactly the
durations above some threshold, and learning reduces to locating the
threshold that maximises the empirical reward rate

    p_n(s) = (lam/n sum_i Y_i 1{X_i >= s}) / (1 + lam/n sum_i X_i 1{X_i >= s}).

The learner plays the smallest threshold that is still plausibly optimal, so
the running threshold never decreases. Tasks shorter than it can never enter
a future sum and are only counted.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .bandit import UsageError
from .env import ConfigurationError, EnvironmentSpec


def plausible(p, p_best, weight, zeta):
    """Membership test of the plausibly-optimal threshold set (vectorised)."""
    return (np.asarray(p) - p_best) * weight + 2.0 * zeta >= 0


class MonotonePolicy:
    name = "monotone"

    def __init__(self, lam: float, C: float, D: float, E: float, sigma: float, S: float,
                 delta: float, zeta_scale: float = 1.0):
        if not 0 < delta <= 1:
            raise ConfigurationError("delta must lie in (0, 1]")
        self.lam, self.C, self.D, self.E, self.sigma = lam, C, D, E, sigma
        self.S, self.delta, self.zeta_scale = S, delta, zeta_scale
        self.s = 0.0
        self.n = 0
        self.folded = 0
        # retained accepted tasks, sorted by duration, in growable buffers
        self._x = np.empty(256)
        self._y = np.empty(256)
        self._m = 0

    @property
    def xs(self) -> np.ndarray:
        return self._x[:self._m]

    @property
    def ys(self) -> np.ndarray:
        return self._y[:self._m]

    @classmethod
    def from_spec(cls, spec: EnvironmentSpec, T: float, delta="auto", **kw):
        """S = 2(lam T + 1) and, by default, delta = 1/T^2."""
        if delta == "auto":
            delta = 1.0 / T ** 2
        return cls(spec.lam, spec.C, spec.D, spec.E, spec.sigma, 2 * (spec.lam * T + 1),
                   float(delta), **kw)

    # -- estimates -------------------------------------------------------------

    def p_n(self, s: float) -> float:
        if self.n == 0:
            raise UsageError("p_n is undefined before the first observation")
        if s < self.s:
            raise ValueError(f"threshold {s} is below the current threshold {self.s}")
        keep = self.xs >= s
        a = self.lam / self.n * float(self.ys[keep].sum())
        b = self.lam / self.n * float(self.xs[keep].sum())
        return a / (1.0 + b)

    def zeta(self, n: int) -> float:
        if n < 2:
            raise UsageError("the error term needs n >= 2")
        spread = self.D - self.E
        width = math.sqrt(self.sigma ** 2 + spread ** 2 / 4) \
            + spread / math.sqrt(2) * (self.lam * self.C + 2)
        out = width * math.sqrt(math.log(2 * (self.S + 1) / self.delta) / (n - 1)) \
            + self.lam * spread / n
        return self.zeta_scale * out

    def _candidates(self):
        """Thresholds at which p_n is evaluated, with the matching suffix sums.

        p_n only changes at observed durations, so it suffices to look at the
        current threshold, every distinct retained duration above it, and C.
        """
        xs, ys = self.xs, self.ys
        sx = np.cumsum(xs[::-1])[::-1]
        sy = np.cumsum(ys[::-1])[::-1]
        keep = xs > self.s
        keep[1:] &= xs[1:] != xs[:-1]
        kc = int(np.searchsorted(xs, self.C, side="left"))
        tail = (float(sx[kc]), float(sy[kc])) if kc < len(xs) else (0.0, 0.0)
        head = (float(sx[0]), float(sy[0])) if len(xs) else (0.0, 0.0)
        cand = np.concatenate(([self.s], xs[keep], [self.C]))
        return (cand, np.concatenate(([head[0]], sx[keep], [tail[0]])),
                np.concatenate(([head[1]], sy[keep], [tail[1]])))

    def update_threshold(self) -> float:
        """Smallest plausibly optimal threshold for the next stage."""
        if self.n < 1:
            raise UsageError("no observation yet")
        if self.n < 2:
            return self.s
        cand, sx, sy = self._candidates()
        scale = self.lam / self.n
        p = scale * sy / (1.0 + scale * sx)
        weight = 1.0 / self.lam + sx / self.n
        ok = plausible(p, p.max(), weight, self.zeta(self.n))
        return float(cand[np.argmax(ok)])

    # -- protocol ----------------------------------------------------------------

    def decide(self, x: float) -> bool:
        return x >= self.s

    def update(self, x: float, y: Optional[float]) -> None:
        """Record the outcome (None when rejected) and move the threshold."""
        self.n += 1
        if y is None:
            if x >= self.s:
                raise UsageError("a task above the threshold cannot be rejected")
            self.folded += 1
        else:
            self._insert(x, y)
        s_new = self.update_threshold()
        if s_new > self.s:
            cut = int(np.searchsorted(self.xs, s_new, side="left"))
            m = self._m - cut
            self._x[:m] = self._x[cut:self._m]
            self._y[:m] = self._y[cut:self._m]
            self._m = m
            self.folded += cut
            self.s = s_new

    def _insert(self, x: float, y: float) -> None:
        m = self._m
        if m == len(self._x):
            self._x = np.concatenate((self._x, np.empty(m)))
            self._y = np.concatenate((self._y, np.empty(m)))
        k = int(np.searchsorted(self._x[:m], x, side="right"))
        self._x[k + 1:m + 1] = self._x[k:m]
        self._y[k + 1:m + 1] = self._y[k:m]
        self._x[k], self._y[k] = x, y
        self._m = m + 1
