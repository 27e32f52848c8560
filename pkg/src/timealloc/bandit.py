"""Unknown, noisy rewards: optimistic regressogram learner.

Durations are binned into ``M`` cells of width ``h = C / M``. For each bin the
learner keeps the number of accepted tasks and the sum of their observed
rewards. A task is accepted when the optimistic reward of its bin is at least
a pessimistic threshold times the bin's left endpoint. A bin is eliminated the
first time one of its tasks is rejected: from then on it counts as zero reward
in the threshold equation.

:class:`FiniteSupportPolicy` is the same learner with one bin per support
point of a discrete duration law and tighter confidence terms.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from .env import ConfigurationError, EnvironmentSpec
from .profit_tree import ProfitTree


class UsageError(RuntimeError):
    """Methods called out of protocol order."""


def horizon_bins(C: float, L: float, beta: float, lam: float, T: float) -> int:
    """ceil(C L^(2/(2b+1)) (lam T + 1)^(1/(2b+1))), at least 1."""
    e = 1.0 / (2 * beta + 1)
    return max(1, math.ceil(C * L ** (2 * e) * (lam * T + 1) ** e))


class _BinnedPolicy:
    """Shared bookkeeping of the binned learners; subclasses set the bins and bounds."""

    def __init__(self, x_rep: Sequence[float], lam: float, D: float, E: float, sigma: float,
                 delta: float, eta_scale: float = 1.0, xi_scale: float = 1.0):
        if not 0 < delta <= 1:
            raise ConfigurationError("delta must lie in (0, 1]")
        self.x_rep = np.asarray(x_rep, dtype=float)
        self.M = len(self.x_rep)
        self.lam, self.D, self.E, self.sigma = lam, D, E, sigma
        self.delta = delta
        self.eta_scale, self.xi_scale = eta_scale, xi_scale
        self.counts = [0] * self.M
        self.sums = [0.0] * self.M
        self.eliminated = [False] * self.M
        self.tree = ProfitTree()
        self._stored: list = [None] * self.M  # (reward, duration) of each bin's tree entry
        self.n = 0
        self.c_hat = 0.0
        self.c_hat_minus = 0.0
        self._pending: Optional[int] = None

    # -- estimates ---------------------------------------------------------

    def bin_of(self, x: float) -> int:
        raise NotImplementedError

    def eta(self, count: int) -> float:
        raise NotImplementedError

    def xi(self, n: int) -> float:
        raise NotImplementedError

    def r_hat(self, j: int) -> Optional[float]:
        return self.sums[j] / self.counts[j] if self.counts[j] else None

    def r_tilde(self, j: int) -> Optional[float]:
        if self.eliminated[j]:
            return 0.0
        return self.r_hat(j)

    def upper_reward(self, x: float) -> float:
        """Optimistic reward of the bin of ``x``; infinite while the bin has no data."""
        j = self.bin_of(x)
        if self.counts[j] == 0:
            return math.inf
        return self.sums[j] / self.counts[j] + self.eta(self.counts[j])

    def threshold_lower(self) -> float:
        return self.c_hat_minus

    def phi_hat(self, c: float) -> float:
        """Binned empirical threshold function, by a direct sum over bins."""
        total = 0.0
        for j in range(self.M):
            rt = self.r_tilde(j)
            if rt is not None:
                total += self.counts[j] * max(rt - c * self.x_rep[j], 0.0)
        return self.lam * total / max(self.n, 1) - c

    # -- protocol ------------------------------------------------------------

    def decide(self, x: float) -> bool:
        j = self.bin_of(x)
        self._pending = j
        return self.upper_reward(x) >= self.c_hat_minus * self.x_rep[j]

    def update(self, x: float, y: Optional[float]) -> None:
        """Feed back the outcome of the last decision: observed reward, or None if rejected."""
        j = self.bin_of(x)
        if self._pending != j:
            raise UsageError("update() must follow decide() for a task in the same bin")
        self._pending = None
        if y is None:
            self.eliminated[j] = True
        else:
            self.counts[j] += 1
            self.sums[j] += y
        self._refresh(j)
        self.n += 1
        self.c_hat = self.tree.root_of_phi(self.n, self.lam)
        self.c_hat_minus = max(self.c_hat - self.xi(self.n), 0.0)

    def _refresh(self, j: int) -> None:
        old = self._stored[j]
        if old is not None:
            if self.x_rep[j] > 0:
                self.tree.remove(old[0], old[1], j)
            else:
                self.tree.add_head(-old[0], 0.0, -1)
            self._stored[j] = None
        if self.counts[j] == 0 or self.eliminated[j]:
            # an eliminated bin contributes (0 - c x)_+ = 0 for every c >= 0
            return
        reward, duration = self.sums[j], self.counts[j] * self.x_rep[j]
        if duration > 0:
            self.tree.insert(reward, duration, j)
            self._stored[j] = (reward, duration)
        elif reward > 0:
            # zero-length representative: constant contribution to the sum
            self.tree.add_head(reward, 0.0, 1)
            self._stored[j] = (reward, 0.0)


class BanditPolicy(_BinnedPolicy):
    """Regressogram learner for (L, beta)-Hoelder rewards on [0, C]."""

    name = "bandit"

    def __init__(self, lam: float, C: float, D: float, E: float, sigma: float, L: float,
                 beta: float, M: int, delta: float, kappa: float = 150.0, eta_scale: float = 1.0,
                 xi_scale: float = 1.0, drop_bias_terms: bool = False):
        if M < 1:
            raise ConfigurationError("need at least one bin")
        self.C, self.L, self.beta, self.kappa = C, L, beta, kappa
        self.h = C / M
        self.drop_bias_terms = drop_bias_terms
        super().__init__([j * self.h for j in range(M)], lam, D, E, sigma, delta,
                         eta_scale, xi_scale)
        hb = self.h ** beta
        self._eta_width = math.sqrt(sigma ** 2 + L ** 2 * self.h ** (2 * beta) / 4) \
            * math.sqrt(math.log(M / delta) / 2)
        self._eta_bias = L * hb
        self._xi_bias = math.sqrt(8) * lam * L * hb / 2 ** beta + lam ** 2 * D * self.h

    @classmethod
    def from_spec(cls, spec: EnvironmentSpec, T: float, delta="auto", M="auto", **kw):
        """Build with the horizon-tuned choices delta = 1/T^2 and the matching bin count."""
        L, beta = spec.holder()
        if M == "auto":
            M = horizon_bins(spec.C, L, beta, spec.lam, T)
        if delta == "auto":
            delta = 1.0 / T ** 2
        return cls(spec.lam, spec.C, spec.D, spec.E, spec.sigma, L, beta, int(M), float(delta), **kw)

    def bin_of(self, x: float) -> int:
        j = int(x / self.h)
        return j if j < self.M else self.M - 1

    def eta(self, count: int) -> float:
        return self.eta_scale * (self._eta_width / math.sqrt(count) + self._eta_bias)

    def xi(self, n: int) -> float:
        lam, s = self.lam, self.sigma
        spread = self.D - self.E
        out = 2 * lam * math.sqrt(s ** 2 + spread ** 2 / 4) * math.sqrt(math.log(1 / self.delta) / n)
        out += self.kappa * lam * max(s, spread / 2) * math.sqrt((math.log(n) + 1) / (self.h * n))
        if not self.drop_bias_terms:
            out += self._xi_bias
        return self.xi_scale * out


class FiniteSupportPolicy(_BinnedPolicy):
    """One bin per support point of a discrete duration law."""

    name = "finite"

    def __init__(self, points: Sequence[float], lam: float, D: float, E: float, sigma: float,
                 delta: float, eta_scale: float = 1.0, xi_scale: float = 1.0):
        pts = sorted(float(p) for p in points)
        super().__init__(pts, lam, D, E, sigma, delta, eta_scale, xi_scale)
        self.K = len(pts)
        self._index = {p: j for j, p in enumerate(pts)}

    @classmethod
    def from_spec(cls, spec: EnvironmentSpec, T: float, delta="auto", **kw):
        if not spec.is_discrete:
            raise ConfigurationError("the finite-support learner needs a discrete duration law")
        if delta == "auto":
            delta = 1.0 / T
        return cls(spec.duration.points, spec.lam, spec.D, spec.E, spec.sigma, float(delta), **kw)

    def bin_of(self, x: float) -> int:
        try:
            return self._index[x]
        except KeyError:
            raise ConfigurationError(f"duration {x!r} is not a support point") from None

    def eta(self, count: int) -> float:
        return self.eta_scale * self.sigma * math.sqrt(math.log(self.K / self.delta) / (2 * count))

    def xi(self, n: int) -> float:
        lam, s, spread, K = self.lam, self.sigma, self.D - self.E, self.K
        out = 2 * lam * math.sqrt(s ** 2 + spread ** 2 / 4) * math.sqrt(math.log(1 / self.delta) / n)
        out += lam * s * math.sqrt(K / (2 * n)) + 8 * lam * K * spread / n
        return self.xi_scale * out
