"""Known reward function, unknown duration distribution.

Every proposal, accepted or not, enters the empirical threshold equation; the
task is accepted iff its profitability reaches the current root ``c_n``.
"""

from __future__ import annotations

import math

from .env import RewardFn
from .profit_tree import ProfitTree


def deviation_bound(n: int, delta: float, lam: float, D: float, E: float) -> float:
    """High-probability bound lam (D - E) sqrt(ln(1/delta) / 2n) on c_n - c*."""
    if n < 1 or not 0 < delta <= 1:
        raise ValueError("need n >= 1 and delta in (0, 1]")
    return lam * (D - E) * math.sqrt(math.log(1.0 / delta) / (2.0 * n))


class KnownRewardPolicy:
    """Threshold learner that sees the mean reward of every proposal.

    With ``prune_delta > 0`` the tree only keeps tasks whose profitability lies
    within ``deviation_bound(n, prune_delta / n**2, ...)`` of the current root;
    those above are summed into the head, those below forgotten.
    """

    name = "known"

    def __init__(self, reward: RewardFn, lam: float, D: float = 0.0, E: float = 0.0,
                 prune_delta: float = 0.0):
        self.reward = reward
        self.lam = lam
        self.D, self.E = D, E
        self.prune_delta = prune_delta
        self.tree = ProfitTree()
        self.n = 0
        self.c_n = 0.0

    def observe_and_decide(self, x: float, r_x: float) -> bool:
        self.n += 1
        self.tree.insert(r_x, x, self.n)
        self.c_n = self.tree.root_of_phi(self.n, self.lam)
        if self.prune_delta > 0 and self.n >= 2:
            m = deviation_bound(self.n, self.prune_delta / self.n ** 2, self.lam, self.D, self.E)
            self.tree.prune(self.c_n - m, self.c_n + m)
        return r_x >= self.c_n * x

    def decide(self, x: float) -> bool:
        return self.observe_and_decide(x, self.reward(x))

    def update(self, x: float, y) -> None:
        pass
