"""Augmented balanced search tree for the empirical threshold equation.

The learners all need the root of a piecewise-linear decreasing function

    Phi_n(c) = (lam / n) * sum_i (R_i - c X_i)_+  -  c

over a growing multiset of weighted tasks ``(R_i, X_i)`` with ``X_i > 0``.
Storing tasks in an AVL tree keyed by profitability ``R_i / X_i`` (ties broken
by an integer id) and augmenting each node with the reward and duration sums
of its subtree lets ``Phi_n`` be evaluated at any stored key in O(1) during a
single root-to-leaf descent, so the root costs O(log n).

Tasks whose profitability is certainly above the root only matter through
their sums; :meth:`ProfitTree.prune` folds them into a *head* accumulator and
drops tasks that are certainly below the root.
"""

from __future__ import annotations

import math
from typing import Iterator, Optional

from .env import DomainError


class _Node:
    __slots__ = ("p", "tid", "R", "X", "sR", "sX", "cnt", "h", "left", "right")

    def __init__(self, p, tid, R, X):
        self.p = p
        self.tid = tid
        self.R = R
        self.X = X
        self.sR = R
        self.sX = X
        self.cnt = 1
        self.h = 1
        self.left = None
        self.right = None


def _h(n):
    return n.h if n is not None else 0


def _update(n):
    l, r = n.left, n.right
    sR, sX, cnt, h = n.R, n.X, 1, 0
    if l is not None:
        sR += l.sR
        sX += l.sX
        cnt += l.cnt
        h = l.h
    if r is not None:
        sR += r.sR
        sX += r.sX
        cnt += r.cnt
        if r.h > h:
            h = r.h
    n.sR, n.sX, n.cnt, n.h = sR, sX, cnt, h + 1


def _rot_right(n):
    l = n.left
    n.left = l.right
    l.right = n
    _update(n)
    _update(l)
    return l


def _rot_left(n):
    r = n.right
    n.right = r.left
    r.left = n
    _update(n)
    _update(r)
    return r


def _rebalance(n):
    _update(n)
    bal = _h(n.left) - _h(n.right)
    if bal > 1:
        if _h(n.left.left) < _h(n.left.right):
            n.left = _rot_left(n.left)
        return _rot_right(n)
    if bal < -1:
        if _h(n.right.right) < _h(n.right.left):
            n.right = _rot_right(n.right)
        return _rot_left(n)
    return n


def _less(p, tid, n):
    return p < n.p or (p == n.p and tid < n.tid)


def _insert(n, new):
    if n is None:
        return new
    if _less(new.p, new.tid, n):
        n.left = _insert(n.left, new)
    else:
        n.right = _insert(n.right, new)
    return _rebalance(n)


def _pop_min(n):
    """Detach the minimum of subtree ``n``; returns (new subtree, min node)."""
    if n.left is None:
        return n.right, n
    n.left, m = _pop_min(n.left)
    return _rebalance(n), m


def _delete(n, p, tid):
    if n is None:
        raise KeyError((p, tid))
    if p == n.p and tid == n.tid:
        if n.left is None:
            return n.right
        if n.right is None:
            return n.left
        right, m = _pop_min(n.right)
        m.left, m.right = n.left, right
        return _rebalance(m)
    if _less(p, tid, n):
        n.left = _delete(n.left, p, tid)
    else:
        n.right = _delete(n.right, p, tid)
    return _rebalance(n)


def _join_right(a, k, b):
    if _h(a.right) <= _h(b) + 1:
        k.left, k.right = a.right, b
        _update(k)
        a.right = k
    else:
        a.right = _join_right(a.right, k, b)
    return _rebalance(a)


def _join_left(a, k, b):
    if _h(b.left) <= _h(a) + 1:
        k.left, k.right = a, b.left
        _update(k)
        b.left = k
    else:
        b.left = _join_left(a, k, b.left)
    return _rebalance(b)


def _join(a, k, b):
    """AVL join: every key of ``a`` < key of ``k`` < every key of ``b``."""
    if _h(a) > _h(b) + 1:
        return _join_right(a, k, b)
    if _h(b) > _h(a) + 1:
        return _join_left(a, k, b)
    k.left, k.right = a, b
    _update(k)
    return k


def _split(n, goes_left):
    """Split into (nodes with ``goes_left(node)``, the rest); ``goes_left`` is monotone."""
    if n is None:
        return None, None
    l, r = n.left, n.right
    if goes_left(n):
        a, b = _split(r, goes_left)
        return _join(l, n, a), b
    a, b = _split(l, goes_left)
    return a, _join(b, n, r)


class ProfitTree:
    """Profitability-ordered multiset of weighted tasks with a head accumulator.

    Parameters of :meth:`root_of_phi` are the normaliser ``n`` (total number of
    proposals, which may exceed the number of stored tasks) and the arrival
    rate ``lam``. ``last_visits`` records how many nodes the latest descent
    touched.
    """

    def __init__(self):
        self.root: Optional[_Node] = None
        self.head_reward = 0.0
        self.head_duration = 0.0
        self.head_count = 0
        self.lo = -math.inf
        self.hi = math.inf
        self.last_visits = 0

    # -- size and inspection ------------------------------------------------

    @property
    def count(self) -> int:
        return self.root.cnt if self.root is not None else 0

    def __len__(self):
        return self.count

    @property
    def height(self) -> int:
        return _h(self.root)

    @property
    def total_reward(self) -> float:
        return self.root.sR if self.root is not None else 0.0

    @property
    def total_duration(self) -> float:
        return self.root.sX if self.root is not None else 0.0

    def items(self) -> Iterator[tuple]:
        """In-order (profitability, tiebreak, reward, duration)."""
        stack, n = [], self.root
        while stack or n is not None:
            while n is not None:
                stack.append(n)
                n = n.left
            n = stack.pop()
            yield n.p, n.tid, n.R, n.X
            n = n.right

    def check_invariants(self) -> None:
        """Raise AssertionError if aggregates, ordering or balance are broken."""

        def walk(n):
            if n is None:
                return 0.0, 0.0, 0, 0
            lR, lX, lc, lh = walk(n.left)
            rR, rX, rc, rh = walk(n.right)
            assert abs(lh - rh) <= 1, "AVL balance violated"
            assert n.h == 1 + max(lh, rh), "stale height"
            assert n.cnt == 1 + lc + rc, "stale count"
            sR, sX = n.R + lR + rR, n.X + lX + rX
            assert math.isclose(n.sR, sR, rel_tol=1e-12, abs_tol=1e-9), "stale reward sum"
            assert math.isclose(n.sX, sX, rel_tol=1e-12, abs_tol=1e-9), "stale duration sum"
            return sR, sX, n.cnt, n.h

        walk(self.root)
        keys = [(p, tid) for p, tid, _, _ in self.items()]
        assert keys == sorted(keys), "in-order keys not sorted"
        assert self.height <= 2 * math.log2(self.count + 2)

    # -- updates --------------------------------------------------------------

    def insert(self, reward: float, duration: float, tiebreak: int = 0) -> str:
        """Store a task; returns where it went: ``"tree"``, ``"head"`` or ``"dropped"``.

        Tasks outside the current pruning window are folded into the head
        (above it) or discarded (below it) straight away.
        """
        if not duration > 0:
            raise DomainError(f"duration must be positive, got {duration!r}")
        p = reward / duration
        if p > self.hi:
            self.add_head(reward, duration)
            return "head"
        if p < self.lo:
            return "dropped"
        self.root = _insert(self.root, _Node(p, tiebreak, reward, duration))
        return "tree"

    def remove(self, reward: float, duration: float, tiebreak: int = 0) -> None:
        """Remove a task previously stored with the same arguments."""
        self.root = _delete(self.root, reward / duration, tiebreak)

    def add_head(self, reward: float, duration: float = 0.0, count: int = 1) -> None:
        """Add mass that always contributes fully (negative values subtract it)."""
        self.head_reward += reward
        self.head_duration += duration
        self.head_count += count

    def prune(self, lo: float, hi: float) -> None:
        """Fold tasks with profitability > hi into the head; drop those < lo.

        The window only ever shrinks: later inserts are routed against the
        intersection of every window requested so far.
        """
        if lo > hi:
            raise ValueError("prune window must satisfy lo <= hi")
        self.lo = max(self.lo, lo)
        self.hi = min(self.hi, hi)
        if self.root is None:
            return
        if self._max().p > self.hi:
            hi_ = self.hi
            keep, above = _split(self.root, lambda n: n.p <= hi_)
            if above is not None:
                self.add_head(above.sR, above.sX, above.cnt)
            self.root = keep
        if self.root is not None and self._min().p < self.lo:
            lo_ = self.lo
            _, self.root = _split(self.root, lambda n: n.p < lo_)

    def _min(self):
        n = self.root
        while n.left is not None:
            n = n.left
        return n

    def _max(self):
        n = self.root
        while n.right is not None:
            n = n.right
        return n

    # -- the root -------------------------------------------------------------

    def phi(self, c: float, n: int, lam: float) -> float:
        """Phi_n(c) by a linear scan; for checks, not for the hot path."""
        s = sum(max(R - c * X, 0.0) for _, _, R, X in self.items())
        s += max(self.head_reward - c * self.head_duration, 0.0) if self.head_count else 0.0
        return lam / n * s - c

    def root_of_phi(self, n: int, lam: float) -> float:
        """Unique root of Phi_n by one root-to-leaf descent plus a closed form."""
        if n < max(1, self.count):
            raise ValueError(f"normaliser n={n} is smaller than the number of stored tasks")
        scale = lam / n
        accR, accX = self.head_reward, self.head_duration
        node, visits = self.root, 0
        while node is not None:
            visits += 1
            k = node.p
            r = node.right
            if r is not None:
                sR, sX = accR + r.sR, accX + r.sX
            else:
                sR, sX = accR, accX
            val = scale * (sR - k * sX) - k
            if val > 0:
                node = r
            elif val < 0:
                accR, accX = sR + node.R, sX + node.X
                node = node.left
            else:
                self.last_visits = visits
                return k
        self.last_visits = visits
        # Phi_n is linear just above the last key with Phi_n > 0; the tasks
        # contributing there are exactly the accumulated ones
        c = lam * accR / (n + lam * accX)
        return max(c, 0.0)
