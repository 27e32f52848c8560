import math

import numpy as np
import pytest

from drive import drive
from timealloc.bandit import UsageError
from timealloc.env import ConfigurationError, affine_env
from timealloc.monotone import MonotonePolicy, plausible
from timealloc.oracle import duration_threshold, solve_c_star


def make(**kw):
    base = dict(lam=1.0, C=3.0, D=1.0, E=0.0, sigma=1.0, S=21.0, delta=0.01)
    base.update(kw)
    return MonotonePolicy(**base)


def two_tasks():
    pol = make()
    pol.update(1.0, 0.5)
    pol.update(2.0, 1.5)
    return pol


def p_brute(history, s, n, lam):
    num = sum(y for x, y in history if x >= s)
    den = sum(x for x, y in history if x >= s)
    return (lam / n * num) / (1 + lam / n * den)


class TestEstimates:
    def test_p_values(self):
        pol = two_tasks()
        assert pol.p_n(1.5) == pytest.approx(0.375)
        assert pol.p_n(3.0) == 0.0
        assert pol.p_n(0.0) == pytest.approx(0.4)

    def test_p_before_data(self):
        with pytest.raises(UsageError):
            make().p_n(0.0)

    def test_zeta(self):
        pol = make()
        assert pol.zeta(2) == pytest.approx(13.979, abs=1e-3)
        assert pol.zeta(101) == pytest.approx(1.3577786, abs=1e-7)
        assert pol.zeta(10 ** 12) < 1e-4
        with pytest.raises(UsageError):
            pol.zeta(1)

    def test_left_continuity(self):
        # the indicator is X >= s, so p_n is constant on (X_(k-1), X_(k)]:
        # a midpoint shares its value with the breakpoint on its right
        pol = make()
        xs = [0.4, 0.9, 1.7, 2.6]
        for x in xs:
            pol.update(x, x - 0.5)
        for lo, hi in zip(xs, xs[1:]):
            assert pol.p_n((lo + hi) / 2) == pol.p_n(hi)
            assert pol.p_n(lo) != pol.p_n(hi)

    def test_membership(self):
        assert not plausible(-10.0, 0.0, 1.0, 1.0)
        assert plausible(-1.0, 0.0, 1.0, 1.0)
        assert plausible(0.0, 0.0, 5.0, 0.0)


class TestThreshold:
    def test_first_observation_keeps_threshold(self):
        pol = make()
        pol.update(1.0, 0.5)
        assert pol.s == 0.0 and pol.update_threshold() == 0.0

    def test_large_error_term_keeps_threshold(self):
        pol = two_tasks()
        assert pol.s == 0.0
        assert pol.update_threshold() == 0.0

    def test_moves_when_error_small(self):
        pol = make(zeta_scale=0.0)
        for x, y in [(0.2, -0.5), (1.0, 0.5), (2.0, 1.5)]:
            pol.update(x, y)
        # best threshold excludes the loss-making short task
        assert pol.s == pytest.approx(1.0)
        assert pol.folded == 1 and list(pol.xs) == [1.0, 2.0]

    def test_ties_go_to_smallest(self):
        pol = make(zeta_scale=0.0)
        pol.update(1.0, 0.0)
        pol.update(2.0, 0.0)
        assert pol.s == 0.0

    def test_decide(self):
        pol = make()
        assert pol.decide(0.01)
        pol.s = 1.2
        assert pol.decide(1.2) and not pol.decide(1.19)
        with pytest.raises(UsageError):
            pol.update(1.5, None)

    def test_below_threshold_rejected(self):
        pol = make()
        pol.update(1.0, 0.5)
        pol.s = 1.0
        with pytest.raises(ValueError):
            pol.p_n(0.5)

    def test_bad_delta(self):
        with pytest.raises(ConfigurationError):
            make(delta=0.0)


class TestTrajectory:
    def test_nondecreasing_and_lossless(self):
        spec = affine_env()
        pol = MonotonePolicy.from_spec(spec, 1e3, zeta_scale=0.01)
        history, last = [], [0.0]

        def check(p):
            assert p.s >= last[0]
            last[0] = p.s
            if p.n % 50 == 0:
                for s in np.linspace(p.s, spec.C, 7):
                    kept = [(x, y) for x, y in history if x >= p.s]
                    assert p.p_n(s) == pytest.approx(p_brute(kept, s, p.n, spec.lam), rel=1e-9)

        from timealloc.streams import proposal_blocks
        blk = next(proposal_blocks(spec, 11, block=1500))
        for x, y in zip(blk.duration.tolist(), blk.observed.tolist()):
            if pol.decide(x):
                history.append((x, y))
                pol.update(x, y)
            else:
                pol.update(x, None)
            check(pol)
        assert pol.s > 0
        assert pol.folded + len(pol.xs) == pol.n

    def test_from_spec(self):
        pol = MonotonePolicy.from_spec(affine_env(), 100.0)
        assert pol.S == 202.0 and pol.delta == pytest.approx(1e-4)

    def test_converges_towards_optimal_threshold(self):
        spec = affine_env()
        s_star = duration_threshold(spec, solve_c_star(spec))
        pol = drive(spec, MonotonePolicy.from_spec(spec, 1e4, zeta_scale=0.01), 4000, seed=2)
        assert 0.3 < pol.s <= s_star
