import csv
import math

import numpy as np
import pytest

from timealloc.env import (Affine, ConfigurationError, Discrete, NoNoise, affine_env,
                           discrete_env, two_point_env)
from timealloc.harness import (REPLICA_COLUMNS, SUMMARY_COLUMNS, _Recorder, _run_adaptive,
                               emit_decision_map, regret, run_record, simulate, summarize)
from timealloc.oracle import solve_c_star
from timealloc.policies import (AcceptAll, BaselinePolicy, FixedThreshold, RejectAll,
                                make_policy)
from timealloc.streams import ProposalBlock, proposal_blocks


def pinned(n=100):
    """X = 1, S = 1 (the idle variate u = 1/e), r = 1, no noise."""
    one = np.ones(n)
    return [ProposalBlock(idle=one.copy(), duration=one.copy(), mean=one.copy(),
                          observed=one.copy())]


class TestSimulate:
    def test_hand_simulation(self):
        spec = discrete_env([1.0], [1.0], [1.0])
        tr = simulate(spec, AcceptAll(), 10.0, blocks=pinned())
        assert tr.theta == 6 and tr.total_reward == 6.0 and tr.elapsed == 12.0
        assert list(tr.arrival) == [1.0, 3.0, 5.0, 7.0, 9.0, 11.0]

    def test_reject_all(self):
        tr = simulate(affine_env(), RejectAll(), 100.0, seed=1)
        assert tr.total_reward == 0.0 and not tr.accepted.any()
        assert np.all(np.isnan(tr.observed))

    def test_stopping_rule(self):
        for pol in (AcceptAll(), FixedThreshold(1.0), make_policy("known", affine_env(), 200)):
            tr = simulate(affine_env(), pol, 200.0, seed=4)
            steps = tr.idle + np.where(tr.accepted, tr.duration, 0.0)
            assert tr.elapsed == pytest.approx(steps.sum())
            assert tr.elapsed > 200.0 >= tr.elapsed - steps[-1]
            assert tr.total_reward == pytest.approx(np.nansum(tr.observed))

    def test_bad_horizon(self):
        with pytest.raises(ConfigurationError):
            simulate(affine_env(), AcceptAll(), 0.0)

    def test_stream_exhausted(self):
        with pytest.raises(ConfigurationError):
            simulate(affine_env(), AcceptAll(), 1000.0, blocks=pinned(10))

    @pytest.mark.parametrize("pol", [AcceptAll(), RejectAll(), FixedThreshold(0.8)])
    def test_block_path_matches_loop(self, pol):
        spec = affine_env()
        tr = simulate(spec, pol, 2e4, seed=9)
        rec = _Recorder()
        elapsed, reward = _run_adaptive(pol, proposal_blocks(spec, 9), 2e4, rec)
        ref = rec.build(2e4, elapsed, reward)
        assert (tr.elapsed, tr.total_reward, tr.theta) == (ref.elapsed, ref.total_reward, ref.theta)
        assert np.array_equal(tr.arrival, ref.arrival)

    def test_deterministic(self):
        spec = affine_env()
        a = simulate(spec, make_policy("bandit", spec, 500), 500.0, seed=3)
        b = simulate(spec, make_policy("bandit", spec, 500), 500.0, seed=3)
        assert a.total_reward == b.total_reward and np.array_equal(a.accepted, b.accepted)

    def test_common_random_numbers(self):
        spec = affine_env()
        a = simulate(spec, AcceptAll(), 50.0, seed=3)
        b = simulate(spec, RejectAll(), 50.0, seed=3)
        k = min(a.theta, b.theta)
        assert np.array_equal(a.duration[:k], b.duration[:k])

    def test_baseline_rate(self):
        spec = affine_env()
        c_star = solve_c_star(spec)
        rates = [simulate(spec, BaselinePolicy(c_star, spec.reward), 1e4, seed=s).total_reward / 1e4
                 for s in range(50)]
        assert abs(np.mean(rates) - c_star) <= 0.02


class TestRegret:
    def test_arithmetic(self):
        assert regret(0.5, 10.0, 4.0) == 1.0
        assert regret(0.5, 10.0, 5.0) == 0.0

    def test_identity(self):
        spec = affine_env()
        c_star = solve_c_star(spec)
        for algo in ("naive", "reject", "known", "bandit"):
            r = run_record(spec, algo, 300.0, 2, c_star)
            assert r.regret + r.reward == pytest.approx(c_star * 300.0, rel=1e-12)
        assert run_record(spec, "reject", 300.0, 2, c_star).regret == c_star * 300.0

    def test_gap_regret(self):
        spec = affine_env()
        c_star = solve_c_star(spec)
        tr = simulate(spec, BaselinePolicy(c_star, spec.reward), 1e3, seed=1)
        assert tr.gap_regret(c_star) == pytest.approx(0.0, abs=1e-12)
        tr = simulate(spec, AcceptAll(), 1e3, seed=1)
        gap = tr.mean - c_star * tr.duration
        assert tr.gap_regret(c_star) == pytest.approx(-gap[gap < 0].sum())

    def test_naive_deficit_is_linear(self):
        spec = affine_env()
        c_star = solve_c_star(spec)
        reg = {T: np.mean([run_record(spec, "naive", T, s, c_star).gap_regret for s in range(20)])
               for T in (1e4, 1e5)}
        assert 8 <= reg[1e5] / reg[1e4] <= 12

    def test_summary_order(self):
        spec = affine_env()
        c_star = solve_c_star(spec)
        recs = [run_record(spec, a, T, s, c_star) for a in ("naive", "reject")
                for T in (200.0, 100.0) for s in (1, 0)]
        rows = summarize(recs, ["reject", "naive"])
        assert [(r[0], r[1]) for r in rows] == [("reject", 100.0), ("reject", 200.0),
                                               ("naive", 100.0), ("naive", 200.0)]
        assert all(r[4] == 2 for r in rows)
        assert len(rows[0]) == len(SUMMARY_COLUMNS)


class TestDecisionMap:
    def test_files(self, tmp_path):
        spec = affine_env()
        c_star = solve_c_star(spec)
        tr = simulate(spec, BaselinePolicy(c_star, spec.reward), 100.0, seed=0)
        path, region = emit_decision_map(tr, spec, c_star, tmp_path / "map.csv")
        rows = list(csv.DictReader(open(path)))
        assert len(rows) == tr.theta
        for r in rows:
            x = float(r["x"])
            if r["accepted"] == "1":
                assert x - 0.5 >= c_star * x
        reg = list(csv.DictReader(open(region)))
        assert len(reg) == 200
        assert all((r["suboptimal"] == "1") == (float(r["x"]) < 0.5 / (1 - c_star)) for r in reg)

    def test_reject_all(self, tmp_path):
        spec = two_point_env()
        tr = simulate(spec, RejectAll(), 50.0, seed=0)
        path, region = emit_decision_map(tr, spec, 0.5, tmp_path / "m.csv")
        assert {r["accepted"] for r in csv.DictReader(open(path))} == {"0"}
        assert len(list(csv.DictReader(open(region)))) == 2

    def test_bandit_eliminations_are_rejections(self, tmp_path):
        spec = affine_env()
        pol = make_policy("bandit", spec, 2000.0,
                          dict(eta_scale=0.1, xi_scale=0.002, drop_bias_terms=True))
        tr = simulate(spec, pol, 2000.0, seed=5)
        bins = np.minimum((tr.duration / pol.h).astype(int), pol.M - 1)
        rejected_bins = set(bins[~tr.accepted].tolist())
        assert rejected_bins == {j for j in range(pol.M) if pol.eliminated[j]}


class TestPolicies:
    def test_factory(self):
        for algo in ("known", "bandit", "monotone", "naive", "reject", "baseline"):
            assert make_policy(algo, affine_env(), 100.0).name == algo
        spec = two_point_env()
        assert make_policy("finite", spec, 100.0).name == "finite"
        assert make_policy("threshold", spec, 100.0, {"s": 1.5}).s == 1.5
        with pytest.raises(ConfigurationError):
            make_policy("nope", spec, 100.0)

    def test_threshold_mask(self):
        assert list(FixedThreshold(1.0).accept_mask(np.array([0.5, 1.0, 2.0]))) == [False, True, True]
        assert FixedThreshold(1.0).decide(1.0)
