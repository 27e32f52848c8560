"""Seeded simulation of a policy, regret accounting and Monte Carlo sweeps.

A run stops at the first proposal whose completion time exceeds the horizon
``T``; that last task is counted in full. Two regret estimates are reported:

* ``regret``: the realized value ``c* T - sum of accepted Y``, so that
  ``regret + reward == c* T`` holds exactly;
* ``gap_regret``: ``sum_n (r(X_n) - c* X_n)_+ - (r(X_n) - c* X_n) a_n`` over
  the proposals of the run. By Wald's identity it has the same expectation as
  the realized regret up to a bounded boundary term, with far less variance
  (it carries no idle-time or reward noise), so ordinal comparisons between
  policies can be made with a few dozen replicas.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Iterator, Optional

import numpy as np

from .env import ConfigurationError, EnvironmentSpec
from .oracle import solve_c_star
from .policies import make_policy
from .streams import ProposalBlock, proposal_blocks

REPLICA_COLUMNS = ("algo", "T", "seed", "regret", "reward", "theta", "elapsed", "gap_regret")
SUMMARY_COLUMNS = ("algo", "T", "mean_regret", "stderr", "replicas",
                   "mean_gap_regret", "gap_stderr", "mean_theta")
REGION_POINTS = 200


@dataclass
class Trajectory:
    """Per-proposal record of a run (arrays of length ``theta``).

    ``observed`` is NaN for rejected proposals; ``mean`` holds r(X_n) for
    every proposal, accepted or not.
    """

    T: float
    arrival: np.ndarray
    idle: np.ndarray
    duration: np.ndarray
    accepted: np.ndarray
    observed: np.ndarray
    mean: np.ndarray
    elapsed: float
    total_reward: float

    @property
    def theta(self) -> int:
        return len(self.idle)

    def gap_regret(self, c_star: float) -> float:
        gap = self.mean - c_star * self.duration
        return float(np.sum(np.maximum(gap, 0.0) - np.where(self.accepted, gap, 0.0)))


@dataclass
class RegretRecord:
    algo: str
    T: float
    seed: int
    regret: float
    reward: float
    theta: int
    elapsed: float
    gap_regret: float

    def row(self) -> list:
        return [getattr(self, f.name) for f in fields(self)]


def regret(c_star: float, T: float, realized: float) -> float:
    return c_star * T - realized


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------


class _Recorder:
    def __init__(self):
        self.parts = []

    def add(self, blk: ProposalBlock, k: int, accepted: np.ndarray, arrival: np.ndarray):
        self.parts.append((arrival[:k], blk.idle[:k], blk.duration[:k], accepted[:k],
                           blk.observed[:k], blk.mean[:k]))

    def build(self, T, elapsed, reward) -> Trajectory:
        cols = list(zip(*self.parts)) if self.parts else [[np.empty(0)]] * 6
        arrival, idle, dur, acc, obs, mean = (np.concatenate(c) for c in cols)
        acc = acc.astype(bool)
        obs = np.where(acc, obs, np.nan)
        return Trajectory(T, arrival, idle, dur, acc, obs, mean, elapsed, reward)


def _run_stationary(policy, blocks: Iterator[ProposalBlock], T: float, rec: _Recorder):
    elapsed, reward = 0.0, 0.0
    for blk in blocks:
        acc = np.asarray(policy.accept_mask(blk.duration), dtype=bool)
        steps = np.empty(2 * len(blk) + 1)
        steps[0] = elapsed
        steps[1::2] = blk.idle
        steps[2::2] = np.where(acc, blk.duration, 0.0)
        clock = np.cumsum(steps)  # sequential, so it matches the scalar loop bitwise
        done = clock[2::2]
        over = np.flatnonzero(done > T)
        k = int(over[0]) + 1 if len(over) else len(blk)
        gains = np.empty(k + 1)
        gains[0] = reward
        gains[1:] = np.where(acc[:k], blk.observed[:k], 0.0)
        reward = float(np.cumsum(gains)[-1])
        elapsed = float(done[k - 1])
        rec.add(blk, k, acc, clock[1::2])
        if len(over):
            return elapsed, reward


def _run_adaptive(policy, blocks: Iterator[ProposalBlock], T: float, rec: _Recorder):
    elapsed, reward = 0.0, 0.0
    sees_mean = hasattr(policy, "observe_and_decide")
    for blk in blocks:
        idle, dur, mean, obs = (a.tolist() for a in (blk.idle, blk.duration, blk.mean, blk.observed))
        acc = np.zeros(len(idle), dtype=bool)
        arrival = np.empty(len(idle))
        for i in range(len(idle)):
            elapsed += idle[i]
            arrival[i] = elapsed
            x = dur[i]
            a = policy.observe_and_decide(x, mean[i]) if sees_mean else policy.decide(x)
            if a:
                acc[i] = True
                elapsed += x
                reward += obs[i]
                policy.update(x, obs[i])
            else:
                policy.update(x, None)
            if elapsed > T:
                rec.add(blk, i + 1, acc, arrival)
                return elapsed, reward
        rec.add(blk, len(idle), acc, arrival)


def simulate(spec: EnvironmentSpec, policy, T: float, seed: int = 0,
             blocks: Optional[Iterable[ProposalBlock]] = None) -> Trajectory:
    """Run ``policy`` on ``spec`` until the clock passes ``T``.

    ``blocks`` replaces the seeded proposal stream; tests use it to pin variates.
    Stationary policies are simulated a block at a time, with results identical
    to the proposal-by-proposal loop.
    """
    if not T > 0:
        raise ConfigurationError("horizon T must be positive")
    it = iter(blocks) if blocks is not None else proposal_blocks(spec, seed)
    rec = _Recorder()
    run = _run_stationary if getattr(policy, "stationary", False) else _run_adaptive
    out = run(policy, it, T, rec)
    if out is None:
        raise ConfigurationError("the proposal stream ended before the horizon")
    return rec.build(T, *out)


def run_record(spec: EnvironmentSpec, algo: str, T: float, seed: int, c_star: float,
               params: Optional[dict] = None) -> RegretRecord:
    policy = make_policy(algo, spec, T, params)
    traj = simulate(spec, policy, T, seed)
    return RegretRecord(algo, T, seed, regret(c_star, T, traj.total_reward), traj.total_reward,
                        traj.theta, traj.elapsed, traj.gap_regret(c_star))


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


def _job(args) -> RegretRecord:
    spec, algo, T, seed, c_star, params = args
    return run_record(spec, algo, T, seed, c_star, params)


def _mean_se(values) -> tuple:
    v = np.asarray(values, dtype=float)
    if len(v) < 2:
        return float(v.mean()), math.nan
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(len(v)))


def summarize(records: list, algos: Iterable[str]) -> list:
    """One row per (algo, T), in the order of ``algos`` then increasing T."""
    order = {a: i for i, a in enumerate(algos)}
    groups: dict = {}
    for r in records:
        groups.setdefault((r.algo, r.T), []).append(r)
    rows = []
    for (algo, T) in sorted(groups, key=lambda k: (order.get(k[0], len(order)), k[1])):
        g = groups[(algo, T)]
        m, se = _mean_se([r.regret for r in g])
        gm, gse = _mean_se([r.gap_regret for r in g])
        rows.append([algo, T, m, se, len(g), gm, gse, float(np.mean([r.theta for r in g]))])
    return rows


def sweep(config, out_dir=None, workers: Optional[int] = None, progress=None) -> tuple:
    """Run every (algo, T, replica) of ``config``.

    Replica ``k`` uses seed ``seed + k`` for every algorithm, so algorithms are
    compared on common random numbers. Returns ``(records, summary_rows)``;
    with ``out_dir`` also writes ``replicas.csv`` and ``summary.csv``.
    """
    sw = config.sweep
    c_star = solve_c_star(config.env)
    jobs = [(config.env, algo, T, sw.seed + k, c_star, config.params(algo))
            for algo in sw.algos for T in sw.T for k in range(sw.replicas_for(algo))]
    workers = sw.workers if workers is None else workers
    t0 = time.perf_counter()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_job, jobs, chunksize=4))
    else:
        records = []
        for j in jobs:
            records.append(_job(j))
            if progress is not None:
                progress(len(records), len(jobs), time.perf_counter() - t0)
    order = {a: i for i, a in enumerate(sw.algos)}
    records.sort(key=lambda r: (order[r.algo], r.T, r.seed))
    rows = summarize(records, sw.algos)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / "replicas.csv", REPLICA_COLUMNS, [r.row() for r in records])
        write_csv(out / "summary.csv", SUMMARY_COLUMNS, rows)
    return records, rows


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ("nan" if math.isnan(v) else str(v))
    return v


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def emit_decision_map(traj: Trajectory, spec: EnvironmentSpec, c_star: float, path) -> tuple:
    """Write the accept/reject map of a run and the suboptimal region.

    ``path`` receives rows ``t,x,accepted``; a sibling file ``<stem>_region.csv``
    receives ``x,suboptimal`` on a grid of 200 durations over [0, C], where
    ``suboptimal`` flags r(x) < c* x. Returns both paths.
    """
    path = Path(path)
    region = path.with_name(path.stem + "_region.csv")
    write_csv(path, ("t", "x", "accepted"),
              zip(traj.arrival.tolist(), traj.duration.tolist(), traj.accepted.tolist()))
    if spec.is_discrete:
        grid = np.asarray(spec.duration.points, dtype=float)
    else:
        grid = np.linspace(0.0, spec.C, REGION_POINTS)
    bad = np.asarray(spec.reward(grid)) < c_star * grid
    write_csv(region, ("x", "suboptimal"), zip(grid.tolist(), bad.tolist()))
    return path, region
