"""Seeded, splittable streams of uniform variates.

A run with seed ``s`` draws from a Philox (counter-based) bit generator keyed
by ``SeedSequence(s)``; replica ``k`` of a sweep seeded with ``s0`` uses seed
``s0 + k``. SeedSequence hashes its entropy, so neighbouring seeds give
independent streams, and every replica can be regenerated in isolation
whatever order replicas are run in.

Each task proposal consumes exactly four variates, in this order:
idle time, duration, noise (first), noise (second). Policies never draw from
the stream, so the proposal sequence of a replica does not depend on the policy
that is being simulated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .env import EnvironmentSpec

VARIATES_PER_PROPOSAL = 4
_TWO53 = float(2 ** 53)


def seeded_generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def open_uniforms(rng: np.random.Generator, shape) -> np.ndarray:
    """Uniforms on the 2**53 grid shifted by half a step: strictly inside (0, 1)."""
    return (rng.integers(0, 2 ** 53, size=shape, dtype=np.int64) + 0.5) / _TWO53


@dataclass
class ProposalBlock:
    """Environment outcomes for a block of consecutive proposals."""

    idle: np.ndarray
    duration: np.ndarray
    mean: np.ndarray
    observed: np.ndarray

    def __len__(self):
        return len(self.idle)


def proposal_blocks(spec: EnvironmentSpec, seed: int, block: int = 4096) -> Iterator[ProposalBlock]:
    """Endless iterator over blocks of (idle, duration, r(duration), Y).

    The observed reward ``Y`` is computed for every proposal, accepted or not,
    so that the variate consumption never depends on decisions.
    """
    rng = seeded_generator(seed)
    while True:
        u = open_uniforms(rng, (block, VARIATES_PER_PROPOSAL))
        idle = -np.log(u[:, 0]) / spec.lam
        dur = np.asarray(spec.duration.sample(u[:, 1]), dtype=float)
        mean = np.asarray(spec.reward(dur), dtype=float)
        obs = mean + spec.noise.sample(u[:, 2], u[:, 3])
        yield ProposalBlock(idle, dur, mean, obs)
