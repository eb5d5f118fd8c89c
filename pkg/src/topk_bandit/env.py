"""Seeded stochastic arm environments with exact pull accounting.

Every algorithm in this package observes rewards exclusively through an
:class:`ArmEnvironment`.  Rewards are Bernoulli; a batch of ``m`` pulls of one
arm is drawn as a single Binomial(m, theta) sample, which is distributionally
identical to ``m`` independent Bernoulli draws and keeps multi-million-pull
simulations fast.  Two environments built from the same (instance, seed) and
issued the same sequence of pull requests return bit-identical reward sums.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "RewardKind",
    "Instance",
    "ArmEnvironment",
    "ComplementEnvironment",
    "EmpiricalState",
]


class RewardKind(Enum):
    """Reward families an environment can emit.  Only Bernoulli is supported."""

    BERNOULLI = "bernoulli"


@dataclass(frozen=True)
class Instance:
    """Ground-truth selection task: arm means plus (K, epsilon, delta).

    The mean vector is stored in input order (not necessarily sorted) and is
    the hidden truth against which regret is judged.

    Args:
        means: Per-arm success probabilities, each in [0, 1].
        K: Number of arms to select, 1 <= K <= len(means).
        epsilon: Regret tolerance, > 0.
        delta: Failure probability budget, in (0, 1).
    """

    means: np.ndarray
    K: int
    epsilon: float
    delta: float

    def __post_init__(self):
        means = np.asarray(self.means, dtype=np.float64).copy()
        if means.ndim != 1 or means.size == 0:
            raise ValueError("means must be a non-empty 1-D vector")
        if np.any(means < 0.0) or np.any(means > 1.0):
            raise ValueError("every mean must lie in [0, 1]")
        if not 1 <= self.K <= means.size:
            raise ValueError(f"K={self.K} out of range [1, {means.size}]")
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        means.flags.writeable = False
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "K", int(self.K))

    @property
    def n(self) -> int:
        return self.means.size

    def sorted_means(self) -> np.ndarray:
        """Means sorted non-increasing (a copy)."""
        return np.sort(self.means)[::-1].copy()


class ArmEnvironment:
    """Stateful seeded sampler; the only reward channel algorithms may use.

    Maintains exact per-arm pull counters.  Algorithmic randomness (e.g. a
    uniform choice among candidate arms) should come from :meth:`spawn_rng`
    so it never perturbs the reward stream.

    Not thread-safe: one environment per concurrent run.
    """

    def __init__(self, instance: Instance, seed, reward_kind: RewardKind = RewardKind.BERNOULLI):
        if reward_kind is not RewardKind.BERNOULLI:
            raise ValueError(f"unsupported reward kind: {reward_kind}")
        self.instance = instance
        self.seed = seed
        self.reward_kind = reward_kind
        root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))
        reward_ss, algo_ss = root.spawn(2)
        self._rng = np.random.default_rng(reward_ss)
        self._algo_ss = algo_ss
        self.pull_counts = np.zeros(instance.n, dtype=np.int64)

    @property
    def n(self) -> int:
        return self.instance.n

    def pull_batch(self, arm: int, m: int) -> int:
        """Pull one arm ``m`` times; returns the integer sum of rewards.

        Raises:
            IndexError: arm index out of range.
            ValueError: m < 1.
        """
        arm = int(arm)
        if not 0 <= arm < self.n:
            raise IndexError(f"arm {arm} out of range [0, {self.n})")
        m = int(m)
        if m < 1:
            raise ValueError("batch size m must be >= 1")
        reward = int(self._rng.binomial(m, self.instance.means[arm]))
        self.pull_counts[arm] += m
        return reward

    def pull_many(self, arms: np.ndarray, m: int) -> np.ndarray:
        """Pull each arm in ``arms`` exactly ``m`` times (one vectorized request).

        Returns the per-arm reward sums aligned with ``arms``.
        """
        arms = np.asarray(arms, dtype=np.intp)
        if arms.size == 0:
            return np.zeros(0, dtype=np.int64)
        if arms.min() < 0 or arms.max() >= self.n:
            raise IndexError("arm index out of range")
        m = int(m)
        if m < 1:
            raise ValueError("batch size m must be >= 1")
        sums = self._rng.binomial(m, self.instance.means[arms]).astype(np.int64)
        np.add.at(self.pull_counts, arms, m)
        return sums

    def total_pulls(self) -> int:
        """Exact total number of reward draws requested so far."""
        return int(self.pull_counts.sum())

    def spawn_rng(self) -> np.random.Generator:
        """Fresh deterministic generator for algorithm-internal choices."""
        return np.random.default_rng(self._algo_ss.spawn(1)[0])


class ComplementEnvironment:
    """View of an environment with rewards flipped (x -> 1 - x).

    Pulling arm i here is distributed as Bernoulli(1 - theta_i); counters are
    shared with the wrapped environment, so pull accounting stays exact.  Used
    to reduce top-K selection with K > n/2 to bottom-(n-K) selection.
    """

    def __init__(self, inner):
        self._inner = inner
        comp = 1.0 - inner.instance.means
        self.instance = Instance(comp, inner.instance.K, inner.instance.epsilon, inner.instance.delta)

    @property
    def n(self) -> int:
        return self._inner.n

    @property
    def pull_counts(self) -> np.ndarray:
        return self._inner.pull_counts

    def pull_batch(self, arm: int, m: int) -> int:
        return int(m) - self._inner.pull_batch(arm, m)

    def pull_many(self, arms: np.ndarray, m: int) -> np.ndarray:
        return int(m) - self._inner.pull_many(arms, m)

    def total_pulls(self) -> int:
        return self._inner.total_pulls()

    def spawn_rng(self) -> np.random.Generator:
        return self._inner.spawn_rng()


@dataclass
class EmpiricalState:
    """Per-arm observation tallies: counts and reward sums.

    The empirical mean of arm i is sums[i] / counts[i], defined only when
    counts[i] > 0.  For Bernoulli rewards sums[i] <= counts[i] always.
    """

    counts: np.ndarray
    sums: np.ndarray

    @classmethod
    def zeros(cls, n: int) -> "EmpiricalState":
        return cls(np.zeros(n, dtype=np.int64), np.zeros(n, dtype=np.float64))

    def add(self, arm: int, m: int, reward_sum) -> None:
        self.counts[arm] += m
        self.sums[arm] += reward_sum

    def add_many(self, arms: np.ndarray, m: int, reward_sums: np.ndarray) -> None:
        np.add.at(self.counts, arms, m)
        np.add.at(self.sums, arms, reward_sums)

    def mean(self, arm: int) -> float:
        if self.counts[arm] == 0:
            raise ValueError(f"arm {arm} has no observations")
        return float(self.sums[arm] / self.counts[arm])

    def means(self) -> np.ndarray:
        """Empirical means, NaN where an arm has no observations."""
        with np.errstate(invalid="ignore", divide="ignore"):
            out = self.sums / self.counts
        return out
