"""Round-based adaptive top-K selection with early accept/reject.

The algorithm proceeds in rounds r = 1, 2, ...; in round r every undecided
arm is pulled ceil(4^r * ln(2 n r^2 / delta)) times and fresh empirical means
are formed from this round's pulls alone.  An inner sweep then commits arms
whose empirical distance from the selection boundary exceeds 2 * 2^{-r}:
clearly-high arms are accepted into A, clearly-low arms rejected into B.  The
outer loop stops once the residual boundary uncertainty fits inside the
regret budget, and the remaining slots are filled by the best current
empirical means.

A fixed-budget variant drops the stopping rule and simply runs rounds until
the pull budget is exhausted.

The ``tuned`` flag switches to a gentler geometric schedule (1.01^{-r}) with
a more aggressive commit threshold (one third of the scale instead of twice);
it trades the per-round guarantee for smoother budget growth and is off by
default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .env import EmpiricalState

__all__ = ["RoundRecord", "SelectionResult", "adaptive_topk", "adaptive_topk_fixed_budget"]


@dataclass
class RoundRecord:
    """Telemetry for one pulling round (populated when record_rounds=True)."""

    index: int
    scale: float
    pulls_per_arm: int
    arms: np.ndarray
    means: np.ndarray


@dataclass
class SelectionResult:
    """Outcome of one selection run with full pull accounting.

    Invariants: ``len(selected) == K``; ``accepted_early`` is a subset of
    ``selected``; ``rejected`` is disjoint from ``selected``; ``total_pulls``
    equals the sum of ``per_arm_pulls``.
    """

    selected: set
    total_pulls: int
    per_arm_pulls: np.ndarray
    rounds_completed: int
    accepted_early: set = field(default_factory=set)
    rejected: set = field(default_factory=set)
    rounds: list = None


def _schedule(r: int, tuned: bool) -> float:
    return 1.01 ** (-r) if tuned else 2.0 ** (-r)


def _round_pulls(n: int, r: int, delta: float, tuned: bool) -> int:
    scale = _schedule(r, tuned)
    return math.ceil(math.log(2.0 * n * r * r / delta) / (scale * scale))


class _SortedPool:
    """Undecided arms kept sorted by the current round's empirical means.

    The commit sweep only ever removes an extreme element (the boundary-gap
    maximizer is always at an end of the sorted order), so the pool is a
    shrinking window [lo, hi] over one stable descending sort per round.
    """

    def __init__(self, arm_ids: np.ndarray, means: np.ndarray):
        order = np.argsort(-means, kind="stable")  # ties: lower original position first
        self.ids = arm_ids[order]
        self.vals = means[order]
        self.lo = 0
        self.hi = len(arm_ids) - 1

    def size(self) -> int:
        return self.hi - self.lo + 1

    def surviving(self) -> np.ndarray:
        return self.ids[self.lo : self.hi + 1]

    def top(self, count: int) -> np.ndarray:
        return self.ids[self.lo : self.lo + count]


def _commit_sweep(pool: _SortedPool, k_rem: int, threshold: float, accepted: list, rejected: list) -> int:
    """Run the inner accept/reject loop; returns the updated k_rem.

    One arm is committed per iteration: the arm maximizing
    max(mean_i - boundary_above, boundary_below - mean_i), whenever that
    maximum strictly exceeds ``threshold``.  Boundary positions shift as the
    pool and k_rem shrink, so they are re-read every iteration.
    """
    while k_rem >= 1 and pool.size() > k_rem:
        a_val = pool.vals[pool.lo + k_rem]      # (k_rem + 1)-th largest mean
        b_val = pool.vals[pool.lo + k_rem - 1]  # k_rem-th largest mean
        top_gap = pool.vals[pool.lo] - a_val
        bot_gap = b_val - pool.vals[pool.hi]
        if top_gap <= threshold and bot_gap <= threshold:
            break
        if top_gap >= bot_gap:
            # top element clears the boundary from above: accept
            accepted.append(int(pool.ids[pool.lo]))
            pool.lo += 1
            k_rem -= 1
        else:
            rejected.append(int(pool.ids[pool.hi]))
            pool.hi -= 1
    return k_rem


def _degenerate(env, K: int, epsilon: float):
    """Selections that need no sampling: K in {0, n} or a vacuous tolerance."""
    n = env.n
    if K == 0:
        return set()
    if K == n:
        return set(range(n))
    if epsilon >= 1.0:
        return set(range(K))  # any K arms meet the tolerance for means in [0, 1]
    return None


def _result(env, start_counts, selected, rounds, A, B, records):
    per_arm = env.pull_counts - start_counts
    return SelectionResult(
        selected=set(int(i) for i in selected),
        total_pulls=int(per_arm.sum()),
        per_arm_pulls=per_arm,
        rounds_completed=rounds,
        accepted_early=set(A),
        rejected=set(B),
        rounds=records,
    )


def adaptive_topk(env, K: int, epsilon: float, delta: float, tuned: bool = False,
                  record_rounds: bool = False) -> SelectionResult:
    """Fixed-confidence selection: returns K arms whose aggregate regret is
    at most ``epsilon`` with probability at least 1 - ``delta``.

    Args:
        env: sampling environment (the only reward channel).
        K: number of arms to return, 0 <= K <= env.n.
        epsilon: regret tolerance, > 0.
        delta: failure probability, in (0, 1).
        tuned: use the smoothed schedule (see module docstring).
        record_rounds: attach per-round telemetry to the result.
    """
    n = env.n
    if not 0 <= K <= n:
        raise ValueError(f"K={K} out of range [0, {n}]")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    start = env.pull_counts.copy()
    shortcut = _degenerate(env, K, epsilon)
    if shortcut is not None:
        return _result(env, start, shortcut, 0, set(), set(), [] if record_rounds else None)

    accepted: list = []
    rejected: list = []
    survivors = np.arange(n)
    records = [] if record_rounds else None
    pool = None
    r = 0
    k_rem = K
    # The stopping rule is evaluated with the scale of the round just
    # completed (2^0 = 1 before any round, which always admits epsilon < 2).
    while 2.0 * _schedule(r, tuned) * k_rem > epsilon * K:
        r += 1
        scale = _schedule(r, tuned)
        m = _round_pulls(n, r, delta, tuned)
        sums = env.pull_many(survivors, m)
        means = sums / m
        if records is not None:
            records.append(RoundRecord(r, scale, m, survivors.copy(), means.copy()))
        pool = _SortedPool(survivors, means)
        threshold = scale / 3.0 if tuned else 2.0 * scale
        k_rem = _commit_sweep(pool, k_rem, threshold, accepted, rejected)
        survivors = pool.surviving()
        assert pool.size() + len(accepted) + len(rejected) == n
        if k_rem == 0:
            return _result(env, start, accepted, r, accepted, rejected, records)
        if pool.size() == k_rem:
            # No boundary arm left to compare against: take every survivor.
            return _result(env, start, accepted + list(survivors), r, accepted, rejected, records)

    final = accepted + [int(i) for i in pool.top(k_rem)]
    return _result(env, start, final, r, accepted, rejected, records)


def adaptive_topk_fixed_budget(env, K: int, budget: int, delta: float = 0.01,
                               tuned: bool = False, record_rounds: bool = False) -> SelectionResult:
    """Budget-capped variant: same rounds and commit sweep, no stopping rule.

    Pulls never exceed ``budget``.  When the next round no longer fits, the
    remaining budget is spread uniformly over the surviving arms (the first
    few survivors absorb the remainder), and the open slots are filled by the
    best per-arm means pooled over every pull of the run, so no observation
    is wasted.  A budget below n degrades to single pulls on the first
    ``budget`` arms followed by ranking.

    ``delta`` only shapes the per-round pull counts (default mirrors the
    benchmark protocol); there is no confidence guarantee in this mode.
    """
    n = env.n
    if not 0 <= K <= n:
        raise ValueError(f"K={K} out of range [0, {n}]")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    start = env.pull_counts.copy()
    if K in (0, n):
        return _result(env, start, set(range(n)) if K == n else set(), 0, set(), set(),
                       [] if record_rounds else None)

    state = EmpiricalState.zeros(n)
    if budget < n:
        # Documented degradation: not even one sweep fits.
        head = np.arange(budget)
        state.add_many(head, 1, env.pull_many(head, 1))
        order = np.argsort(-np.nan_to_num(state.means(), nan=-1.0), kind="stable")
        return _result(env, start, order[:K], 0, set(), set(), [] if record_rounds else None)

    accepted: list = []
    rejected: list = []
    survivors = np.arange(n)
    records = [] if record_rounds else None
    remaining = budget
    r = 0
    k_rem = K
    while True:
        r += 1
        m = _round_pulls(n, r, delta, tuned)
        cost = m * len(survivors)
        if cost > remaining:
            q, extra = divmod(remaining, len(survivors))
            if q:
                state.add_many(survivors, q, env.pull_many(survivors, q))
            if extra:
                state.add_many(survivors[:extra], 1, env.pull_many(survivors[:extra], 1))
            break
        sums = env.pull_many(survivors, m)
        state.add_many(survivors, m, sums)
        remaining -= cost
        means = sums / m
        if records is not None:
            records.append(RoundRecord(r, _schedule(r, tuned), m, survivors.copy(), means.copy()))
        pool = _SortedPool(survivors, means)
        threshold = _schedule(r, tuned) / 3.0 if tuned else 2.0 * _schedule(r, tuned)
        k_rem = _commit_sweep(pool, k_rem, threshold, accepted, rejected)
        survivors = pool.surviving()
        assert pool.size() + len(accepted) + len(rejected) == n
        if k_rem == 0:
            return _result(env, start, accepted, r, accepted, rejected, records)
        if pool.size() == k_rem:
            return _result(env, start, accepted + list(survivors), r, accepted, rejected, records)

    pooled = state.means()[survivors]
    order = np.argsort(-pooled, kind="stable")
    final = accepted + [int(survivors[i]) for i in order[:k_rem]]
    return _result(env, start, final, r - 1, accepted, rejected, records)
