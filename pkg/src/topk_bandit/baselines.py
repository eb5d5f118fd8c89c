"""Comparison algorithms for the benchmark harness.

Both baselines are anytime in the budget: they never request more pulls than
allowed and always return exactly K arms.  The confidence-bound routine is a
stand-in calibrated to mimic accept/reject selectors from the literature, not
a reimplementation of any of them; comparisons against it are qualitative.
"""

from __future__ import annotations

import math

import numpy as np

from .adaptive import SelectionResult
from .env import EmpiricalState

__all__ = ["uniform_topk", "cb_accept_reject_topk"]

# Constant inside the confidence radius sqrt(ln(_CB_C * n * T^2) / (2 m));
# chosen so the union bound over arms and time steps closes.
_CB_C = 4.0


def _check_budget(env, budget: int) -> None:
    if budget < env.n:
        raise ValueError(f"budget {budget} is below one pull per arm (n={env.n})")


def _result(env, start, selected, A=None, B=None) -> SelectionResult:
    per_arm = env.pull_counts - start
    return SelectionResult(
        selected=set(int(i) for i in selected),
        total_pulls=int(per_arm.sum()),
        per_arm_pulls=per_arm,
        rounds_completed=1,
        accepted_early=set(A or ()),
        rejected=set(B or ()),
    )


def uniform_topk(env, K: int, budget: int) -> SelectionResult:
    """Split the budget evenly, then take the K best empirical means."""
    n = env.n
    if not 0 <= K <= n:
        raise ValueError(f"K={K} out of range [0, {n}]")
    _check_budget(env, budget)
    start = env.pull_counts.copy()
    if K in (0, n):
        return _result(env, start, range(n) if K == n else ())
    m = budget // n
    arms = np.arange(n)
    means = env.pull_many(arms, m) / m
    order = np.argsort(-means, kind="stable")
    return _result(env, start, order[:K])


def cb_accept_reject_topk(env, K: int, budget: int) -> SelectionResult:
    """Confidence-bound accept/reject selection under a hard budget.

    After one sweep of single pulls, the routine repeatedly pulls the most
    ambiguous undecided arm (smallest margin between its interval and the
    current boundary between the K-th and (K+1)-th empirical means), doubling
    that arm's pull count each visit.  An arm is accepted once its lower
    bound clears every remaining competitor's upper bound, rejected in the
    mirror case, and the selection is topped up by empirical means when the
    budget runs out.
    """
    n = env.n
    if not 0 <= K <= n:
        raise ValueError(f"K={K} out of range [0, {n}]")
    _check_budget(env, budget)
    start = env.pull_counts.copy()
    if K in (0, n):
        return _result(env, start, range(n) if K == n else ())

    state = EmpiricalState.zeros(n)
    arms = np.arange(n)
    state.add_many(arms, 1, env.pull_many(arms, 1))
    remaining = budget - n

    accepted: set = set()
    rejected: set = set()
    undecided = list(range(n))

    while remaining > 0:
        k_rem = K - len(accepted)
        if k_rem == 0 or len(undecided) <= k_rem:
            break
        u = np.asarray(undecided)
        means = state.sums[u] / state.counts[u]
        T = max(env.total_pulls(), 2)
        radius = np.sqrt(np.log(_CB_C * n * T * T) / (2.0 * state.counts[u]))

        order = np.argsort(-means, kind="stable")
        boundary = 0.5 * (means[order[k_rem - 1]] + means[order[k_rem]])

        # Decide whatever has already separated from the boundary set.
        head = order[:k_rem]
        tail = order[k_rem:]
        lcb = means - radius
        ucb = means + radius
        new_accept = [int(u[i]) for i in head if lcb[i] > ucb[tail].max()]
        new_reject = [int(u[i]) for i in tail if ucb[i] < lcb[head].min()]
        if new_accept or new_reject:
            accepted.update(new_accept)
            rejected.update(new_reject)
            done = set(new_accept) | set(new_reject)
            undecided = [a for a in undecided if a not in done]
            continue

        margins = np.abs(means - boundary) - radius
        x = int(u[int(np.argmin(margins))])
        chunk = int(min(state.counts[x], remaining))
        state.add(x, chunk, env.pull_batch(x, chunk))
        remaining -= chunk

    k_rem = K - len(accepted)
    if k_rem > 0:
        u = np.asarray(undecided)
        means = state.sums[u] / state.counts[u]
        order = np.argsort(-means, kind="stable")
        final = set(accepted) | set(int(u[i]) for i in order[:k_rem])
    else:
        final = set(accepted)
    return _result(env, start, final, accepted, rejected)
