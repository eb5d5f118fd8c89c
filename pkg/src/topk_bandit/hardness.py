"""Instance-level mathematics: gaps, exchange allowance, hardness, and regret.

All operations here take a mean vector sorted non-increasing; callers that
hold shuffled means must sort first (stable sort, ties keeping original
order, for deterministic reports).

Conventions:
    * Arm positions in this module are 0-based ranks into the sorted vector.
    * The boundary gap index K+t+1 can exceed n on extreme instances; it is
      clamped to n and the clamp is recorded on the report.
    * A zero gap contributes the capped term, never infinity.

The uncapped sum of inverse-square gaps (without the tolerance cap) is a
classical difficulty measure for exact selection; it is deliberately not an
operation here because it blows up on tied means, which the capped variants
are designed to tolerate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "HardnessReport",
    "gaps",
    "t_of",
    "psi_quantities",
    "hardness",
    "aggregate_regret",
    "is_eps_top_k",
]


@dataclass(frozen=True)
class HardnessReport:
    """Gap vector and the derived difficulty quantities for one instance.

    ``index_clamped`` is True when the tail boundary index K+t+1 exceeded n
    and was clamped to n (a corner the definitions leave open).
    """

    gaps: np.ndarray
    t: int
    psi_t: float
    psi_t_eps: float
    h_t_eps: float
    h_0_eps: float
    index_clamped: bool

    def to_dict(self) -> dict:
        return {
            "gaps": [float(g) for g in self.gaps],
            "t": self.t,
            "psi_t": self.psi_t,
            "psi_t_eps": self.psi_t_eps,
            "h_t_eps": self.h_t_eps,
            "h_0_eps": self.h_0_eps,
            "index_clamped": self.index_clamped,
        }


def _require_sorted(means: np.ndarray) -> np.ndarray:
    means = np.asarray(means, dtype=np.float64)
    if means.ndim != 1 or means.size == 0:
        raise ValueError("means must be a non-empty 1-D vector")
    if np.any(np.diff(means) > 0):
        raise ValueError("means must be sorted non-increasing")
    return means


def _require_k(means: np.ndarray, K: int) -> None:
    if not 1 <= K < means.size:
        raise ValueError(f"need 1 <= K < n; got K={K}, n={means.size}")


def gaps(means: np.ndarray, K: int) -> np.ndarray:
    """Distance of each arm's mean from the top-K boundary.

    For rank i (1-indexed): theta_i - theta_{K+1} when i <= K, else
    theta_K - theta_i.  Requires K < n so the boundary values exist.
    """
    means = _require_sorted(means)
    _require_k(means, K)
    out = np.empty_like(means)
    out[:K] = means[:K] - means[K]
    out[K:] = means[K - 1] - means[K:]
    return out


def _t_conditions(gap: np.ndarray, K: int, epsilon: float, t: int) -> bool:
    """Both exchange-budget inequalities for a candidate t (tail index clamped)."""
    n = gap.size
    head = gap[K - t - 1] * t  # gap of rank K-t (1-indexed)
    tail_rank = min(K + t + 1, n)
    tail = gap[tail_rank - 1] * t
    budget = K * epsilon
    return head <= budget and tail <= budget


def t_of(means: np.ndarray, K: int, epsilon: float) -> int:
    """Largest t in {0, ..., K-1} whose head and tail exchange budgets hold.

    t = 0 always qualifies (both products vanish), so the result is total.
    """
    means = _require_sorted(means)
    _require_k(means, K)
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    gap = gaps(means, K)
    best = 0
    for t in range(1, K):
        if _t_conditions(gap, K, epsilon, t):
            best = t
    return best


def psi_quantities(means: np.ndarray, K: int, epsilon: float):
    """Boundary-gap floor and its epsilon cap: (psi_t, max(epsilon, psi_t))."""
    means = _require_sorted(means)
    _require_k(means, K)
    gap = gaps(means, K)
    t = t_of(means, K, epsilon)
    tail_rank = min(K + t + 1, means.size)
    psi_t = min(float(gap[K - t - 1]), float(gap[tail_rank - 1]))
    return psi_t, max(float(epsilon), psi_t)


def hardness(means: np.ndarray, K: int, epsilon: float) -> HardnessReport:
    """Full difficulty report: gaps, t, psi quantities, and both capped sums.

    The sums run left to right in rank order with scalar arithmetic so that
    independent re-evaluations of the same formulas agree bit-for-bit.
    """
    means = _require_sorted(means)
    _require_k(means, K)
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    gap = gaps(means, K)
    t = t_of(means, K, epsilon)
    tail_rank = min(K + t + 1, means.size)
    clamped = (K + t + 1) > means.size
    psi_t = min(float(gap[K - t - 1]), float(gap[tail_rank - 1]))
    psi_eps = max(float(epsilon), psi_t)

    cap_t = 1.0 / (psi_eps * psi_eps)
    cap_0 = 1.0 / (float(epsilon) * float(epsilon))
    h_t = 0.0
    h_0 = 0.0
    for g in gap:
        g = float(g)
        if g > 0.0:
            inv = 1.0 / (g * g)
            h_t += min(inv, cap_t)
            h_0 += min(inv, cap_0)
        else:
            h_t += cap_t
            h_0 += cap_0
    return HardnessReport(gap, t, psi_t, psi_eps, h_t, h_0, clamped)


def aggregate_regret(means: np.ndarray, K: int, selected) -> float:
    """Average shortfall of a selected K-set versus the true best K arms.

    ``selected`` holds 0-based ranks into the sorted mean vector; it must
    contain exactly K distinct ranks.  The result is clamped at 0 to absorb
    floating-point dust on perfect selections.
    """
    means = _require_sorted(means)
    sel = np.asarray(sorted(int(i) for i in selected), dtype=np.intp)
    if sel.size != K:
        raise ValueError(f"selected set has size {sel.size}, expected K={K}")
    if np.unique(sel).size != sel.size:
        raise ValueError("selected set contains duplicate ranks")
    if sel.size and (sel.min() < 0 or sel.max() >= means.size):
        raise ValueError("selected rank out of range")
    shortfall = (math.fsum(means[:K]) - math.fsum(means[sel])) / K
    return max(0.0, shortfall)


def is_eps_top_k(means: np.ndarray, K: int, epsilon: float, selected) -> bool:
    """True when the selection's aggregate regret is within tolerance.

    The boundary is inclusive: regret exactly equal to epsilon counts as a
    success (boundary cases are measure-zero in simulation anyway).
    """
    return aggregate_regret(means, K, selected) <= epsilon
