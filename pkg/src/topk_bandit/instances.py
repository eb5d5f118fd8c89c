"""Mean-vector families for benchmarks, file ingestion, and the spread diagnostic.

Generators emit means already sorted by rank (index 0 is the best arm).  The
benchmark harness shuffles arm identities per trial so algorithms can never
exploit that ordering.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "gen_two_group",
    "gen_uniform",
    "gen_synthetic_p",
    "load_means",
    "check_c_spread",
]

# Pairwise spread checks are O(n^2); refuse silly input sizes.
_SPREAD_MAX_N = 10_000


def gen_two_group(n: int, K: int) -> np.ndarray:
    """Two plateaus: the top K arms at 0.7, the remaining arms at 0.3."""
    if not 1 <= K <= n:
        raise ValueError(f"K={K} out of range [1, {n}]")
    means = np.full(n, 0.3)
    means[:K] = 0.7
    return means


def gen_uniform(n: int) -> np.ndarray:
    """Evenly spaced means: arm i (1-indexed) has mean 1 - i/n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    i = np.arange(1, n + 1, dtype=np.float64)
    return 1.0 - i / n


def gen_synthetic_p(n: int, K: int, p: float) -> np.ndarray:
    """Power-law family bending arms toward (p > 1) or away from (p < 1) the
    top-K boundary value 1 - K/n.

    Arm i <= K:  (1 - K/n) + (K/n) * (1 - i/K)^p
    Arm i  > K:  (1 - K/n) - ((n-K)/n) * ((i-K)/(n-K))^p

    With p=1 this is exactly the evenly spaced family; endpoints are always
    theta_1 = 1 and theta_n = 0, so the means span [0, 1] with no extra
    normalization.
    """
    if not 1 <= K < n:
        raise ValueError(f"need 1 <= K < n, got K={K}, n={n}")
    if not p > 0:
        raise ValueError("p must be positive")
    boundary = 1.0 - K / n
    i = np.arange(1, n + 1, dtype=np.float64)
    head = boundary + (K / n) * (1.0 - i[:K] / K) ** p
    tail = boundary - ((n - K) / n) * ((i[K:] - K) / (n - K)) ** p
    return np.concatenate([head, tail])


def load_means(path) -> np.ndarray:
    """Read a mean vector from a UTF-8 text file, one decimal per line.

    Lines starting with '#' and blank lines are ignored.  Order is preserved.

    Raises:
        ValueError: on parse failure, a value outside [0, 1], or no values.
        OSError: if the file cannot be read.
    """
    values = []
    with open(os.fspath(path), encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                v = float(line)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: not a decimal literal: {line!r}") from exc
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{path}:{lineno}: value {v} outside [0, 1]")
            values.append(v)
    if not values:
        raise ValueError(f"{path}: no mean values found")
    return np.asarray(values, dtype=np.float64)


def check_c_spread(means: np.ndarray, c: float, tol: float = 1e-9) -> bool:
    """Test whether sorted means form an approximately arithmetic progression.

    True iff |theta_i - theta_j| lies in [|i-j|/(c*n), c*|i-j|/n] for every
    pair i < j.  Comparisons carry a small absolute slack ``tol`` so exact
    progressions computed in floating point (e.g. the evenly spaced family
    with c=1) are not rejected over rounding noise.

    For c == 1 the definition forces an exact progression with step 1/n, so an
    O(n) scan of adjacent pairs plus the global endpoints suffices; general c
    uses the O(n^2) pairwise definition and is guarded to n <= 10^4.

    Raises:
        ValueError: if ``means`` is not sorted non-increasing or c < 1.
    """
    means = np.asarray(means, dtype=np.float64)
    if means.ndim != 1 or means.size == 0:
        raise ValueError("means must be a non-empty 1-D vector")
    if np.any(np.diff(means) > 0):
        raise ValueError("means must be sorted non-increasing")
    if c < 1.0:
        raise ValueError("c must be >= 1")
    n = means.size
    if n == 1:
        return True

    if c == 1.0:
        step = 1.0 / n
        adjacent = -np.diff(means)
        if np.any(np.abs(adjacent - step) > tol):
            return False
        # Adjacent agreement bounds pairwise drift by n*tol; pin the endpoints.
        return abs((means[0] - means[-1]) - (n - 1) * step) <= max(tol, n * tol / 2)

    if n > _SPREAD_MAX_N:
        raise ValueError(f"pairwise spread check limited to n <= {_SPREAD_MAX_N}")
    diffs = means[:, None] - means[None, :]
    idx = np.arange(n, dtype=np.float64)
    dist = np.abs(idx[:, None] - idx[None, :])
    iu = np.triu_indices(n, k=1)
    gap = np.abs(diffs[iu])
    lo = dist[iu] / (c * n) - tol
    hi = c * dist[iu] / n + tol
    return bool(np.all(gap >= lo) and np.all(gap <= hi))
