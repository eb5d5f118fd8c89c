"""Coin-distinguishing machinery: hard instances, the reduction, exact errors.

A biased coin shows heads with probability 0.5 + eta or 0.5 - eta; the task
is to name the bias, with the escape hatch of answering "unknown" at most 90%
of the time.  ``optimal_coin_error`` evaluates the error of the best possible
symmetric threshold strategy exactly, in log space, so its exponential decay
in the toss count is measurable without approximation.

``make_hard_instance`` embeds one such coin in a bandit with n/2 high arms
and n/2 low arms separated by 2 * eta; ``reduction_run`` drives any top-K
selection algorithm on that bandit and converts its output into a coin answer
(with give-up and verification safeguards), which is how the selection
problem inherits the coin problem's difficulty.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .env import ArmEnvironment, Instance

__all__ = [
    "Hidden",
    "CoinTossingInstance",
    "HardBanditInstance",
    "make_hard_instance",
    "optimal_coin_error",
    "optimal_coin_log_error",
    "reduction_run",
    "GIVE_UP_RATE_CAP",
    "DEFAULT_C_K",
]

# The strategy may answer "unknown" with probability at most this much.
GIVE_UP_RATE_CAP = 0.9
# Smallest product epsilon * K the reduction accepts (the slack terms in its
# verification threshold need it).
DEFAULT_C_K = 4.0


class Hidden(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"


@dataclass(frozen=True)
class CoinTossingInstance:
    """A coin of bias 0.5 + eta or 0.5 - eta, tossed through a seeded stream."""

    eta: float
    hidden_value: Hidden
    seed: int

    def __post_init__(self):
        if not 0.0 < self.eta < 0.5:
            raise ValueError("eta must lie in (0, 0.5)")

    @property
    def bias(self) -> float:
        sign = 1.0 if self.hidden_value is Hidden.PLUS else -1.0
        return 0.5 + sign * self.eta


@dataclass(frozen=True)
class HardBanditInstance:
    """A planted two-level bandit with one arm replaced by the hidden coin.

    Of the n arms, the K = n/2 in ``planted`` have mean 0.5 + eta and the
    rest 0.5 - eta, except that arm ``special_index`` takes the coin's value;
    the realized number of high arms is therefore K - 1, K, or K + 1.
    """

    n: int
    K: int
    eta: float
    planted: frozenset
    special_index: int
    coin: CoinTossingInstance

    def means(self) -> np.ndarray:
        out = np.where(np.isin(np.arange(self.n), list(self.planted)),
                       0.5 + self.eta, 0.5 - self.eta)
        out[self.special_index] = self.coin.bias
        return out

    def high_arm_count(self) -> int:
        return int(np.sum(self.means() > 0.5))


def make_hard_instance(n: int, eta: float, seed: int, hidden: Hidden = None) -> HardBanditInstance:
    """Draw the planted set, the special index, and (optionally) the coin value.

    Args:
        n: even number of arms, >= 2.
        eta: bias magnitude in (0, 0.5).
        seed: drives the planted set, the index choice, and the coin draw.
        hidden: fix the coin's value instead of drawing it (useful in tests).
    """
    if n < 2 or n % 2 != 0:
        raise ValueError("n must be even and >= 2")
    if not 0.0 < eta < 0.5:
        raise ValueError("eta must lie in (0, 0.5)")
    K = n // 2
    rng = np.random.default_rng(np.random.SeedSequence((int(seed), 0x51ED)))
    planted = frozenset(int(a) for a in rng.choice(n, size=K, replace=False))
    special = int(rng.integers(n))
    if hidden is None:
        hidden = Hidden.PLUS if rng.integers(2) == 1 else Hidden.MINUS
    coin = CoinTossingInstance(eta=eta, hidden_value=hidden, seed=int(seed))
    return HardBanditInstance(n=n, K=K, eta=eta, planted=planted,
                              special_index=special, coin=coin)


def _binomial_logpmf(m: int, p: float) -> np.ndarray:
    k = np.arange(m + 1, dtype=np.float64)
    return (gammaln(m + 1) - gammaln(k + 1) - gammaln(m - k + 1)
            + k * math.log(p) + (m - k) * math.log1p(-p))


def _coin_threshold(m: int, eta: float):
    """Widest symmetric give-up window [m/2 - t, m/2 + t] covering <= 0.9.

    Returns (t, logpmf) where t = -1 means even the t = 0 window exceeds the
    cap and the strategy never answers "unknown".  The window mass grows by
    at most two probability terms per unit of t, accumulated incrementally
    with Kahan-compensated summation, so the scan is O(m) overall.
    """
    logpmf = _binomial_logpmf(m, 0.5 - eta)
    pmf = np.exp(logpmf)
    center = 0.5 * m

    total = 0.0
    comp = 0.0

    def add(x: float) -> None:
        nonlocal total, comp
        y = x - comp
        s = total + y
        comp = (s - total) - y
        total = s

    def bounds(t: int):
        return math.ceil(center - t), math.floor(center + t)

    lo, hi = bounds(0)
    for idx in range(max(lo, 0), min(hi, m) + 1):
        add(float(pmf[idx]))
    if total > GIVE_UP_RATE_CAP:
        return -1, logpmf
    t = 0
    while t + 1 <= m:
        new_lo, new_hi = bounds(t + 1)
        for idx in range(max(new_lo, 0), lo):
            add(float(pmf[idx]))
        for idx in range(hi + 1, min(new_hi, m) + 1):
            add(float(pmf[idx]))
        if total > GIVE_UP_RATE_CAP:
            break
        t += 1
        lo, hi = max(new_lo, 0), min(new_hi, m)
    return t, logpmf


def optimal_coin_log_error(m: int, eta: float) -> float:
    """Natural log of the optimal strategy's error probability for m tosses.

    The optimal strategy answers "unknown" inside the widest symmetric window
    whose mass stays within the give-up cap and names the bias by side
    otherwise; its error is the far-tail mass beyond the window, computed
    here as an exact log-space binomial tail (returns -inf when the tail is
    empty).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if not 0.0 < eta < 0.5:
        raise ValueError("eta must lie in (0, 0.5)")
    t, logpmf = _coin_threshold(m, eta)
    hi = math.floor(0.5 * m + t)
    if hi + 1 > m:
        return float("-inf")
    return float(logsumexp(logpmf[hi + 1 :]))


def optimal_coin_error(m: int, eta: float) -> float:
    """Exact error probability of the optimal strategy (may underflow to 0.0
    for very large m; use :func:`optimal_coin_log_error` for the decay law).
    """
    return float(math.exp(min(optimal_coin_log_error(m, eta), 0.0)))


class _GiveUp(Exception):
    """Raised when the watched arm's toss budget is exceeded."""


class _CapWatchdog:
    """Environment proxy that aborts the run when one arm is pulled too often."""

    def __init__(self, inner, watched_arm: int, cap: int):
        self._inner = inner
        self._arm = int(watched_arm)
        self._cap = int(cap)
        self.instance = inner.instance

    @property
    def n(self) -> int:
        return self._inner.n

    @property
    def pull_counts(self) -> np.ndarray:
        return self._inner.pull_counts

    def _check(self, extra: int) -> None:
        if self._inner.pull_counts[self._arm] + extra > self._cap:
            raise _GiveUp

    def pull_batch(self, arm: int, m: int) -> int:
        if int(arm) == self._arm:
            self._check(int(m))
        return self._inner.pull_batch(arm, m)

    def pull_many(self, arms, m: int):
        arms = np.asarray(arms, dtype=np.intp)
        if np.any(arms == self._arm):
            self._check(int(m))
        return self._inner.pull_many(arms, m)

    def total_pulls(self) -> int:
        return self._inner.total_pulls()

    def spawn_rng(self):
        return self._inner.spawn_rng()


def reduction_run(algorithm, n: int, K: int, eta: float, epsilon: float, C: int,
                  seed: int, c_k: float = DEFAULT_C_K) -> str:
    """Answer the coin question by running a top-K selection on a hard bandit.

    The selection algorithm (a callable ``algorithm(env, K, epsilon, delta)``
    returning a result with a ``selected`` set) is run at the scaled-down
    tolerance eta * epsilon / 4 and failure probability 0.1.  The run gives
    up when the special arm is tossed more than 20 * C / n times; afterwards
    the selection is verified against the known values of the constructed
    arms, and only a verified selection is converted into an answer by
    membership of the special arm.

    Returns:
        "plus", "minus", or "unknown".
    """
    if K * 2 != n:
        raise ValueError("the hard construction requires K = n / 2")
    if epsilon * K < c_k:
        raise ValueError(f"need epsilon * K >= {c_k} (got {epsilon * K})")
    if C < 0:
        raise ValueError("pull cap C must be non-negative")
    hard = make_hard_instance(n, eta, seed)
    eps_prime = eta * epsilon / 4.0
    env = ArmEnvironment(Instance(hard.means(), K, eps_prime, 0.1),
                         seed=np.random.SeedSequence((int(seed), 0xC01)))
    cap = math.floor(20.0 * C / n)
    watched = _CapWatchdog(env, hard.special_index, cap)
    try:
        result = algorithm(watched, K, eps_prime, 0.1)
    except _GiveUp:
        return "unknown"
    selected = set(int(a) for a in result.selected)

    known = [a for a in selected if a != hard.special_index]
    if not known:
        return "unknown"
    high = sum(1 for a in known if a in hard.planted)
    rho = (high * (0.5 + eta) + (len(known) - high) * (0.5 - eta)) / len(known)
    if rho < (0.5 + eta) - (eps_prime + 2.0 * eta / K):
        return "unknown"
    return "plus" if hard.special_index in selected else "minus"
