import math

import numpy as np
import pytest
from scipy.special import gammaln

from topk_bandit.adaptive import SelectionResult, adaptive_topk
from topk_bandit.hardness import hardness
from topk_bandit.lowerbound import (
    GIVE_UP_RATE_CAP,
    Hidden,
    _coin_threshold,
    make_hard_instance,
    optimal_coin_error,
    optimal_coin_log_error,
    reduction_run,
)


class TestOptimalCoinError:
    def test_single_toss_exact_value(self):
        # t=0; the strategy errs exactly when the low coin shows a head.
        for eta in (0.05, 0.1, 0.3):
            assert optimal_coin_error(1, eta) == pytest.approx(0.5 - eta)

    def test_threshold_is_maximal(self):
        for m in (10, 100, 555, 2000):
            t, logpmf = _coin_threshold(m, 0.1)
            pmf = np.exp(logpmf)

            def window(tt):
                lo, hi = math.ceil(0.5 * m - tt), math.floor(0.5 * m + tt)
                return float(math.fsum(pmf[lo : hi + 1])) if lo <= hi else 0.0

            assert window(t) <= GIVE_UP_RATE_CAP
            assert window(t + 1) > GIVE_UP_RATE_CAP

    def test_monotone_decay(self):
        assert optimal_coin_error(400, 0.1) < optimal_coin_error(100, 0.1)
        errs = [optimal_coin_error(m, 0.1) for m in (100, 200, 400, 800, 1600)]
        assert all(a > b for a, b in zip(errs, errs[1:]))

    def test_symmetry_between_hidden_values(self):
        # Error seen from the high coin equals the low-coin tail by k <-> m-k.
        for m in (17, 64, 301):
            t, logpmf_low = _coin_threshold(m, 0.1)
            hi = math.floor(0.5 * m + t)
            lo = math.ceil(0.5 * m - t)
            k = np.arange(m + 1, dtype=np.float64)
            logpmf_high = (gammaln(m + 1) - gammaln(k + 1) - gammaln(m - k + 1)
                           + k * math.log(0.5 + 0.1) + (m - k) * math.log(0.5 - 0.1))
            err_low = math.fsum(np.exp(logpmf_low[hi + 1 :]))
            err_high = math.fsum(np.exp(logpmf_high[:lo]))
            assert err_low == pytest.approx(err_high, rel=1e-12)

    def test_log_space_survives_large_m(self):
        log_err = optimal_coin_log_error(10**6, 0.1)
        assert log_err < -10_000  # far below float underflow in linear space
        assert optimal_coin_error(10**6, 0.1) == 0.0  # documented underflow

    def test_log_error_roughly_linear_in_m(self):
        ms = np.array([100, 200, 400, 800, 1600], dtype=float)
        ys = np.array([optimal_coin_log_error(int(m), 0.1) for m in ms])
        A = np.vstack([ms, np.ones_like(ms)]).T
        coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
        resid = ys - A @ coef
        r2 = 1 - float(resid @ resid) / float(((ys - ys.mean()) ** 2).sum())
        assert coef[0] < 0
        assert r2 >= 0.99

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            optimal_coin_error(0, 0.1)
        with pytest.raises(ValueError):
            optimal_coin_error(10, 0.5)


class TestHardInstance:
    def test_odd_n_rejected(self):
        with pytest.raises(ValueError):
            make_hard_instance(5, 0.1, 0)

    def test_two_arm_case_means(self):
        seen = set()
        for seed in range(40):
            hard = make_hard_instance(2, 0.1, seed, hidden=Hidden.PLUS)
            ms = tuple(sorted(hard.means()))
            if hard.special_index in hard.planted:
                assert ms == (0.4, 0.6)
            else:
                assert ms == (0.6, 0.6)
            seen.add(hard.special_index in hard.planted)
        assert seen == {True, False}

    def test_high_arm_count_case_analysis(self):
        for seed in range(60):
            hard = make_hard_instance(10, 0.1, seed)
            in_planted = hard.special_index in hard.planted
            plus = hard.coin.hidden_value is Hidden.PLUS
            expected = {(True, True): 5, (True, False): 4, (False, True): 6, (False, False): 5}
            assert hard.high_arm_count() == expected[(in_planted, plus)]

    def test_difficulty_scales_like_n_over_eta_sq(self):
        # At tolerance eta the capped sum stays within small constants of
        # n / eta^2 across all three realized configurations.
        n, eta = 40, 0.1
        for seed in range(30):
            hard = make_hard_instance(n, eta, seed)
            sm = np.sort(hard.means())[::-1]
            ratio = hardness(sm, n // 2, eta).h_t_eps / (n / eta**2)
            assert 1 / 10 <= ratio <= 2


def _fixed_answer_algorithm(selection):
    def algo(env, K, eps, delta):
        return SelectionResult(selected=set(selection), total_pulls=0,
                               per_arm_pulls=np.zeros(env.n, dtype=np.int64),
                               rounds_completed=0)
    return algo


class TestReductionRun:
    def test_oracle_selection_follows_membership_rule(self):
        for seed in range(30):
            hard = make_hard_instance(8, 0.1, seed)
            answer = reduction_run(_fixed_answer_algorithm(hard.planted),
                                   8, 4, 0.1, 1.0, C=10**6, seed=seed)
            expected = "plus" if hard.special_index in hard.planted else "minus"
            assert answer == expected

    def test_zero_cap_gives_up_immediately(self):
        def greedy(env, K, eps, delta):
            env.pull_many(np.arange(env.n), 1)  # touches the watched arm
            return _fixed_answer_algorithm(range(K))(env, K, eps, delta)

        assert reduction_run(greedy, 8, 4, 0.1, 1.0, C=0, seed=0) == "unknown"

    def test_contaminated_selection_fails_verification(self):
        for seed in range(20):
            hard = make_hard_instance(12, 0.1, seed)
            worst = sorted(set(range(12)) - hard.planted)[:6]
            assert reduction_run(_fixed_answer_algorithm(worst),
                                 12, 6, 0.1, 1.0, C=10**6, seed=seed) == "unknown"

    def test_adaptive_reduction_smoke(self):
        outcomes = {"plus": 0, "minus": 0, "unknown": 0}
        correct = definite = 0
        for seed in range(60):
            hard = make_hard_instance(40, 0.1, seed)
            ans = reduction_run(lambda e, K, eps, d: adaptive_topk(e, K, eps, d),
                                40, 20, 0.1, 0.2, C=160_000_000, seed=seed)
            outcomes[ans] += 1
            if ans != "unknown":
                definite += 1
                correct += ans == hard.coin.hidden_value.value
        assert outcomes["unknown"] / 60 <= GIVE_UP_RATE_CAP
        assert definite > 0 and correct / definite >= 0.85

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            reduction_run(_fixed_answer_algorithm([0]), 9, 4, 0.1, 1.0, 10, 0)
        with pytest.raises(ValueError):
            reduction_run(_fixed_answer_algorithm([0]), 8, 4, 0.1, 0.5, 10, 0)  # eps*K < 4
