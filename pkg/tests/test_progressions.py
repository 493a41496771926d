import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gowers_lab.progressions import (
    BudgetExceeded,
    count_aps_cyclic,
    count_aps_integers,
    deviation_bound_check,
    embed_interval,
    find_3ap,
    is_ap_free,
    lambda3_linf_bound_check,
    lambda3_via_fourier,
    lambda_k,
    smallest_admissible_modulus,
)
from gowers_lab.ring import CyclicFunction, Indicator, random_bounded


def lambda_oracle(fs):
    M = fs[0].modulus
    k = len(fs)
    return sum(
        np.prod([fs[i].values[(x + i * y) % M] for i in range(k)]) for x in range(M) for y in range(M)
    ) / M**2


def brute_3aps(S):
    S = set(S)
    return [(x, x + d, x + 2 * d) for x in sorted(S) for d in range(1, max(S, default=0) + 1) if x + d in S and x + 2 * d in S]


@given(st.integers(3, 25), st.integers(3, 5), st.integers(0, 2**31))
def test_lambda_k_matches_double_loop(M, k, seed):
    rng = np.random.default_rng(seed)
    fs = [random_bounded(M, rng) for _ in range(k)]
    assert lambda_k(fs) == pytest.approx(lambda_oracle(fs), abs=1e-12)


@given(st.integers(1, 40).map(lambda m: 2 * m + 1), st.integers(0, 2**31))
def test_fourier_formula_for_lambda3(M, seed):
    rng = np.random.default_rng(seed)
    fs = [random_bounded(M, rng) for _ in range(3)]
    assert lambda3_via_fourier(*fs) == pytest.approx(lambda_k(fs), abs=1e-12)


def test_fourier_formula_needs_odd_modulus():
    f = CyclicFunction.constant(8)
    with pytest.raises(ValueError):
        lambda3_via_fourier(f, f, f)


def test_lambda_k_guards():
    f = CyclicFunction.constant(5)
    with pytest.raises(ValueError):
        lambda_k([f, f])
    with pytest.raises(ValueError):
        lambda_k([f, f, f], k=4)
    big = CyclicFunction.constant(100_003)
    with pytest.raises(BudgetExceeded):
        lambda_k([big] * 3)


def test_constant_one_counts_everything():
    f = CyclicFunction.constant(9)
    assert lambda_k([f] * 4) == pytest.approx(1)


@given(st.integers(2, 30), st.sets(st.integers(0, 29)), st.integers(3, 5))
def test_cyclic_count_matches_enumeration(M, raw, k):
    A = Indicator.from_integers(M, raw)
    mask = A.mask()
    oracle = sum(
        all(mask[(x + i * y) % M] for i in range(k)) for x in range(M) for y in range(1, M)
    )
    assert count_aps_cyclic(A, k) == oracle
    # Trivial progressions add |A|, and the weighted count is the normalised total.
    assert count_aps_cyclic(A, k, nontrivial=False) == oracle + A.size
    assert lambda_k([A.function()] * k) * M * M == pytest.approx(oracle + A.size)


@given(st.sets(st.integers(1, 40), max_size=15))
def test_find_3ap_agrees_with_brute_force(S):
    found = find_3ap(S)
    aps = brute_3aps(S)
    if not aps:
        assert found is None and is_ap_free(S)
    else:
        assert found == min(aps)
    assert count_aps_integers(S, 3) == 2 * len(aps)


def test_is_ap_free_k4():
    assert is_ap_free({1, 2, 3, 5}, 4)
    assert not is_ap_free({1, 4, 7, 10}, 4)


def test_smallest_admissible_modulus():
    assert smallest_admissible_modulus(20, 3) == 21
    assert smallest_admissible_modulus(20, 4) == 23
    assert smallest_admissible_modulus(24, 4) == 25


@given(st.sets(st.integers(1, 20), max_size=12))
def test_embedding_preserves_3aps(S):
    A = embed_interval(S, 20)
    assert A.modulus > 4 * 20 and A.modulus % 2 == 1
    assert count_aps_cyclic(A, 3) == count_aps_integers(S, 3)


def test_embedding_rejects_outside_points():
    with pytest.raises(ValueError):
        embed_interval([0, 3], 10)


@given(st.integers(1, 30).map(lambda m: 2 * m + 1), st.sets(st.integers(0, 60), min_size=1))
def test_deviation_bounds_hold(M, raw):
    A = Indicator.from_integers(M, raw)
    b = deviation_bound_check(A)
    assert b.holds


@given(st.integers(1, 30).map(lambda m: 2 * m + 1), st.integers(0, 2**31))
def test_linf_bound_and_telescoping(M, seed):
    rng = np.random.default_rng(seed)
    fs = [random_bounded(M, rng) for _ in range(3)]
    assert lambda3_linf_bound_check(*fs).holds
    # |Lambda_3(1_A,1_A,1_A) - alpha^3| <= |Lambda_3(1_A,1_A,f_A)|, f_A balanced.
    A = Indicator.from_integers(M, np.flatnonzero(rng.random(M) < 0.4))
    one = A.function()
    lhs = abs(lambda3_via_fourier(one, one, one) - A.density**3)
    rhs = abs(lambda3_via_fourier(one, one, A.balanced()))
    assert lhs <= rhs + 1e-12


def test_linf_bound_rejects_unbounded():
    f = CyclicFunction.constant(5, 2.0)
    with pytest.raises(ValueError):
        lambda3_linf_bound_check(f, f, f)
