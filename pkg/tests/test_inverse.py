import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gowers_lab.inverse import (
    ReconstructionError,
    argmax_frequency,
    check_vanishing_derivatives,
    cocycle_check,
    converse_u2_check,
    integrate_derivative,
    inverse_u2,
    iterated_derivative,
    poly_eval,
    power_sum_coeffs,
    reconstruct_polynomial,
)
from gowers_lab.ring import CyclicFunction, character, dft, random_bounded
from gowers_lab.uniformity import gowers_norm


@given(st.integers(2, 200), st.integers(0, 2**31))
def test_inverse_u2_guarantee(M, seed):
    f = random_bounded(M, np.random.default_rng(seed))
    u2 = gowers_norm(f, 2).value
    found = inverse_u2(f, max(u2, 1e-12))
    assert found.guaranteed
    assert found.correlation >= found.u2**2 - 1e-12
    assert found.correlation == pytest.approx(abs(dft(f)[found.xi]))


@given(st.integers(2, 200), st.integers(0, 2**31), st.integers(0, 10**6))
def test_converse(M, seed, xi):
    f = random_bounded(M, np.random.default_rng(seed))
    assert converse_u2_check(f, xi % M).holds


def test_inverse_finds_planted_character():
    f = character(64, 11) * 0.5
    found = inverse_u2(f, 0.5)
    assert found.xi == 11 and found.correlation == pytest.approx(0.5)


def test_inverse_rejects_bad_input():
    with pytest.raises(ValueError):
        inverse_u2(CyclicFunction.constant(5, 2.0), 0.5)
    with pytest.raises(ValueError):
        inverse_u2(CyclicFunction.constant(5), 0)


def test_argmax_ties_prefer_smallest():
    f = character(10, 3) + character(10, 7)
    assert argmax_frequency(f * 0.5)[0] == 3
    assert argmax_frequency(CyclicFunction.constant(4), exclude_zero=True)[0] == 1


def test_power_sums_match_direct_sums():
    for k in range(7):
        c = power_sum_coeffs(k)
        for m in range(12):
            assert sum(ci * m**i for i, ci in enumerate(c)) == sum(Fraction(n) ** k for n in range(m))


@given(st.sampled_from([7, 11, 13]), st.lists(st.integers(0, 100), min_size=1, max_size=4), st.integers(0, 100))
def test_integrate_inverts_unit_difference(p, P1, phi0):
    Q = integrate_derivative(P1, phi0, p)
    x = np.arange(p)
    assert poly_eval(Q, 0, p) == phi0 % p
    assert np.array_equal((poly_eval(Q, x + 1, p) - poly_eval(Q, x, p)) % p, poly_eval(P1, x, p))


def test_integrate_needs_large_p():
    with pytest.raises(ValueError):
        integrate_derivative([0, 0, 0, 1], 0, 5)


@given(st.sampled_from([7, 11, 13]), st.integers(0, 4), st.integers(0, 2**31))
def test_reconstruction_recovers_coefficients(p, d, seed):
    rng = np.random.default_rng(seed)
    coeffs = tuple(int(c) for c in rng.integers(0, p, size=d + 1))
    phi = poly_eval(coeffs, np.arange(p), p)
    assert reconstruct_polynomial(phi, p, 4) == coeffs + (0,) * (4 - d)
    assert check_vanishing_derivatives(phi, p, 5).holds


def test_non_polynomial_detected():
    p = 7
    phi = [pow(x, 6, p) for x in range(p)]  # degree 6 > 4
    res = check_vanishing_derivatives(phi, p, 5)
    assert not res.holds and res.exhaustive
    assert iterated_derivative(phi, p, res.witness) != 0
    with pytest.raises(ReconstructionError):
        reconstruct_polynomial(phi, p, 4)


def test_iterated_derivative_of_monomial():
    # The s-fold derivative of x^s is s! h_1 ... h_s.
    p, s = 11, 3
    phi = [pow(x, s, p) for x in range(p)]
    for pt in itertools.product(range(3), repeat=s + 1):
        assert iterated_derivative(phi, p, pt) == 6 * pt[1] * pt[2] * pt[3] % p


def test_sampled_vanishing_path():
    p = 101
    phi = poly_eval([3, 1, 4, 1, 5], np.arange(p), p)
    res = check_vanishing_derivatives(phi, p, 5, samples=2000)
    assert res.holds and not res.exhaustive and res.checked == 2000


def test_cocycle_exhaustive_small_prime():
    p = 13
    rep = cocycle_check(poly_eval([2, 7, 1, 12], np.arange(p), p), p, 3)
    assert rep.ok
    # a_{s-1}(h) is additive: P_h has top coefficient s a_s h.
    assert [c[2] for c in rep.derivative_coeffs][:4] == [3 * 12 * h % p for h in range(4)]


def test_reconstruct_preconditions():
    with pytest.raises(ValueError):
        reconstruct_polynomial([0] * 5, 5, 4)
