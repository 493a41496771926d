import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gowers_lab.nilseq import (
    HeisenbergElement,
    Nilsequence,
    PolySequence,
    binom,
    bracket_nilsequence,
    bracket_phase,
    commutator,
    cutoff_mismatches,
    heisenberg_filtration,
    heisenberg_reduce,
    is_polynomial_map,
    poly_sequence_eval,
    smooth_cutoff,
    smoothed_bracket_nilsequence,
    standard_filtration,
    weyl_diagnostic,
)
from gowers_lab.ring import e

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=30)
H = st.builds(HeisenbergElement, rationals, rationals, rationals)


@given(H, H)
def test_law_matches_matrix_product(a, b):
    assert np.allclose((a * b).matrix(), a.matrix() @ b.matrix())


@given(H, H, H)
def test_group_axioms_exact(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * a.inverse() == HeisenbergElement.identity()
    assert a * HeisenbergElement.identity() == a


@given(H, st.integers(-6, 6))
def test_power_formula(a, n):
    out = HeisenbergElement.identity()
    step = a if n >= 0 else a.inverse()
    for _ in range(abs(n)):
        out = out * step
    assert a**n == out


def test_binomial_extension():
    assert [binom(n, 2) for n in (-2, -1, 0, 1, 4)] == [3, 1, 0, 0, 6]
    assert binom(5, 0) == 1


def test_reduce_example():
    r = heisenberg_reduce(HeisenbergElement(1.25, 2.5, 3.75))
    assert r.rep == HeisenbergElement(0.25, 0.5, 0.25)
    assert r.gamma.is_integral()
    assert r.rep * r.gamma == HeisenbergElement(1.25, 2.5, 3.75)


@given(H)
def test_reduce_exact_on_rationals(g):
    r = heisenberg_reduce(g)
    assert r.rep * r.gamma == g
    assert all(0 <= t < 1 for t in r.rep.entries())
    assert all(isinstance(t, int) or t.denominator == 1 for t in r.gamma.entries())
    assert heisenberg_reduce(r.rep).rep == r.rep


def test_reduce_lattice_point_and_float_edges():
    assert heisenberg_reduce(HeisenbergElement(3, -2, 7)).rep == HeisenbergElement(0, 0, 0)
    r = heisenberg_reduce(HeisenbergElement(-1e-17, 0.5, -1e-17))
    assert all(0 <= t < 1 for t in r.rep.entries())


def test_reduce_random_floats(rng):
    for v in rng.uniform(-1000, 1000, size=(2000, 3)):
        g = HeisenbergElement(*v)
        r = heisenberg_reduce(g)
        assert (r.rep * r.gamma).close(g, 1e-9)
        assert r.gamma.is_integral(1e-9)
        assert heisenberg_reduce(r.rep).rep.close(r.rep, 1e-9)


def test_filtration_spot_check(rng):
    F = heisenberg_filtration()
    assert F.spot_check(rng, 50)
    a = HeisenbergElement(Fraction(1, 3), Fraction(2), 0)
    b = HeisenbergElement(Fraction(5), Fraction(-1, 7), 1)
    c = commutator(a, b)
    assert F.contains(2, c) and commutator(a, c) == HeisenbergElement.identity()
    assert standard_filtration(2, 3).spot_check(rng, 10)


def test_poly_sequence_examples():
    F = heisenberg_filtration()
    al, be, c = Fraction(1, 3), Fraction(2, 5), Fraction(1, 7)
    p = PolySequence(F, (HeisenbergElement(1, 2, 3), HeisenbergElement(al, be, 0), HeisenbergElement(0, 0, c)))
    assert p(0) == HeisenbergElement(1, 2, 3)
    for n in (-3, 5):
        v = poly_sequence_eval(p, n)
        assert v.x == 1 + al * n and v.y == 2 + be * n
    trivial = PolySequence(F, (HeisenbergElement(),) * 3)
    assert trivial(17) == HeisenbergElement()
    with pytest.raises(ValueError):
        PolySequence(F, (HeisenbergElement(), HeisenbergElement(), HeisenbergElement(1, 0, 0)))


def test_every_poly_sequence_is_a_polynomial_map(rng):
    F = heisenberg_filtration()
    for _ in range(5):
        a, b, c, d, z = (Fraction(int(v), 7) for v in rng.integers(-20, 20, size=5))
        p = PolySequence(F, (HeisenbergElement(a, b, z), HeisenbergElement(c, d, a), HeisenbergElement(0, 0, b)))
        assert is_polynomial_map(p, F).holds


def test_polynomial_map_examples():
    F = heisenberg_filtration()
    al, be, ga = Fraction(1, 3), Fraction(2, 7), Fraction(5, 11)
    assert is_polynomial_map(lambda n: HeisenbergElement(al * n, be * n, ga * n * n), F).holds
    bad = is_polynomial_map(lambda n: HeisenbergElement(0.3 * n, 0.2 * n, math.exp(n)), F)
    assert not bad.holds and bad.witness[0] == 3
    # A cubic central term is a polynomial map only for a longer filtration.
    cubic = is_polynomial_map(lambda n: HeisenbergElement(0, 0, Fraction(n**3)), F)
    assert not cubic.holds
    assert is_polynomial_map(lambda n: HeisenbergElement(1, 2, 3), F, s=5).holds


def test_torus_nilsequence_is_a_character():
    F = standard_filtration(1, 1)
    xi = Fraction(3, 10)
    ns = Nilsequence(PolySequence(F, ((0,), (xi,))), lambda t: e(t[0]), 2 * math.pi)
    for n in range(-5, 30):
        assert ns(n) == pytest.approx(np.exp(2j * np.pi * float(xi) * n))


def test_bracket_phase_values():
    assert all(bracket_phase(10, n) == 1 for n in range(10))
    assert bracket_phase(10, 23) == pytest.approx(np.exp(2j * np.pi * 0.4))
    with pytest.raises(ValueError):
        bracket_phase(0, 1)


def test_bracket_dual_path():
    ns = bracket_nilsequence(10)
    for n in range(1001):
        assert abs(ns(n) - bracket_phase(10, n)) <= 1e-9
    ns7 = bracket_nilsequence(7)
    assert max(abs(ns7(n) - bracket_phase(7, n)) for n in range(-50, 200)) <= 1e-9


def test_cutoff():
    rho = smooth_cutoff()
    assert rho(0) == 0 and rho(1) == 0 and rho(0.5) == 1
    assert rho.lipschitz == pytest.approx(1e6)
    with pytest.raises(ValueError):
        smooth_cutoff(0.5)


def test_smoothed_bracket_agreement():
    L, M = 10, 1000
    h = smoothed_bracket_nilsequence(L)
    diff = sum(abs(h(n) - bracket_phase(L, n)) > 1e-12 for n in range(1, M + 1))
    assert diff == cutoff_mismatches(L, M) == M // L
    wide = smooth_cutoff(0.25)
    assert cutoff_mismatches(8, 80, 0.25) == 10 * sum(1 for j in range(8) if wide(Fraction(j, 8)) != 1)


def test_declared_lipschitz_bound(rng):
    h = smoothed_bracket_nilsequence(10, margin=0.05)
    assert h.sampled_lipschitz(rng, 500) <= h.lipschitz


def test_weyl_rational_and_zero():
    w = weyl_diagnostic([0, Fraction(3, 7)], 700, 0.1)
    assert w.q == 7 and w.approx_errors == (0.0,) and abs(w.exp_sum) < 1e-12
    w = weyl_diagnostic([0], 10)
    assert w.exp_sum == 1 and w.q == 1


def test_weyl_irrational_quadratic():
    w = weyl_diagnostic([0, 0, math.sqrt(2)], 10**4, 0.1, q_max=500)
    assert abs(w.exp_sum) <= 0.05


def test_weyl_exact_path_matches_geometric_series():
    a, N = Fraction(2, 9), 50
    z = np.exp(2j * np.pi * float(a))
    expected = z * (1 - z**N) / (1 - z) / N
    assert weyl_diagnostic([0, a], N).exp_sum == pytest.approx(expected, abs=1e-12)
    assert weyl_diagnostic([0, float(a)], N).exp_sum == pytest.approx(expected, abs=1e-9)
