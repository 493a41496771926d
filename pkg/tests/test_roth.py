from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gowers_lab.constructions import behrend_set
from gowers_lab.progressions import count_aps_integers, find_3ap
from gowers_lab.roth import (
    BelowFloor,
    IncrementConfig,
    Progression,
    ThreeAPFound,
    dirichlet,
    find_increment,
    rescale,
    run_increment_loop,
    step_budget,
)


def test_rescale_examples():
    assert rescale({2, 4, 6}, Progression(1, 1, 6), 10) == {1, 3, 5}
    assert rescale({3, 5, 7}, Progression(1, 2, 5), 11) == {1, 2, 3}
    with pytest.raises(ValueError):
        rescale({1}, Progression(5, 3, 4), 10)


@given(st.sets(st.integers(1, 40)), st.integers(0, 10), st.integers(1, 6), st.integers(1, 40))
def test_rescale_preserves_3aps(S, a, q, length):
    P = Progression(a, q, length)
    if not P.inside(40):
        return
    inside = {x for x in S if x in set(P.elements())}
    assert count_aps_integers(rescale(S, P, 40), 3) == count_aps_integers(inside, 3)


@given(st.integers(0, 10**6), st.integers(1, 10**6), st.integers(1, 2000))
def test_dirichlet(num, den, Q):
    q, p = dirichlet(num, den, Q)
    assert 1 <= q <= Q
    assert abs(Fraction(q * num, den) - p) <= Fraction(1, Q + 1)


def test_find_increment_on_behrend():
    A = behrend_set(1000)
    cfg = IncrementConfig()
    step, A2 = find_increment(A, 1000, cfg)
    P = step.progression
    alpha = Fraction(len(A), 1000)
    recount = sum(1 for x in P.elements() if x in A)
    assert recount == step.new_size == len(A2)
    assert Fraction(recount, P.length) >= alpha + Fraction(1, 8) * alpha**2
    assert step.coefficient >= 0.5 * float(alpha) ** 2 - 1e-9
    assert step.q <= int(1000**0.5) and step.drift <= Fraction(1, 31)
    assert step.phase_variation <= Fraction(1, 10)


def test_find_increment_preconditions():
    with pytest.raises(ThreeAPFound) as info:
        find_increment(range(1, 101), 100)
    assert info.value.witness == (1, 2, 3)
    with pytest.raises(ThreeAPFound) as info:
        find_increment(range(1, 101, 2), 100)
    assert info.value.witness == (1, 3, 5)
    with pytest.raises(BelowFloor):
        find_increment({1}, 4)


def check_trace(A, N, trace, cfg):
    S, n = set(A), N
    for step in trace.steps:
        assert step.N == n and step.size == len(S)
        P = step.progression
        assert P.inside(n) and P.length < n
        assert P.length >= cfg.c_len * float(step.density) ** 2 * n**0.5 - 1
        assert step.new_density >= step.density + Fraction(cfg.c_inc) * step.density**2 - Fraction(1, 10**12)
        assert max(abs(Fraction(step.xi * (x - P.a - P.q), step.M) - round(Fraction(step.xi * (x - P.a - P.q), step.M))) for x in P.elements()) <= cfg.phase_budget
        S2 = rescale(S, P, n)
        if n <= 2000:
            inside = {x for x in S if x in set(P.elements())}
            assert count_aps_integers(S2, 3) == count_aps_integers(inside, 3)
        assert len(S2) == step.new_size
        S, n = S2, P.length
    assert (trace.final_N, trace.final_size) == (n, len(S))


def test_loop_on_behrend():
    A = behrend_set(3000)
    cfg = IncrementConfig()
    tr = run_increment_loop(A, 3000, cfg)
    assert len(tr.steps) >= 1 and tr.final_exit in ("length_floor", "small_density")
    assert len(tr.steps) <= step_budget(len(A) / 3000, cfg)
    d = tr.densities
    assert all(b > a for a, b in zip(d, d[1:]))
    check_trace(A, 3000, tr, cfg)


def test_loop_exits():
    assert run_increment_loop({1}, 1).final_exit in ("small_density", "length_floor")
    assert run_increment_loop(set(), 50).final_exit == "small_density"
    tr = run_increment_loop({3, 40}, 50, IncrementConfig(density_floor_exponent=0.1))
    assert tr.final_exit == "small_density"


def test_planted_progression_is_reported_in_original_coordinates():
    A = set(behrend_set(3000)) | {1001, 1501, 2001}
    tr = run_increment_loop(A, 3000)
    assert tr.final_exit == "found_3ap"
    x, y, z = tr.witness
    assert {x, y, z} <= A and y - x == z - y > 0


def test_trace_json_is_versioned():
    tr = run_increment_loop(behrend_set(1000), 1000)
    js = tr.to_json()
    assert js["schema"] == "gowers_lab/roth-trace" and js["version"] == 1
    assert js["config"]["phase_budget"] == "1/10"
    assert IncrementConfig.from_json(js["config"]) == IncrementConfig()


def test_config_validation():
    with pytest.raises(ValueError):
        IncrementConfig(c_inc=0)
