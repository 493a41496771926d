import cmath
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gowers_lab.ring import (
    CyclicFunction,
    Indicator,
    Spectrum,
    character,
    dft,
    e,
    e_M,
    inner_product,
    inverse_dft,
    norm,
    random_bounded,
)

moduli = st.integers(min_value=1, max_value=60)


def dft_oracle(values):
    M = len(values)
    return [sum(values[x] * cmath.exp(-2j * cmath.pi * xi * x / M) for x in range(M)) / M for xi in range(M)]


@st.composite
def functions(draw, max_M=40):
    M = draw(st.integers(min_value=1, max_value=max_M))
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    return random_bounded(M, np.random.default_rng(seed))


def test_e_M_uses_exact_residue():
    M = 7
    assert e_M(10**12 + 3, M) == pytest.approx(e_M((10**12 + 3) % M, M))
    assert e_M(-1, M) == pytest.approx(np.exp(-2j * np.pi / M))
    assert e(0.25) == pytest.approx(1j)


@given(functions())
def test_dft_matches_definition(f):
    assert np.allclose(dft(f).coeffs, dft_oracle(list(f.values)), atol=1e-12)


@given(functions())
def test_fft_and_naive_agree(f):
    assert np.allclose(dft(f, "fft").coeffs, dft(f, "naive").coeffs, atol=1e-12)


@given(functions())
def test_inversion_and_parseval(f):
    S = dft(f)
    assert inverse_dft(S).allclose(f, atol=1e-12)
    assert inverse_dft(S, "naive").allclose(f, atol=1e-12)
    assert norm(f, 2) == pytest.approx(norm(S, 2, kind="l"), abs=1e-12)


@given(functions(), st.integers(-100, 100))
def test_character_coefficient(f, xi):
    M = f.modulus
    # f^(xi) = <f, e_M(xi .)>
    assert dft(f)[xi] == pytest.approx(inner_product(f, character(M, xi % M)), abs=1e-12)


def test_spectrum_of_character_is_delta():
    S = dft(character(12, 5))
    expected = np.zeros(12)
    expected[5] = 1
    assert np.allclose(S.abs(), expected, atol=1e-12)
    assert S.max_nonzero() == pytest.approx(1.0)


def test_shift_direction():
    f = CyclicFunction(np.arange(5, dtype=float))
    assert list(f.shift(2).values.real) == [2, 3, 4, 0, 1]
    assert f(7) == 2


def test_arithmetic_and_modulus_mismatch():
    f = CyclicFunction.constant(4, 2.0)
    g = CyclicFunction(np.arange(4, dtype=float))
    assert list((f * g - 1).values.real) == [-1, 1, 3, 5]
    assert list((1 - g).values.real) == [1, 0, -1, -2]
    with pytest.raises(ValueError):
        f + CyclicFunction.zeros(5)


def test_norms():
    f = CyclicFunction(np.array([3.0, -4.0, 0.0, 0.0]))
    assert norm(f, 1) == pytest.approx(7 / 4)
    assert norm(f, 2) == pytest.approx((25 / 4) ** 0.5)
    assert norm(f, np.inf) == 4
    assert norm(f.values, 1, kind="l") == 7
    with pytest.raises(ValueError):
        norm(f, 0.5)


@pytest.mark.parametrize("kind", ["disk", "phase", "real"])
def test_random_bounded_is_bounded(kind, rng):
    f = random_bounded(257, rng, kind)
    assert f.is_bounded()
    if kind == "phase":
        assert np.allclose(np.abs(f.values), 1)


def test_indicator_validation_and_density():
    A = Indicator.from_integers(10, [1, 11, 3, -7])
    assert A.subset == frozenset({1, 3})
    assert A.size == 2 and A.density == 0.2
    assert A.balanced().mean() == pytest.approx(0)
    with pytest.raises(ValueError):
        Indicator(5, frozenset({5}))


def test_json_round_trips():
    f = CyclicFunction(np.array([1, 1j, -1, 0.5 - 0.5j]))
    g = CyclicFunction.from_json(json.loads(json.dumps(f.to_json())))
    assert g.allclose(f, atol=0)
    A = Indicator(6, frozenset({0, 4}))
    assert Indicator.from_json(json.loads(json.dumps(A.to_json()))) == A
    assert CyclicFunction.from_json(A.to_json()).allclose(A.function())


def test_spectrum_indexing_wraps():
    S = Spectrum(np.arange(5, dtype=complex))
    assert S[-1] == 4 and S[7] == 2
