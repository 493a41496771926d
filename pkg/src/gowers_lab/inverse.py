"""The U^2 inverse theorem as a frequency finder, its converse, and the F_p toy inverse problem.

The toy subsystem works with functions phi: Z/pZ -> Z/pZ given as value tables
(or callables) and polynomials given as coefficient tuples (a_0, a_1, ...),
lowest degree first. All of its arithmetic is exact integer arithmetic mod p.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence, Union

import numpy as np

from .ring import BOUND_TOL, CyclicFunction, character, dft, inner_product
from .uniformity import gowers_norm_recursive

TIE_TOL = 1e-12


@dataclass(frozen=True)
class FrequencyFound:
    """Result of the U^2 frequency search.

    ``correlation = |f^(xi)| = |E_x f(x) e_M(-xi x)|``; ``guaranteed`` records
    whether ||f||_{U^2} >= delta, in which case correlation >= delta^2.
    """

    xi: int
    correlation: float
    u2: float
    delta: float
    guaranteed: bool


def _check_bounded(f: CyclicFunction) -> None:
    if not f.is_bounded(BOUND_TOL):
        raise ValueError(f"function is not 1-bounded (sup = {f.sup_norm()})")


def argmax_frequency(f: CyclicFunction, exclude_zero: bool = False) -> tuple[int, float]:
    """Frequency of largest |f^|, smallest xi among (numerical) ties."""
    mags = dft(f).abs()
    if exclude_zero:
        if f.modulus == 1:
            raise ValueError("no nonzero frequencies when M = 1")
        mags = mags.copy()
        mags[0] = -1.0
    top = float(mags.max())
    xi = int(np.flatnonzero(mags >= top - TIE_TOL)[0])
    return xi, float(mags[xi])


def inverse_u2(f: CyclicFunction, delta: float) -> FrequencyFound:
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    _check_bounded(f)
    xi, corr = argmax_frequency(f)
    u2 = gowers_norm_recursive(f, 2).value
    return FrequencyFound(xi, corr, u2, delta, guaranteed=u2 >= delta)


@dataclass(frozen=True)
class ConverseCheck:
    correlation: float
    u2: float

    @property
    def holds(self) -> bool:
        return self.correlation <= self.u2 + 1e-12


def converse_u2_check(f: CyclicFunction, xi: int) -> ConverseCheck:
    """|E_x f(x) e_M(xi x)| next to ||f||_{U^2}; the former never exceeds the latter."""
    _check_bounded(f)
    corr = abs(inner_product(f, character(f.modulus, (-xi) % f.modulus)))
    return ConverseCheck(corr, gowers_norm_recursive(f, 2).value)


# ---------------------------------------------------------------------------
# F_p toy problem

Table = Union[Sequence[int], np.ndarray, Callable[[int], int]]

EXHAUSTIVE_LIMIT = 10**8
SAMPLE_SIZE = 10**5
SAMPLE_SEED = 20240611
_DERIV_BLOCK = 1 << 22


def _table(phi: Table, p: int) -> np.ndarray:
    if callable(phi):
        vals = [int(phi(x)) for x in range(p)]
    else:
        vals = [int(v) for v in phi]
        if len(vals) != p:
            raise ValueError(f"expected {p} values, got {len(vals)}")
    return np.mod(np.array(vals, dtype=np.int64), p)


def poly_eval(coeffs: Sequence[int], x, p: int):
    """Horner evaluation mod p; ``x`` may be an int or an integer array."""
    x = np.mod(np.asarray(x, dtype=np.int64), p)
    acc = np.zeros_like(x)
    for a in reversed(list(coeffs)):
        acc = (acc * x + int(a)) % p
    return acc if acc.ndim else int(acc)


def _trim(coeffs: Sequence[int], p: int) -> tuple[int, ...]:
    out = [int(a) % p for a in coeffs]
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return tuple(out) if out else (0,)


def _sdiff(vals: np.ndarray, h: np.ndarray, p: int) -> np.ndarray:
    """Additive derivative along the last axis for each shift in ``h`` (new leading axis)."""
    n = vals.shape[-1]
    x = np.arange(n, dtype=np.int64)
    shifted = vals[..., (x[None, :] + h[:, None]) % n]
    return np.moveaxis((shifted - vals[..., None, :]) % p, -2, 0)


@dataclass(frozen=True)
class VanishingResult:
    holds: bool
    exhaustive: bool
    checked: int
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.holds


def _exhaustive_vanishing(vals: np.ndarray, p: int, s: int):
    """Return a witness (x, h_1..h_s) with nonzero s-fold derivative, or None."""
    h_all = np.arange(p, dtype=np.int64)

    def walk(arr: np.ndarray, prefix: tuple, depth: int):
        # arr[x] is the derivative along ``prefix``; ``depth`` shifts remain.
        if depth == 0:
            bad = np.flatnonzero(arr)
            return (int(bad[0]), *prefix) if bad.size else None
        if p ** (depth + 1) <= _DERIV_BLOCK:
            full = arr
            for _ in range(depth):
                full = _sdiff(full, h_all, p)
            # full has axes (h_depth, ..., h_1', x); reorder to (h_1', ..., x).
            full = np.moveaxis(full, list(range(depth)), list(range(depth))[::-1])
            bad = np.argwhere(full != 0)
            if bad.size == 0:
                return None
            first = bad[0]
            return (int(first[-1]), *prefix, *(int(v) for v in first[:-1]))
        for h in range(p):
            found = walk(_sdiff(arr, np.array([h]), p)[0], prefix + (h,), depth - 1)
            if found is not None:
                return found
        return None

    return walk(vals, (), s)


def check_vanishing_derivatives(phi: Table, p: int, s: int, seed: int = SAMPLE_SEED,
                                samples: int = SAMPLE_SIZE) -> VanishingResult:
    """Whether every s-fold additive derivative of phi vanishes on Z/pZ.

    Exhaustive while p^(s+1) <= 10^8; otherwise ``samples`` random tuples
    (x, h_1, ..., h_s) drawn with a fixed seed, reported in ``checked``.
    """
    if s < 1:
        raise ValueError("s must be at least 1")
    if p <= s:
        raise ValueError(f"need p > s (p={p}, s={s})")
    vals = _table(phi, p)
    if p ** (s + 1) <= EXHAUSTIVE_LIMIT:
        witness = _exhaustive_vanishing(vals, p, s)
        return VanishingResult(witness is None, True, p ** (s + 1), witness)

    rng = np.random.default_rng(seed)
    pts = rng.integers(0, p, size=(samples, s + 1), dtype=np.int64)
    x, hs = pts[:, 0], pts[:, 1:]
    acc = np.zeros(samples, dtype=np.int64)
    for omega in itertools.product((0, 1), repeat=s):
        w = np.array(omega, dtype=np.int64)
        sign = -1 if (s - int(w.sum())) % 2 else 1
        acc = (acc + sign * vals[(x + hs @ w) % p]) % p
    bad = np.flatnonzero(acc)
    witness = tuple(int(v) for v in pts[bad[0]]) if bad.size else None
    return VanishingResult(witness is None, False, samples, witness)


def iterated_derivative(phi: Table, p: int, point: Sequence[int]) -> int:
    """partial_{h_1} ... partial_{h_s} phi(x) for point = (x, h_1, ..., h_s)."""
    vals = _table(phi, p)
    x, hs = int(point[0]), [int(h) for h in point[1:]]
    total = 0
    for omega in itertools.product((0, 1), repeat=len(hs)):
        sign = -1 if (len(hs) - sum(omega)) % 2 else 1
        total += sign * int(vals[(x + sum(w * h for w, h in zip(omega, hs))) % p])
    return total % p


@lru_cache(maxsize=None)
def power_sum_coeffs(k: int) -> tuple[Fraction, ...]:
    """Rational coefficients of S_k(m) = sum_{n=0}^{m-1} n^k, a degree k+1 polynomial in m.

    From m^(k+1) = sum_{j=0}^{k} C(k+1, j) S_j(m) (telescoping (n+1)^(k+1) - n^(k+1)).
    """
    target = [Fraction(0)] * (k + 2)
    target[k + 1] = Fraction(1)
    for j in range(k):
        c = math.comb(k + 1, j)
        for i, a in enumerate(power_sum_coeffs(j)):
            target[i] -= c * a
    return tuple(a / (k + 1) for a in target)


def _frac_mod(a: Fraction, p: int) -> int:
    den = a.denominator % p
    if den == 0:
        raise ValueError(f"denominator {a.denominator} not invertible mod {p}")
    return a.numerator * pow(den, -1, p) % p


def integrate_derivative(P1: Sequence[int], phi0: int, p: int) -> tuple[int, ...]:
    """The polynomial Q with Q(0) = phi0 and Q(m+1) - Q(m) = P1(m) for all m.

    Q(m) = phi0 + sum_k b_k S_k(m) where P1 = sum_k b_k n^k and S_k is the
    power-sum polynomial. Needs p > deg P1 + 2 so that every denominator is a unit.
    """
    P1 = _trim(P1, p)
    deg = len(P1) - 1
    if p <= deg + 2:
        raise ValueError(f"degree {deg} derivative is too high for p={p}")
    out = [0] * (deg + 2)
    out[0] = int(phi0) % p
    for k, b in enumerate(P1):
        if b == 0:
            continue
        for i, a in enumerate(power_sum_coeffs(k)):
            out[i] = (out[i] + b * _frac_mod(a, p)) % p
    return _trim(out, p)


class ReconstructionError(ValueError):
    pass


def _reconstruct(vals: np.ndarray, p: int, s: int) -> tuple[int, ...]:
    """Integrate the unit-step derivative repeatedly (induction on s)."""
    if s == 0:
        if np.any(vals != vals[0]):
            raise ReconstructionError("function is not constant")
        return (int(vals[0]),)
    step = (np.roll(vals, -1) - vals) % p
    return integrate_derivative(_reconstruct(step, p, s - 1), int(vals[0]), p)


def reconstruct_polynomial(phi: Table, p: int, s: int, verify_cocycle: bool | None = None) -> tuple[int, ...]:
    """Coefficients (a_0, ..., a_s) of the polynomial equal to phi on Z/pZ.

    phi must have vanishing (s+1)-fold derivatives; a false precondition shows
    up as a mismatch and raises ReconstructionError. For p <= 31 the cocycle
    identity of the derivatives is also verified on the full grid.
    """
    if s < 0:
        raise ValueError("s must be nonnegative")
    if p <= s + 1:
        raise ValueError(f"need p > s + 1 (p={p}, s={s})")
    vals = _table(phi, p)
    coeffs = _reconstruct(vals, p, s)
    if np.any(poly_eval(coeffs, np.arange(p), p) != vals):
        raise ReconstructionError("reconstructed polynomial disagrees with phi")
    if verify_cocycle is None:
        verify_cocycle = p <= 31
    if verify_cocycle and s >= 1:
        report = cocycle_check(vals, p, s)
        if not report.ok:
            raise ReconstructionError(f"cocycle verification failed: {report}")
    padded = list(coeffs) + [0] * (s + 1 - len(coeffs))
    return tuple(padded[: s + 1])


@dataclass(frozen=True)
class CocycleReport:
    """Outcome of the derivative-coefficient analysis for one phi.

    ``derivative_coeffs[h]`` are the coefficients a_i(h) of P_h = partial_h phi.
    """

    cocycle: bool
    top_additive: bool
    coeff_degrees_ok: bool
    recovered: bool
    derivative_coeffs: tuple

    @property
    def ok(self) -> bool:
        return self.cocycle and self.top_additive and self.coeff_degrees_ok and self.recovered


def _degree_at_most(vals: np.ndarray, p: int, d: int) -> bool:
    """Whether h -> vals[h] agrees with a polynomial of degree <= d (finite differences)."""
    arr = vals.copy()
    for _ in range(d + 1):
        arr = (np.roll(arr, -1) - arr) % p
    return not np.any(arr)


def cocycle_check(phi: Table, p: int, s: int) -> CocycleReport:
    """Verify the derivative cocycle and the coefficient bootstrapping for phi of degree <= s.

    Each P_h = partial_h phi is reconstructed as a polynomial of degree <= s-1.
    Then, exhaustively over x, h, k:

    * P_{h+k}(x) = P_k(x+h) + P_h(x), evaluating the reconstructed polynomials;
    * the top coefficient a_{s-1}(h) is additive in h;
    * each a_i(h) is a polynomial of degree <= s - i in h;
    * phi(x) = phi(0) - P_{-x}(x).
    """
    if s < 1:
        raise ValueError("s must be at least 1")
    vals = _table(phi, p)
    x = np.arange(p, dtype=np.int64)
    polys = []
    for h in range(p):
        P_h = _reconstruct((np.roll(vals, -h) - vals) % p, p, s - 1)
        polys.append(list(P_h) + [0] * (s - len(P_h)))
    coeffs = np.array(polys, dtype=np.int64)  # coeffs[h, i] = a_i(h)
    table = np.stack([poly_eval(c, x, p) for c in coeffs])  # table[h, x] = P_h(x)

    hk = (x[:, None] + x[None, :]) % p
    lhs = table[hk]  # [h, k, x] -> P_{h+k}(x)
    shifted = table[:, (x[None, :] + x[:, None]) % p]  # [k, h, x] -> P_k(x+h)
    rhs = (np.transpose(shifted, (1, 0, 2)) + table[:, None, :]) % p
    cocycle = bool(np.array_equal(lhs, rhs))

    top = coeffs[:, s - 1]
    top_additive = bool(np.array_equal(top[hk], (top[:, None] + top[None, :]) % p))
    degrees = all(_degree_at_most(coeffs[:, i], p, s - i) for i in range(s))
    recovered = bool(np.array_equal((vals[0] - table[(-x) % p, x]) % p, vals))
    return CocycleReport(cocycle, top_additive, degrees, recovered,
                         tuple(tuple(int(a) for a in row) for row in coeffs))
