"""Gowers uniformity norms on Z/MZ and on intervals [N]."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .parallel import ordered_map
from .progressions import smallest_admissible_modulus
from .ring import BOUND_TOL, CyclicFunction, _check_same_modulus

IMAG_TOL = 1e-9
NAIVE_BUDGET = 1 << 30
_BATCH_ELEMENTS = 1 << 20


class BudgetExceeded(ValueError):
    pass


@dataclass(frozen=True)
class GowersReport:
    s: int
    value: float
    method: str
    cost: int

    def to_json(self) -> dict:
        return {"s": self.s, "value": self.value, "method": self.method, "cost": self.cost}


def mult_derivative(f: CyclicFunction, h: int) -> CyclicFunction:
    """Delta_h f(x) = f(x) * conj(f(x + h))."""
    return CyclicFunction(f.values * np.conj(f.shift(h).values))


def _popcount(w: int) -> int:
    return bin(w).count("1")


def _cube_average(funcs: Sequence[np.ndarray], s: int) -> complex:
    """E_{x,h_1..h_s} prod_w C^{|w|} f_w(x + w.h), straight from the definition.

    ``funcs[w]`` is the function at vertex w of {0,1}^s (bit i of w is w_i);
    C is complex conjugation. The first s-1 differences are looped over and the
    last one is vectorised together with x.
    """
    M = funcs[0].shape[0]
    vals = [np.conj(v) if _popcount(w) % 2 else v for w, v in enumerate(funcs)]
    x = np.arange(M, dtype=np.int64)[None, :]
    hs = np.arange(M, dtype=np.int64)[:, None]
    half = 1 << (s - 1)
    total = 0j
    for prefix in itertools.product(range(M), repeat=s - 1):
        prod = np.ones((M, M), dtype=np.complex128)
        for w in range(half):
            offset = sum(prefix[i] for i in range(s - 1) if (w >> i) & 1)
            base = (x + offset) % M
            prod *= vals[w][base]
            prod *= vals[w | half][(base + hs) % M]
        total += prod.sum()
    return total / M ** (s + 1)


def _root(avg: complex, s: int, scale: float) -> float:
    if abs(avg.imag) > IMAG_TOL * max(1.0, scale):
        raise ArithmeticError(f"cube average has imaginary part {avg.imag:.3e}")
    return max(avg.real, 0.0) ** (1.0 / 2**s)


def gowers_norm_naive(f: CyclicFunction, s: int, budget: int = NAIVE_BUDGET) -> GowersReport:
    """||f||_{U^s} by enumerating every (x, h_1, ..., h_s); O(2^s M^(s+1))."""
    if s < 1:
        raise ValueError("s must be at least 1")
    M = f.modulus
    if s == 1:
        return GowersReport(1, abs(f.mean()), "naive", M)
    cost = 2**s * M ** (s + 1)
    if cost > budget:
        raise BudgetExceeded(f"naive U^{s} at M={M} needs {cost} products (budget {budget})")
    avg = _cube_average([f.values] * 2**s, s)
    scale = f.sup_norm() ** (2**s)
    return GowersReport(s, _root(avg, s, scale), "naive", cost)


def _u2_fourth_powers(rows: np.ndarray) -> np.ndarray:
    """Row-wise ||.||_{U^2}^4 = sum_xi |f^(xi)|^4."""
    M = rows.shape[-1]
    spec = np.fft.fft(rows, axis=-1) / M
    a2 = (spec * np.conj(spec)).real
    return np.sum(a2 * a2, axis=-1)


def _power_rows(rows: np.ndarray, s: int, counter: list) -> np.ndarray:
    """Row-wise ||.||_{U^s}^(2^s) via E_h ||Delta_h f||_{U^(s-1)}^(2^(s-1)), s >= 2."""
    B, M = rows.shape
    if s == 2:
        counter[0] += B * (M * max(1, math.ceil(math.log2(M))) + M)
        return _u2_fourth_powers(rows)
    chunk = max(1, _BATCH_ELEMENTS // (B * M))
    acc = np.zeros(B, dtype=np.float64)
    for start in range(0, M, chunk):
        acc += _derivative_block(rows, range(start, min(M, start + chunk)), s, counter)
    return acc / M


def _derivative_block(rows: np.ndarray, hs: range, s: int, counter: list) -> np.ndarray:
    """sum over h in hs of ||Delta_h row||^(2^(s-1)), per row."""
    B, M = rows.shape
    x = np.arange(M, dtype=np.int64)
    idx = (x[None, :] + np.asarray(hs, dtype=np.int64)[:, None]) % M
    deriv = rows[:, None, :] * np.conj(rows[:, idx])
    counter[0] += deriv.size
    sub = _power_rows(deriv.reshape(B * len(hs), M), s - 1, counter)
    return sub.reshape(B, len(hs)).sum(axis=1)


def gowers_norm_recursive(f: CyclicFunction, s: int, threads: int | None = None) -> GowersReport:
    """||f||_{U^s} via the derivative recursion, bottoming out in the FFT identity for U^2.

    Derivatives are formed a block of shifts at a time, so memory stays at
    O(block * M). The outermost shift loop runs in parallel over fixed blocks.
    """
    if s < 2:
        raise ValueError("the recursive evaluator needs s >= 2")
    M = f.modulus
    rows = f.values[None, :]
    if s == 2:
        counter = [0]
        power = float(_power_rows(rows, 2, counter)[0])
        return GowersReport(2, max(power, 0.0) ** 0.25, "recursive", counter[0])

    chunk = max(1, _BATCH_ELEMENTS // M // M ** max(0, s - 3))
    blocks = [range(a, min(M, a + chunk)) for a in range(0, M, chunk)]

    def work(hs: range):
        counter = [0]
        part = float(_derivative_block(rows, hs, s, counter)[0])
        return part, counter[0]

    results = ordered_map(work, blocks, threads)
    power = math.fsum(r[0] for r in results) / M
    cost = sum(r[1] for r in results)
    return GowersReport(s, max(power, 0.0) ** (1.0 / 2**s), "recursive", cost)


def gowers_norm(f: CyclicFunction, s: int, method: str = "auto", threads: int | None = None) -> GowersReport:
    if method == "naive" or (method == "auto" and s == 1):
        return gowers_norm_naive(f, s)
    if method in ("recursive", "auto"):
        return gowers_norm_recursive(f, s, threads=threads)
    raise ValueError(f"unknown method {method!r}")


def interval_modulus(N: int, s: int) -> int:
    """Smallest M > 2^s N with gcd(M, s!) = 1."""
    return smallest_admissible_modulus(2**s * N, s + 1)


def _interval_values(f, N: int) -> np.ndarray:
    if isinstance(f, CyclicFunction):
        vals = f.values
        if vals.shape[0] <= N:
            raise ValueError(f"modulus {vals.shape[0]} cannot hold [1, {N}]")
        outside = np.concatenate([vals[:1], vals[N + 1:]])
        if np.any(outside != 0):
            raise ValueError(f"function is not supported on [1, {N}]")
        return vals[1:N + 1]
    vals = np.asarray(f, dtype=np.complex128).reshape(-1)
    if vals.shape[0] != N:
        raise ValueError(f"expected the {N} values f(1), ..., f(N)")
    return vals


def gowers_norm_interval(f, N: int, s: int, M: int | None = None, threads: int | None = None) -> float:
    """||f||_{U^s[N]} = ||f||_{U^s(Z/MZ)} / ||1_[N]||_{U^s(Z/MZ)} for any M > 2^s N.

    ``f`` is either the sequence f(1), ..., f(N) or a CyclicFunction vanishing
    off the residues 1..N.
    """
    vals = _interval_values(f, N)
    if M is None:
        M = interval_modulus(N, s)
    elif M <= 2**s * N:
        raise ValueError(f"M must exceed 2^s N = {2**s * N}")
    embedded = np.zeros(M, dtype=np.complex128)
    embedded[1:N + 1] = vals
    box = np.zeros(M, dtype=np.complex128)
    box[1:N + 1] = 1.0
    if s == 1:
        return abs(vals.sum()) / N
    num = gowers_norm_recursive(CyclicFunction(embedded), s, threads).value
    den = gowers_norm_recursive(CyclicFunction(box), s, threads).value
    return num / den


@dataclass(frozen=True)
class GCSCheck:
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 1e-9


def gcs_check(fs: Sequence[CyclicFunction], s: int) -> GCSCheck:
    """Both sides of the Gowers-Cauchy-Schwarz inequality.

    ``fs[w]`` sits at vertex w of {0,1}^s (bit i of w is w_i) and is conjugated
    when |w| is odd, so equal inputs give lhs = rhs = ||f||^(2^s).
    """
    if s < 1:
        raise ValueError("s must be at least 1")
    fs = list(fs)
    if len(fs) != 2**s:
        raise ValueError(f"need {2**s} functions for s={s}, got {len(fs)}")
    _check_same_modulus(*fs)
    for f in fs:
        if not f.is_bounded(BOUND_TOL):
            raise ValueError("gcs_check expects 1-bounded functions")
    if s == 1:
        lhs = abs(fs[0].mean() * np.conj(fs[1].mean()))
    else:
        lhs = abs(_cube_average([f.values for f in fs], s))
    rhs = 1.0
    for f in fs:
        rhs *= gowers_norm_naive(f, s).value
    return GCSCheck(float(lhs), float(rhs))
