"""Weighted k-AP counts Lambda_k, the Fourier formula for Lambda_3, and bound checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .ring import BOUND_TOL, CyclicFunction, Indicator, _check_same_modulus, dft

DIRECT_BUDGET_M = 10**5

# Cap on elements materialised per vectorised block of (y, x) pairs.
_BLOCK_ELEMENTS = 1 << 21


class BudgetExceeded(ValueError):
    pass


def lambda_k(fs: Sequence[CyclicFunction], k: int | None = None, force: bool = False) -> complex:
    """E_{x,y} f_0(x) f_1(x+y) ... f_{k-1}(x+(k-1)y) by direct enumeration.

    Trivial progressions (y = 0) are included. Cost is O(k M^2); moduli above
    ``DIRECT_BUDGET_M`` are rejected unless ``force`` is set.
    """
    fs = list(fs)
    if k is None:
        k = len(fs)
    if k < 3:
        raise ValueError(f"k must be at least 3, got {k}")
    if len(fs) != k:
        raise ValueError(f"expected {k} functions, got {len(fs)}")
    M = _check_same_modulus(*fs)
    if M > DIRECT_BUDGET_M and not force:
        raise BudgetExceeded(f"M={M} exceeds the direct-count budget {DIRECT_BUDGET_M}")

    x = np.arange(M, dtype=np.int64)
    block = max(1, _BLOCK_ELEMENTS // M)
    partials = []
    for start in range(0, M, block):
        y = np.arange(start, min(M, start + block), dtype=np.int64)[:, None]
        prod = np.broadcast_to(fs[0].values, (y.shape[0], M)).copy()
        for i in range(1, k):
            prod *= fs[i].values[(x + i * y) % M]
        partials.append(prod.sum())
    return complex(np.sum(partials) / (M * M))


def lambda3_via_fourier(f: CyclicFunction, g: CyclicFunction, h: CyclicFunction) -> complex:
    """Lambda_3(f, g, h) = sum_xi f^(xi) g^(-2 xi) h^(xi), for odd M."""
    M = _check_same_modulus(f, g, h)
    if M % 2 == 0:
        raise ValueError("the Fourier formula for Lambda_3 needs odd M")
    F, G, H = dft(f).coeffs, dft(g).coeffs, dft(h).coeffs
    xi = np.arange(M, dtype=np.int64)
    return complex(np.sum(F * G[(-2 * xi) % M] * H))


def count_aps_cyclic(A: Indicator, k: int, nontrivial: bool = True) -> int:
    """Number of pairs (x, y) in Z/MZ with x, x+y, ..., x+(k-1)y all in A.

    Enumerates pairs of the first two terms, so the cost is O(|A|^2 k).
    """
    M = A.modulus
    mask = A.mask()
    elems = np.array(sorted(A.subset), dtype=np.int64)
    if elems.size == 0:
        return 0
    total = 0
    block = max(1, _BLOCK_ELEMENTS // max(1, elems.size))
    for start in range(0, elems.size, block):
        x = elems[start:start + block, None]
        y = (elems[None, :] - x) % M
        ok = np.ones(y.shape, dtype=bool)
        for i in range(2, k):
            ok &= mask[(x + i * y) % M]
        if nontrivial:
            ok &= y != 0
        total += int(ok.sum())
    return total


def count_aps_integers(A: Iterable[int], k: int) -> int:
    """Number of nontrivial k-APs in a set of integers, counted as pairs (x, y), y != 0.

    Both signs of the common difference are counted, matching the cyclic count.
    """
    elems = sorted(set(int(a) for a in A))
    members = set(elems)
    total = 0
    for a in elems:
        for b in elems:
            if b == a:
                continue
            d = b - a
            if all(a + j * d in members for j in range(2, k)):
                total += 1
    return total


def find_3ap(A: Iterable[int]) -> tuple[int, int, int] | None:
    """A nontrivial 3-AP (x, x+d, x+2d), d > 0, inside a set of integers, or None."""
    elems = np.array(sorted(set(int(a) for a in A)), dtype=np.int64)
    if elems.size < 3:
        return None
    lo, hi = int(elems[0]), int(elems[-1])
    # Vectorised over the second term; smallest x, then smallest d, wins.
    arr = np.zeros(hi - lo + 1, dtype=bool)
    arr[elems - lo] = True
    best = None
    for i in range(elems.size - 1):
        x = int(elems[i])
        d = elems[i + 1:] - x
        third = x + 2 * d
        inside = third <= hi
        hit = np.zeros(d.shape, dtype=bool)
        hit[inside] = arr[third[inside] - lo]
        if hit.any():
            dd = int(d[np.argmax(hit)])
            best = (x, x + dd, x + 2 * dd)
            break
    return best


def is_ap_free(A: Iterable[int], k: int = 3) -> bool:
    if k == 3:
        return find_3ap(A) is None
    return count_aps_integers(A, k) == 0


@dataclass(frozen=True)
class DeviationBounds:
    lhs: float
    rhs_linear: float
    rhs_sqrt: float
    alpha: float
    lambda3: complex

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs_linear + 1e-12 and self.lhs <= self.rhs_sqrt + 1e-12


def deviation_bound_check(A: Indicator) -> DeviationBounds:
    """Both sides of |Lambda_3(1_A,1_A,1_A) - alpha^3| <= alpha max|1_A^| and <= max|1_A^|^(1/2)."""
    M = A.modulus
    if M % 2 == 0:
        raise ValueError("deviation bounds need odd M")
    f = A.function()
    lam = lambda3_via_fourier(f, f, f)
    alpha = A.density
    top = dft(f).max_nonzero()
    return DeviationBounds(
        lhs=abs(lam - alpha**3),
        rhs_linear=alpha * top,
        rhs_sqrt=math.sqrt(top),
        alpha=alpha,
        lambda3=lam,
    )


@dataclass(frozen=True)
class LinfBound:
    value: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.value <= self.bound + 1e-12


def lambda3_linf_bound_check(f: CyclicFunction, g: CyclicFunction, h: CyclicFunction) -> LinfBound:
    """|Lambda_3(f,g,h)| against min(||f^||_inf, ||g^||_inf, ||h^||_inf) for 1-bounded inputs."""
    for name, u in (("f", f), ("g", g), ("h", h)):
        if not u.is_bounded(BOUND_TOL):
            raise ValueError(f"{name} is not 1-bounded (sup = {u.sup_norm()})")
    lam = lambda3_via_fourier(f, g, h)
    bound = min(float(np.max(dft(u).abs())) for u in (f, g, h))
    return LinfBound(abs(lam), bound)


def smallest_admissible_modulus(lower: int, k: int) -> int:
    """Smallest M > lower with gcd(M, (k-1)!) = 1."""
    fact = math.factorial(max(1, k - 1))
    M = lower + 1
    while math.gcd(M, fact) != 1:
        M += 1
    return M


def embed_interval(A: Iterable[int], N: int, k: int = 3) -> Indicator:
    """View A inside [N] = {1..N} as a subset of Z/MZ without wraparound.

    M is the smallest integer above 2^(k-1) N coprime to (k-1)!; k-APs of A
    and of its image are then in bijection.
    """
    elems = sorted(set(int(a) for a in A))
    if elems and (elems[0] < 1 or elems[-1] > N):
        raise ValueError(f"A must lie in [1, {N}]")
    M = smallest_admissible_modulus(2 ** (k - 1) * N, k)
    return Indicator(M, frozenset(elems))
