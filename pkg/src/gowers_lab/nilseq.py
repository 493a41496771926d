"""Filtered nilpotent groups (R^d and the Heisenberg group), polynomial sequences,
reduction to a fundamental domain, nilsequences, bracket phases and a Weyl-sum
diagnostic."""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational, Real
from typing import Any, Callable, Sequence

import numpy as np

from .ring import _unit_roots, e

MEMBER_TOL = 1e-9


def _floor_frac(t):
    """(floor t, {t}) with {t} in [0, 1) even after float rounding."""
    fl = math.floor(t)
    fr = t - fl
    if fr >= 1:  # e.g. t = -1e-17 in floating point
        fl += 1
        fr = fr - 1 if isinstance(fr, Rational) else 0.0
    return fl, fr


def binom(n: int, i: int) -> int:
    """C(n, i) = n (n-1) ... (n-i+1) / i!, valid for every integer n."""
    if i < 0:
        return 0
    num = 1
    for j in range(i):
        num *= n - j
    return num // math.factorial(i)


# ---------------------------------------------------------------------------
# Heisenberg group


@dataclass(frozen=True)
class HeisenbergElement:
    """The unipotent matrix [[1, x, z], [0, 1, y], [0, 0, 1]].

    Entries may be ints, Fractions or floats; exact inputs give exact products.
    """

    x: Any = 0
    y: Any = 0
    z: Any = 0

    def __mul__(self, other: HeisenbergElement) -> HeisenbergElement:
        return HeisenbergElement(self.x + other.x, self.y + other.y, self.z + other.z + self.x * other.y)

    def inverse(self) -> HeisenbergElement:
        return HeisenbergElement(-self.x, -self.y, self.x * self.y - self.z)

    def __pow__(self, n: int) -> HeisenbergElement:
        return HeisenbergElement(n * self.x, n * self.y, n * self.z + binom(n, 2) * self.x * self.y)

    @staticmethod
    def identity() -> HeisenbergElement:
        return HeisenbergElement(0, 0, 0)

    def matrix(self) -> np.ndarray:
        return np.array([[1, self.x, self.z], [0, 1, self.y], [0, 0, 1]], dtype=float)

    def close(self, other: HeisenbergElement, tol: float = MEMBER_TOL) -> bool:
        return all(abs(a - b) <= tol for a, b in zip(self.entries(), other.entries()))

    def entries(self) -> tuple:
        return (self.x, self.y, self.z)

    def is_integral(self, tol: float = MEMBER_TOL) -> bool:
        return all(abs(t - round(t)) <= tol for t in self.entries())


def commutator(a: HeisenbergElement, b: HeisenbergElement) -> HeisenbergElement:
    """[a, b] = a b a^-1 b^-1."""
    return a * b * a.inverse() * b.inverse()


@dataclass(frozen=True)
class Reduction:
    rep: HeisenbergElement
    gamma: HeisenbergElement


def heisenberg_reduce(g: HeisenbergElement) -> Reduction:
    """Write g = rep * gamma with gamma in H_3(Z) and rep = ({x}, {y}, {z - x floor(y)})."""
    fx, rx = _floor_frac(g.x)
    fy, ry = _floor_frac(g.y)
    fz, rz = _floor_frac(g.z - g.x * fy)
    rep = HeisenbergElement(rx, ry, rz)
    gamma = HeisenbergElement(fx, fy, fz + fx * fy)
    return Reduction(rep, gamma)


# ---------------------------------------------------------------------------
# Groups and filtrations


@dataclass(frozen=True)
class Group:
    """The operations the generic code needs from a group."""

    name: str
    mul: Callable[[Any, Any], Any]
    inv: Callable[[Any], Any]
    identity: Any
    power: Callable[[Any, int], Any]
    reduce: Callable[[Any], Any]  # representative in the fundamental domain
    close: Callable[[Any, Any, float], bool]
    coords: Callable[[Any], tuple]


def _heis_close(a, b, tol):
    return a.close(b, tol)


HEISENBERG = Group(
    name="H3(R)",
    mul=lambda a, b: a * b,
    inv=lambda a: a.inverse(),
    identity=HeisenbergElement.identity(),
    power=lambda a, n: a**n,
    reduce=lambda g: heisenberg_reduce(g).rep,
    close=_heis_close,
    coords=lambda g: g.entries(),
)


def euclidean_group(d: int) -> Group:
    """R^d under addition, elements as tuples; the quotient is the torus R^d / Z^d."""

    def close(a, b, tol):
        return all(abs(s - t) <= tol for s, t in zip(a, b))

    return Group(
        name=f"R^{d}",
        mul=lambda a, b: tuple(s + t for s, t in zip(a, b)),
        inv=lambda a: tuple(-s for s in a),
        identity=(0,) * d,
        power=lambda a, n: tuple(n * s for s in a),
        reduce=lambda a: tuple(_floor_frac(s)[1] for s in a),
        close=close,
        coords=lambda a: tuple(a),
    )


@dataclass(frozen=True)
class Filtration:
    """G = G_0 = G_1 >= G_2 >= ... with G_{s+1} trivial.

    ``member(i, g, tol)`` decides g in G_i; ``sample(i, rng)`` draws an element
    of G_i for spot checks.
    """

    group: Group
    degree: int
    member: Callable[[int, Any, float], bool]
    sample: Callable[[int, np.random.Generator], Any]

    def contains(self, i: int, g, tol: float = MEMBER_TOL) -> bool:
        if i <= 1:
            return True
        if i > self.degree:
            return self.group.close(g, self.group.identity, tol)
        return self.member(i, g, tol)

    def spot_check(self, rng: np.random.Generator, samples: int = 100, tol: float = MEMBER_TOL) -> bool:
        """Nestedness and [G_i, G_j] in G_{i+j} on random elements."""
        G = self.group
        for _ in range(samples):
            for i in range(1, self.degree + 1):
                if not self.contains(i, self.sample(i + 1, rng), tol):
                    return False
                for j in range(1, self.degree + 2 - i):
                    a, b = self.sample(i, rng), self.sample(j, rng)
                    c = G.mul(G.mul(a, b), G.mul(G.inv(a), G.inv(b)))
                    if not self.contains(i + j, c, tol):
                        return False
        return True


def _heis_member(i, g, tol):
    if i == 2:
        return abs(g.x) <= tol and abs(g.y) <= tol
    return True


def _heis_sample(i, rng):
    x, y, z = rng.uniform(-10, 10, size=3)
    if i <= 1:
        return HeisenbergElement(x, y, z)
    if i == 2:
        return HeisenbergElement(0.0, 0.0, z)
    return HeisenbergElement(0.0, 0.0, 0.0)


def heisenberg_filtration() -> Filtration:
    """Lower central series: G_1 = H_3(R), G_2 = centre {(0, 0, z)}, G_3 = {1}."""
    return Filtration(HEISENBERG, 2, _heis_member, _heis_sample)


def standard_filtration(d: int, s: int) -> Filtration:
    """R^d with G_i = R^d for i <= s and G_{s+1} = {0}."""
    G = euclidean_group(d)

    def sample(i, rng):
        if i > s:
            return (0.0,) * d
        return tuple(float(v) for v in rng.uniform(-10, 10, size=d))

    return Filtration(G, s, lambda i, g, tol: True, sample)


# ---------------------------------------------------------------------------
# Polynomial sequences


@dataclass(frozen=True)
class PolySequence:
    """n -> g_0 g_1^C(n,1) ... g_s^C(n,s) with g_i in G_i."""

    filtration: Filtration
    coeffs: tuple

    def __post_init__(self) -> None:
        if len(self.coeffs) > self.filtration.degree + 1:
            raise ValueError(f"at most {self.filtration.degree + 1} Taylor coefficients for degree {self.filtration.degree}")
        for i, g in enumerate(self.coeffs):
            if not self.filtration.contains(i, g):
                raise ValueError(f"coefficient g_{i} = {g} is not in G_{i}")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, n: int):
        return poly_sequence_eval(self, n)


def poly_sequence_eval(p: PolySequence, n: int):
    G = p.filtration.group
    out = G.identity
    for i, g in enumerate(p.coeffs):
        out = G.mul(out, G.power(g, binom(n, i)))
    return out


@dataclass(frozen=True)
class PolyMapResult:
    holds: bool
    witness: tuple | None = None  # (k, shifts, x, value)

    def __bool__(self) -> bool:
        return self.holds


def is_polynomial_map(
    f: Callable[[int], Any],
    filtration: Filtration,
    s: int | None = None,
    window: range = range(-6, 7),
    shifts: Sequence[int] = range(-3, 4),
    tol: float = MEMBER_TOL,
) -> PolyMapResult:
    """Check that every k-fold derivative d_{h_1}...d_{h_k} f(x), d_h f(x) = f(x+h) f(x)^-1,
    lies in G_k, for k <= s + 1, all h in ``shifts`` and x in ``window``.
    Depths beyond degree + 1 are implied by depth degree + 1.

    The domain Z carries its degree-1 filtration, so each shift has level 1.
    Exhaustive over the window; returns the first failing tuple as witness.
    """
    G = filtration.group
    if s is None:
        s = filtration.degree
    memo: dict[tuple, Any] = {}

    def deriv(hs: tuple, x: int):
        key = (hs, x)
        if key not in memo:
            if not hs:
                memo[key] = f(x)
            else:
                rest = hs[1:]
                memo[key] = G.mul(deriv(rest, x + hs[0]), G.inv(deriv(rest, x)))
        return memo[key]

    # G_{degree+1} is trivial, and derivatives of the identity stay trivial.
    for k in range(2, min(s, filtration.degree) + 2):
        for hs in itertools.product(shifts, repeat=k):
            for x in window:
                v = deriv(hs, x)
                if not filtration.contains(k, v, tol):
                    return PolyMapResult(False, (k, hs, x, v))
    return PolyMapResult(True)


# ---------------------------------------------------------------------------
# Nilsequences


@dataclass(frozen=True)
class Nilsequence:
    """psi(n) = F(phi(n) Gamma), with F given on the fundamental domain.

    ``lipschitz`` is the declared Lipschitz bound of F in the sup metric on
    fundamental-domain coordinates; ``lattice`` just names Gamma.
    """

    poly: PolySequence
    F: Callable[[tuple], complex]
    lipschitz: float
    lattice: str = "integer points"

    def __call__(self, n: int) -> complex:
        return nilsequence_eval(self, n)

    def sampled_lipschitz(self, rng: np.random.Generator, samples: int = 2000, scale: float = 1e-3) -> float:
        """Largest |F(a) - F(b)| / |a - b| over random nearby pairs in the domain."""
        dim = len(self.poly.filtration.group.coords(self.poly.filtration.group.identity))
        worst = 0.0
        for _ in range(samples):
            a = rng.uniform(0, 1, size=dim)
            b = np.clip(a + rng.uniform(-scale, scale, size=dim), 0, 1 - 1e-15)
            dist = float(np.max(np.abs(a - b)))
            if dist == 0:
                continue
            worst = max(worst, abs(self.F(tuple(a)) - self.F(tuple(b))) / dist)
        return worst


def nilsequence_eval(ns: Nilsequence, n: int) -> complex:
    G = ns.poly.filtration.group
    return complex(ns.F(G.coords(G.reduce(poly_sequence_eval(ns.poly, n)))))


def bracket_phase(L: int, n: int) -> complex:
    """g(n) = e(-(n/L) floor(n/L)), evaluated through the exact residue mod L."""
    if L < 1:
        raise ValueError("L must be positive")
    return complex(_unit_roots(L)[(-n * (n // L)) % L])


def bracket_sequence(L: int) -> PolySequence:
    """phi(n) = (n/L, n/L, 0) in H_3(R), written as g_1^n g_2^C(n,2)."""
    g1 = HeisenbergElement(Fraction(1, L), Fraction(1, L), Fraction(0))
    g2 = HeisenbergElement(Fraction(0), Fraction(0), Fraction(-1, L * L))
    return PolySequence(heisenberg_filtration(), (HeisenbergElement.identity(), g1, g2))


def bracket_nilsequence(L: int) -> Nilsequence:
    """The bracket phase as F(phi(n) Gamma) with F(a, b, c) = e(c).

    The reduced coset of phi(n) has c = {-(n/L) floor(n/L)}, so F = e(c)
    returns g(n). F jumps across b = 0, so no Lipschitz bound is declared.
    """
    return Nilsequence(bracket_sequence(L), lambda abc: e(abc[2]), math.inf, "H3(Z)")


@dataclass(frozen=True)
class Cutoff:
    """Piecewise-linear rho on [0, 1]: 0 at both ends, 1 on [margin, 1 - margin]."""

    margin: float = 1e-6

    def __post_init__(self) -> None:
        if not 0 < self.margin < 0.5:
            raise ValueError(f"plateau [margin, 1 - margin] is degenerate for margin={self.margin}")

    @property
    def lipschitz(self) -> float:
        return 1 / self.margin

    def __call__(self, t) -> float:
        return max(0.0, min(1.0, t / self.margin, (1 - t) / self.margin))


def smooth_cutoff(margin: float = 1e-6) -> Cutoff:
    return Cutoff(margin)


def smoothed_bracket_nilsequence(L: int, margin: float = 1e-6) -> Nilsequence:
    """h(n) = g(n) rho({n/L}), via F(a, b, c) = e(c) rho(b), which is continuous."""
    rho = smooth_cutoff(margin)
    return Nilsequence(
        bracket_sequence(L),
        lambda abc: e(abc[2]) * rho(abc[1]),
        2 * math.pi + rho.lipschitz,
        "H3(Z)",
    )


def cutoff_mismatches(L: int, M: int, margin: float = 1e-6) -> int:
    """#{n in [M] : rho({n/L}) != 1}, i.e. where h and g can differ."""
    rho = smooth_cutoff(margin)
    bad = [j for j in range(L) if rho(Fraction(j, L)) != 1]
    full, rem = divmod(M, L)
    # n = 1..M hits residue j full times, plus once more when 1 <= j <= rem
    return sum(full + (1 if 1 <= j <= rem else 0) for j in bad)


# ---------------------------------------------------------------------------
# Weyl diagnostic


@dataclass(frozen=True)
class WeylReport:
    exp_sum: complex
    q: int
    approx_errors: tuple[float, ...]
    quality: float  # max_i N^i ||q a_i||


def _is_exact(c) -> bool:
    return isinstance(c, (int, Fraction)) or isinstance(c, Rational)


def _dist_int(t) -> float:
    return float(abs(t - round(t)))


def _exp_sum(coeffs: Sequence, N: int) -> complex:
    if all(_is_exact(c) for c in coeffs):
        cs = [Fraction(c) for c in coeffs]
        D = math.lcm(*(c.denominator for c in cs))
        nums = [int(c * D) for c in cs]
        total = 0j
        roots = _unit_roots(D) if D <= 10**7 else None
        for n in range(1, N + 1):
            r = 0
            for a in reversed(nums):  # Horner mod D
                r = (r * n + a) % D
            total += roots[r] if roots is not None else cmath.exp(2j * math.pi * r / D)
        return complex(total / N)
    n = np.arange(1, N + 1, dtype=np.float64)
    phase = np.zeros(N)
    for i, c in enumerate(coeffs):
        # reduce each term separately to keep the magnitudes small
        phase = (phase + (float(c) * n**i) % 1.0) % 1.0
    return complex(np.mean(np.exp(2j * np.pi * phase)))


def weyl_diagnostic(coeffs: Sequence[Real], N: int, delta: float = 0.1, q_max: int | None = None) -> WeylReport:
    """E_{n in [N]} e(P(n)) for P(n) = sum_i a_i n^i, and the q <= Q minimising max_i N^i ||q a_i||.

    Q defaults to ceil(delta^(-2d)) capped at 10^6. Ties go to the smaller q.
    """
    coeffs = list(coeffs)
    if N < 1:
        raise ValueError("N must be positive")
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    d = max(1, len(coeffs) - 1)
    if q_max is None:
        q_max = min(10**6, math.ceil(delta ** (-2 * d)))
    es = _exp_sum(coeffs, N)
    higher = coeffs[1:] or [0]
    qs = np.arange(1, q_max + 1, dtype=np.int64)
    quality = np.zeros(q_max)
    for i, a in enumerate(higher, start=1):
        if _is_exact(a):
            a = Fraction(a)
            p, r = a.numerator % a.denominator, a.denominator
            if r * q_max < 2**62:
                resid = (qs * p) % r
                dist = np.minimum(resid, r - resid) / r
            else:
                dist = np.array([_dist_int(int(q) * a) for q in qs])
        else:
            t = (qs * float(a)) % 1.0
            dist = np.minimum(t, 1 - t)
        quality = np.maximum(quality, float(N) ** i * dist)
    j = int(np.argmin(quality))
    q = int(qs[j])
    errs = tuple(_dist_int(q * (Fraction(a) if _is_exact(a) else a)) for a in higher)
    return WeylReport(es, q, errs, float(quality[j]))
