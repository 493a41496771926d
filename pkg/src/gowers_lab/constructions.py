"""Generators for the extremal examples: Behrend sets, quadratic phases, quadratic
Bohr sets, block-random phases and the bilinear "almost nilsequence" function."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .progressions import count_aps_cyclic, lambda_k
from .ring import CyclicFunction, Indicator, _unit_roots, dft, e_M

KINDS = ("behrend", "quad_phase", "quad_bohr", "block_random", "almost_nil")


# ---------------------------------------------------------------------------
# Behrend


@dataclass(frozen=True)
class BehrendSet:
    """A 3-AP-free subset of [N] built from digit vectors in convex position.

    Elements are 1 + sum_i a_i (2d-1)^i with digits 0 <= a_i < d, so adding two
    elements never carries. ``radius`` is the common value of sum a_i^2, or
    None for the d = 2 family where every {0,1} vector is a cube vertex.
    """

    N: int
    elements: tuple[int, ...]
    digit_bound: int
    radius: int | None

    @property
    def base(self) -> int:
        return 2 * self.digit_bound - 1

    @property
    def density(self) -> float:
        return len(self.elements) / self.N

    @property
    def implied_constant(self) -> float:
        """C with density = exp(-C sqrt(log N)); reported, not asserted."""
        if self.N < 3 or not self.elements:
            return float("nan")
        return -math.log(self.density) / math.sqrt(math.log(self.N))


def _digits(x: np.ndarray, base: int) -> np.ndarray:
    rows = []
    y = x.copy()
    while True:
        rows.append(y % base)
        y //= base
        if not y.any():
            break
    return np.stack(rows)


def behrend_construction(N: int, cube: bool = True) -> BehrendSet:
    """Search digit bounds d (base 2d-1) and sphere radii for the largest set in [N].

    With ``cube`` the whole d = 2 family ({0,1} digits in base 3) is also a
    candidate; below N ~ 10^5 it beats every single sphere. Ties go to the
    smaller d, then the smaller radius.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    x = np.arange(N, dtype=np.int64)
    best: tuple[int, int, int | None] = (1, 2, 0)
    best_elems = np.array([1])
    d = 2
    while True:
        base = 2 * d - 1
        if d > 2 and base * base > 4 * N:
            # At most two free digits from here on, so a sphere holds O(d) points.
            break
        digits = _digits(x, base)
        ok = np.all(digits < d, axis=0)
        if d == 2 and cube:
            size = int(ok.sum())
            if size > best[0]:
                best, best_elems = (size, 2, None), x[ok] + 1
        radii = np.sum(digits.astype(np.int64) ** 2, axis=0)
        counts = np.bincount(radii[ok])
        r = int(np.argmax(counts))
        if counts[r] > best[0]:
            best, best_elems = (int(counts[r]), d, r), x[ok & (radii == r)] + 1
        d += 1
    return BehrendSet(N, tuple(int(v) for v in best_elems), best[1], best[2])


def behrend_set(N: int) -> frozenset[int]:
    return frozenset(behrend_construction(N).elements)


# ---------------------------------------------------------------------------
# Quadratic phases


def quadratic_phase(M: int, c: int) -> CyclicFunction:
    """x -> e_M(c x^2), through the exact residue of c x^2."""
    x = np.arange(M, dtype=np.int64)
    return CyclicFunction(e_M((c * ((x * x) % M)) % M, M))


def quad_phase_quadruple(M: int) -> tuple[CyclicFunction, CyclicFunction, CyclicFunction, CyclicFunction]:
    """(e_M(x^2), e_M(-3x^2), e_M(3x^2), e_M(-x^2)); their Lambda_4 is exactly 1."""
    if M < 1 or math.gcd(M, 6) != 1:
        raise ValueError(f"need gcd(M, 6) = 1, got M={M}")
    return tuple(quadratic_phase(M, c) for c in (1, -3, 3, -1))  # type: ignore[return-value]


@dataclass(frozen=True)
class QuadPhaseStats:
    M: int
    lambda4: complex
    max_spectral: float

    @property
    def gauss_bound(self) -> float:
        return 1 / math.sqrt(self.M)


def quad_phase_stats(M: int) -> QuadPhaseStats:
    fs = quad_phase_quadruple(M)
    lam = lambda_k(fs)
    top = max(float(np.max(dft(f).abs())) for f in fs)
    return QuadPhaseStats(M, lam, top)


# ---------------------------------------------------------------------------
# Quadratic Bohr set


def _in_window(m: int, w: int) -> bool:
    """Whether {sqrt(2) m^2} lies in [0, 1/w), decided in exact integer arithmetic."""
    t = m * m
    floor_val = math.isqrt(2 * t * t)  # floor(sqrt(2) m^2)
    # {sqrt2 t} < 1/w  <=>  w sqrt2 t < w floor + 1  <=>  2 w^2 t^2 < (w floor + 1)^2
    return 2 * w * w * t * t < (w * floor_val + 1) ** 2


def quad_bohr_set(M: int, w: int) -> Indicator:
    """B = {m in [M] : {sqrt(2) m^2} in [0, 1/w)} as a subset of Z/MZ."""
    if M < 1:
        raise ValueError("M must be positive")
    if w < 1:
        raise ValueError("window parameter w must be at least 1")
    if w == 1:
        return Indicator(M, frozenset(range(M)))
    return Indicator(M, frozenset(m % M for m in range(1, M + 1) if _in_window(m, w)))


@dataclass(frozen=True)
class QuadBohrStats:
    M: int
    w: int
    size: int
    density: float
    max_nonzero_coeff: float
    ap4_count: int

    @property
    def random_ap4(self) -> float:
        """alpha^4 M^2, the 4-AP count expected from a random set of the same density."""
        return self.density**4 * self.M**2

    @property
    def excess_ratio(self) -> float:
        return self.ap4_count / self.random_ap4 if self.size else float("nan")


def quad_bohr_stats(M: int, w: int, B: Indicator | None = None) -> QuadBohrStats:
    if B is None:
        B = quad_bohr_set(M, w)
    return QuadBohrStats(
        M=M,
        w=w,
        size=B.size,
        density=B.density,
        max_nonzero_coeff=dft(B.function()).max_nonzero(),
        ap4_count=count_aps_cyclic(B, 4, nontrivial=True),
    )


# ---------------------------------------------------------------------------
# Block-random phases


@dataclass(frozen=True, eq=False)
class BlockRandom:
    """f = sum_i e_M(a_i x) 1_{P_i}(x) on Z/N^2 Z with P_i = {1 + iN, ..., N + iN}.

    ``exponents[r]`` is the integer phase of f at residue r, f = e_M(exponents).
    """

    N: int
    seed: int
    coefficients: np.ndarray
    exponents: np.ndarray
    function: CyclicFunction = field(repr=False)

    @property
    def modulus(self) -> int:
        return self.N * self.N

    def block(self, i: int) -> np.ndarray:
        """Residues of P_i."""
        return (np.arange(1, self.N + 1, dtype=np.int64) + i * self.N) % self.modulus

    def block_correlations(self) -> np.ndarray:
        """|E_{x in P_i} f(x) e_M(-a_i x)| for every block, with phases combined exactly."""
        M = self.modulus
        out = np.empty(self.N)
        for i in range(self.N):
            xs = np.arange(1, self.N + 1, dtype=np.int64) + i * self.N
            total = (self.exponents[xs % M] - self.coefficients[i] * xs) % M
            out[i] = abs(np.mean(e_M(total, M)))
        return out


def block_random_counterexample(N: int, seed: int) -> BlockRandom:
    if N < 2:
        raise ValueError("N must be at least 2")
    M = N * N
    rng = np.random.default_rng(seed)
    a = rng.integers(0, M, size=N, dtype=np.int64)
    exps = np.zeros(M, dtype=np.int64)
    for i in range(N):
        xs = np.arange(1, N + 1, dtype=np.int64) + i * N
        exps[xs % M] = (a[i] * xs) % M
    exps.setflags(write=False)
    a.setflags(write=False)
    return BlockRandom(N, seed, a, exps, CyclicFunction(e_M(exps, M)))


# ---------------------------------------------------------------------------
# Bilinear phase on a box


@dataclass(frozen=True, eq=False)
class AlmostNil:
    """f(x + L y) = e(xy / L) for 0 <= x, y <= B, zero elsewhere; L = isqrt(M)."""

    M: int
    L: int
    box: int
    function: CyclicFunction = field(repr=False)

    @property
    def support_size(self) -> int:
        return (self.box + 1) ** 2


def almost_nil_function(M: int, box_fraction: float = 0.01) -> AlmostNil:
    L = math.isqrt(M)
    box = math.floor(L * box_fraction)
    if box < 1:
        raise ValueError(f"support degenerates to a point for M={M}, box_fraction={box_fraction}")
    if box > L - 1:
        raise ValueError("box_fraction must keep x + L y injective (box <= L - 1)")
    xs = np.arange(box + 1, dtype=np.int64)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    vals = np.zeros(M, dtype=np.complex128)
    vals[(X + L * Y).ravel()] = _unit_roots(L)[((X * Y) % L).ravel()]
    return AlmostNil(M, L, box, CyclicFunction(vals))


def max_quadratic_correlation(f: CyclicFunction) -> tuple[float, int, int]:
    """max over a != 0 and all b of |E_z f(z) e_M(a z^2 + b z)|, with the maximiser (a, b).

    For each a, one FFT covers every b.
    """
    M = f.modulus
    z = np.arange(M, dtype=np.int64)
    sq = (z * z) % M
    best = (-1.0, 0, 0)
    for a in range(1, M):
        g = f.values * e_M((a * sq) % M, M)
        # E_z g(z) e_M(bz) = ghat(-b), ghat via the averaged transform.
        mags = np.abs(np.fft.fft(g)) / M
        j = int(np.argmax(mags))
        if mags[j] > best[0]:
            best = (float(mags[j]), a, (-j) % M)
    return best


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstructionSpec:
    kind: str
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown construction {self.kind!r}; choose from {KINDS}")
        p = self.params
        need = {
            "behrend": ("N",),
            "quad_phase": ("M",),
            "quad_bohr": ("M", "w"),
            "block_random": ("N",),
            "almost_nil": ("M",),
        }[self.kind]
        missing = [k for k in need if k not in p]
        if missing:
            raise ValueError(f"{self.kind} needs parameters {missing}")
        if self.kind == "block_random" and "M" in p and int(p["M"]) != int(p["N"]) ** 2:
            raise ValueError("block_random requires M = N^2")
        if self.kind == "quad_bohr" and int(p["w"]) < 1:
            raise ValueError("quad_bohr requires w >= 1")
        if self.kind == "almost_nil":
            M = int(p["M"])
            if math.isqrt(M) ** 2 > M:
                raise ValueError("almost_nil requires L^2 <= M")


def build(spec: ConstructionSpec, seed: int = 0) -> dict:
    """Run a construction and return a JSON-ready record."""
    p = spec.params
    if spec.kind == "behrend":
        b = behrend_construction(int(p["N"]))
        return {
            "kind": "behrend", "N": b.N, "subset": list(b.elements), "size": len(b.elements),
            "density": b.density, "digit_bound": b.digit_bound, "base": b.base,
            "radius": b.radius, "implied_C": b.implied_constant,
        }
    if spec.kind == "quad_phase":
        M = int(p["M"])
        st = quad_phase_stats(M)
        return {
            "kind": "quad_phase", "M": M,
            "functions": [f.to_json() for f in quad_phase_quadruple(M)],
            "lambda4": [st.lambda4.real, st.lambda4.imag],
            "max_spectral": st.max_spectral, "gauss_bound": st.gauss_bound,
        }
    if spec.kind == "quad_bohr":
        M, w = int(p["M"]), int(p["w"])
        B = quad_bohr_set(M, w)
        st = quad_bohr_stats(M, w, B)
        return {
            "kind": "quad_bohr", **B.to_json(), "w": w, "density": st.density,
            "max_nonzero_coeff": st.max_nonzero_coeff, "ap4_count": st.ap4_count,
            "random_ap4": st.random_ap4,
        }
    if spec.kind == "block_random":
        N = int(p["N"])
        s = int(p.get("seed", seed))
        br = block_random_counterexample(N, s)
        return {
            "kind": "block_random", "N": N, "seed": s,
            "coefficients": br.coefficients.tolist(), **br.function.to_json(),
        }
    M = int(p["M"])
    an = almost_nil_function(M, float(p.get("box_fraction", 0.01)))
    return {
        "kind": "almost_nil", "L": an.L, "box": an.box, "support_size": an.support_size,
        **an.function.to_json(),
    }
