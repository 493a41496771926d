"""Density increment for sets of integers without 3-term progressions.

Each step embeds A in Z/MZ, takes the largest nonzero Fourier coefficient of
1_A - alpha 1_[N], approximates its frequency by a rational with denominator
q <= sqrt(N), cuts [N] into progressions of step q on which the character is
nearly constant, and passes to the densest one.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .inverse import argmax_frequency
from .progressions import embed_interval, find_3ap
from .ring import CyclicFunction

TRACE_SCHEMA = "gowers_lab/roth-trace"
TRACE_VERSION = 1


@dataclass(frozen=True)
class Progression:
    """P = a + q [length] = {a + q, a + 2q, ..., a + q * length}."""

    a: int
    q: int
    length: int

    def __post_init__(self) -> None:
        if self.q < 1:
            raise ValueError("step q must be positive")
        if self.length < 0:
            raise ValueError("length must be non-negative")

    def elements(self) -> range:
        return range(self.a + self.q, self.a + self.q * self.length + 1, self.q)

    def inside(self, N: int) -> bool:
        return self.length == 0 or (self.a + self.q >= 1 and self.a + self.q * self.length <= N)


@dataclass(frozen=True)
class IncrementConfig:
    """Constants of the increment step; the defaults are engineering choices.

    A chosen piece must reach density alpha + c_inc alpha^2; the frequency must
    carry a normalised coefficient of at least threshold_factor alpha^2; the
    character may drift by at most phase_budget of a period along a piece. The
    run stops once alpha <= N^(-density_floor_exponent) or N < min_length.
    Pieces are never shorter than c_len alpha^2 sqrt(N) - 1, which trace
    audits check.
    """

    c_inc: float = 0.125
    threshold_factor: float = 0.5
    phase_budget: Fraction = Fraction(1, 10)
    c_len: float = 1 / (2 * math.pi * 10)
    min_length: int = 8
    density_floor_exponent: float = 0.5

    def __post_init__(self) -> None:
        for name in ("c_inc", "threshold_factor", "phase_budget", "c_len", "min_length", "density_floor_exponent"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        object.__setattr__(self, "phase_budget", Fraction(self.phase_budget).limit_denominator(10**6))

    def to_json(self) -> dict:
        d = asdict(self)
        d["phase_budget"] = str(self.phase_budget)
        return d

    @classmethod
    def from_json(cls, obj: dict) -> IncrementConfig:
        obj = dict(obj)
        if "phase_budget" in obj:
            obj["phase_budget"] = Fraction(obj["phase_budget"])
        return cls(**obj)


class ThreeAPFound(ValueError):
    def __init__(self, witness: tuple[int, int, int]):
        super().__init__(f"set contains the 3-AP {witness}")
        self.witness = witness


class EngineFailure(RuntimeError):
    """The configured constants did not close; ``certificate`` holds the numbers."""

    def __init__(self, message: str, certificate: dict):
        super().__init__(message)
        self.certificate = certificate


class BelowFloor(ValueError):
    pass


def _as_set(A: Iterable[int], N: int) -> frozenset[int]:
    S = frozenset(int(a) for a in A)
    if S and (min(S) < 1 or max(S) > N):
        raise ValueError(f"A must lie in [1, {N}]")
    return S


def rescale(A: Iterable[int], P: Progression, N: int | None = None) -> frozenset[int]:
    """A' = {n in [length] : a + q n in A}."""
    if N is not None and not P.inside(N):
        raise ValueError(f"{P} is not contained in [1, {N}]")
    S = frozenset(A)
    return frozenset(n for n in range(1, P.length + 1) if P.a + P.q * n in S)


def dirichlet(num: int, den: int, Q: int) -> tuple[int, int]:
    """(q, p) with 1 <= q <= Q and |q num/den - p| <= 1/(Q + 1).

    Walks the continued fraction of num/den and returns the last convergent
    whose denominator stays within Q.
    """
    if Q < 1:
        raise ValueError("Q must be positive")
    p0, q0, p1, q1 = 0, 1, 1, 0
    a, b = num, den
    while b:
        t, r = divmod(a, b)
        p2, q2 = t * p1 + p0, t * q1 + q0
        if q2 > Q:
            break
        p0, q0, p1, q1 = p1, q1, p2, q2
        a, b = b, r
    return q1, p1


def _dist_to_int(t: Fraction) -> Fraction:
    r = t - math.floor(t)
    return min(r, 1 - r)


@dataclass(frozen=True)
class IncrementStep:
    N: int
    size: int
    xi: int
    M: int
    coefficient: float  # |sum_{n<=N} f(n) e(-xi n / M)| / N
    q: int
    drift: Fraction  # ||q xi / M||
    progression: Progression
    new_size: int
    phase_variation: Fraction

    @property
    def density(self) -> Fraction:
        return Fraction(self.size, self.N)

    @property
    def new_density(self) -> Fraction:
        return Fraction(self.new_size, self.progression.length)

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "size": self.size,
            "alpha": float(self.density),
            "xi": self.xi,
            "M": self.M,
            "coefficient": self.coefficient,
            "q": self.q,
            "drift": str(self.drift),
            "progression": asdict(self.progression),
            "new_size": self.new_size,
            "new_alpha": float(self.new_density),
            "phase_variation": str(self.phase_variation),
        }


def _pieces(N: int, q: int, max_len: int) -> list[Progression]:
    """Split each residue class of [N] mod q into near-equal runs of length <= max_len."""
    out = []
    for r in range(1, q + 1):
        m = (N - r) // q + 1 if r <= N else 0
        if m <= 0:
            continue
        k = -(-m // max_len)
        base, extra = divmod(m, k)
        start = 0
        for j in range(k):
            ln = base + (1 if j < extra else 0)
            out.append(Progression(r - q + start * q, q, ln))
            start += ln
    return out


def find_increment(A: Iterable[int], N: int, cfg: IncrementConfig = IncrementConfig()) -> tuple[IncrementStep, frozenset[int]]:
    """One increment step. Returns the step record and the rescaled set.

    Raises ThreeAPFound if A has a 3-AP, BelowFloor if N < cfg.min_length or
    every admissible piece is shorter than the floor, and EngineFailure when
    the frequency or the density gain falls short of the configured constants.
    """
    S = _as_set(A, N)
    if N < cfg.min_length:
        raise BelowFloor(f"N={N} is below the length floor {cfg.min_length}")
    w = find_3ap(S)
    if w is not None:
        raise ThreeAPFound(w)
    if not S:
        raise EngineFailure("empty set", {"N": N})
    alpha = Fraction(len(S), N)

    ind = embed_interval(S, N, 3)
    M = ind.modulus
    box = np.zeros(M)
    box[1:N + 1] = float(alpha)
    f = CyclicFunction(ind.mask().astype(float) - box)
    xi, mag = argmax_frequency(f, exclude_zero=True)
    coeff = mag * M / N
    threshold = cfg.threshold_factor * float(alpha) ** 2
    if coeff < threshold - 1e-9:
        raise EngineFailure(
            "no frequency reaches the configured threshold",
            {"N": N, "alpha": float(alpha), "xi": xi, "coefficient": coeff, "threshold": threshold},
        )

    Q = math.isqrt(N)
    q, _ = dirichlet(xi, M, Q)
    drift = _dist_to_int(Fraction(q * xi, M))
    max_len = N if drift == 0 else int(cfg.phase_budget / drift) + 1
    pieces = _pieces(N, q, max_len)

    best = None
    for P in pieces:
        hits = sum(1 for x in P.elements() if x in S)
        key = (Fraction(hits, P.length), P.length, -P.a)
        if best is None or key > best[0]:
            best = (key, P, hits)
    _, P, hits = best
    target = alpha + Fraction(cfg.c_inc).limit_denominator(10**6) * alpha**2
    if Fraction(hits, P.length) < target:
        raise EngineFailure(
            "no piece reaches the configured density gain",
            {"N": N, "alpha": float(alpha), "xi": xi, "q": q, "best_density": hits / P.length, "target": float(target)},
        )
    if P.length < cfg.min_length:
        raise BelowFloor(f"best piece has length {P.length} < {cfg.min_length}")
    variation = max((_dist_to_int(Fraction(xi * q * j, M)) for j in range(P.length)), default=Fraction(0))
    step = IncrementStep(N, len(S), xi, M, coeff, q, drift, P, hits, variation)
    return step, rescale(S, P, N)


@dataclass
class IncrementTrace:
    N0: int
    size0: int
    config: IncrementConfig
    steps: list[IncrementStep] = field(default_factory=list)
    final_exit: str = ""
    witness: tuple[int, int, int] | None = None
    final_N: int = 0
    final_size: int = 0

    @property
    def densities(self) -> list[Fraction]:
        out = [Fraction(self.size0, self.N0)]
        out += [s.new_density for s in self.steps]
        return out

    def to_json(self) -> dict:
        return {
            "schema": TRACE_SCHEMA,
            "version": TRACE_VERSION,
            "config": self.config.to_json(),
            "N0": self.N0,
            "size0": self.size0,
            "steps": [s.to_json() for s in self.steps],
            "final_exit": self.final_exit,
            "witness": list(self.witness) if self.witness else None,
            "final_N": self.final_N,
            "final_size": self.final_size,
        }


def step_budget(alpha0: float, cfg: IncrementConfig) -> int:
    return math.ceil(1 / (cfg.c_inc * alpha0)) + 1


def run_increment_loop(A: Iterable[int], N: int, cfg: IncrementConfig = IncrementConfig()) -> IncrementTrace:
    """Iterate find_increment and rescale until a 3-AP, low density or a short length.

    Witnesses are reported in the original coordinates through the composed
    maps n -> a + q n. Since a piece of a progression-free set is again
    progression-free, in practice only the first pass can find one.
    """
    S = _as_set(A, N)
    trace = IncrementTrace(N, len(S), cfg)
    origin_a, origin_q = 0, 1
    budget = step_budget(len(S) / N, cfg) if S else 0
    cur, n = S, N
    while True:
        alpha = len(cur) / n if n else 0.0
        w = find_3ap(cur)
        if w is not None:
            trace.final_exit = "found_3ap"
            trace.witness = tuple(origin_a + origin_q * t for t in w)
            break
        if not cur or alpha <= n ** (-cfg.density_floor_exponent):
            trace.final_exit = "small_density"
            break
        if len(trace.steps) >= budget:
            raise EngineFailure("step budget exhausted", {"budget": budget, "steps": len(trace.steps)})
        try:
            step, nxt = find_increment(cur, n, cfg)
        except BelowFloor:
            trace.final_exit = "length_floor"
            break
        trace.steps.append(step)
        P = step.progression
        origin_a, origin_q = origin_a + origin_q * P.a, origin_q * P.q
        cur, n = nxt, P.length
    trace.final_N, trace.final_size = n, len(cur)
    return trace
