"""Functions on Z/MZ, characters, the averaged Fourier transform and norms.

Conventions used throughout the package:

* ``dft(f)[xi] = (1/M) * sum_x f(x) e(-xi x / M)``  (averaging normalization)
* ``inverse_dft(S)(x) = sum_xi S[xi] e(xi x / M)``  (plain sum)

so that ``inner_product(g, h) = sum_xi dft(g)[xi] * conj(dft(h)[xi])``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Iterable, Union

import numpy as np

BOUND_TOL = 1e-12

ArrayLike = Union[np.ndarray, Iterable[complex]]


@lru_cache(maxsize=64)
def _unit_roots(M: int) -> np.ndarray:
    """Table of e(k/M) for k = 0..M-1; index with integer exponents reduced mod M."""
    table = np.exp(2j * np.pi * np.arange(M) / M)
    table.setflags(write=False)
    return table


def e_M(t: np.ndarray | int, M: int) -> np.ndarray:
    """e(t/M) for integer ``t``, evaluated through the exact residue ``t mod M``."""
    return _unit_roots(M)[np.mod(np.asarray(t, dtype=np.int64), M)]


def e(t: np.ndarray | float) -> np.ndarray:
    """e(t) = exp(2 pi i t) for real t."""
    return np.exp(2j * np.pi * np.asarray(t, dtype=float))


def _as_values(values: ArrayLike) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128).reshape(-1)
    if arr.size < 1:
        raise ValueError("a function on Z/MZ needs M >= 1 values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class CyclicFunction:
    """A complex-valued function on Z/MZ stored as its values at 0..M-1."""

    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _as_values(self.values))

    @property
    def modulus(self) -> int:
        return int(self.values.shape[0])

    def __call__(self, x):
        return self.values[np.mod(x, self.modulus)]

    def __len__(self) -> int:
        return self.modulus

    # Pointwise algebra. Mixed moduli are always an error.
    def _other(self, other):
        if isinstance(other, CyclicFunction):
            _check_same_modulus(self, other)
            return other.values
        return other

    def __add__(self, other) -> CyclicFunction:
        return CyclicFunction(self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other) -> CyclicFunction:
        return CyclicFunction(self.values - self._other(other))

    def __rsub__(self, other) -> CyclicFunction:
        return CyclicFunction(self._other(other) - self.values)

    def __mul__(self, other) -> CyclicFunction:
        return CyclicFunction(self.values * self._other(other))

    __rmul__ = __mul__

    def __neg__(self) -> CyclicFunction:
        return CyclicFunction(-self.values)

    def conj(self) -> CyclicFunction:
        return CyclicFunction(np.conj(self.values))

    def shift(self, h: int) -> CyclicFunction:
        """The translate x -> f(x + h)."""
        return CyclicFunction(np.roll(self.values, -(h % self.modulus)))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def is_bounded(self, tol: float = BOUND_TOL) -> bool:
        return self.sup_norm() <= 1.0 + tol

    def mean(self) -> complex:
        return complex(np.mean(self.values))

    def allclose(self, other: CyclicFunction, atol: float = 1e-10) -> bool:
        return self.modulus == other.modulus and bool(
            np.max(np.abs(self.values - other.values)) <= atol
        )

    @classmethod
    def from_callable(cls, M: int, fn: Callable[[np.ndarray], Any]) -> CyclicFunction:
        return cls(np.broadcast_to(fn(np.arange(M)), (M,)))

    @classmethod
    def constant(cls, M: int, c: complex = 1.0) -> CyclicFunction:
        return cls(np.full(M, c, dtype=np.complex128))

    @classmethod
    def zeros(cls, M: int) -> CyclicFunction:
        return cls(np.zeros(M, dtype=np.complex128))

    def to_json(self) -> dict:
        return {
            "modulus": self.modulus,
            "re": self.values.real.tolist(),
            "im": self.values.imag.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> CyclicFunction:
        if "subset" in obj:
            return Indicator.from_json(obj).function()
        try:
            M = int(obj["modulus"])
            re = np.asarray(obj["re"], dtype=float)
            im = np.asarray(obj.get("im", np.zeros(M)), dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed function object: {exc}") from exc
        if re.shape != (M,) or im.shape != (M,):
            raise ValueError(f"expected {M} real and imaginary parts")
        return cls(re + 1j * im)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Fourier coefficients f^(xi) for xi = 0..M-1."""

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", _as_values(self.coeffs))

    @property
    def modulus(self) -> int:
        return int(self.coeffs.shape[0])

    def __getitem__(self, xi):
        return self.coeffs[np.mod(xi, self.modulus)]

    def abs(self) -> np.ndarray:
        return np.abs(self.coeffs)

    def max_nonzero(self) -> float:
        """max over xi != 0 of |f^(xi)| (0 when M = 1)."""
        if self.modulus == 1:
            return 0.0
        return float(np.max(np.abs(self.coeffs[1:])))


@dataclass(frozen=True)
class Indicator:
    """The indicator function 1_A of a subset A of Z/MZ."""

    modulus: int
    subset: frozenset = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.modulus < 1:
            raise ValueError("modulus must be positive")
        subset = frozenset(int(a) for a in self.subset)
        bad = [a for a in subset if not 0 <= a < self.modulus]
        if bad:
            raise ValueError(f"residues outside 0..{self.modulus - 1}: {sorted(bad)[:5]}")
        object.__setattr__(self, "subset", subset)

    @classmethod
    def from_integers(cls, M: int, elements: Iterable[int]) -> Indicator:
        """Reduce arbitrary integers mod M."""
        return cls(M, frozenset(int(a) % M for a in elements))

    @property
    def size(self) -> int:
        return len(self.subset)

    @property
    def density(self) -> float:
        return len(self.subset) / self.modulus

    def mask(self) -> np.ndarray:
        m = np.zeros(self.modulus, dtype=bool)
        m[sorted(self.subset)] = True
        return m

    def function(self) -> CyclicFunction:
        return CyclicFunction(self.mask().astype(np.complex128))

    def balanced(self) -> CyclicFunction:
        """f_A = 1_A - alpha, the mean-zero balanced function."""
        return CyclicFunction(self.mask() - self.density)

    def to_json(self) -> dict:
        return {"modulus": self.modulus, "subset": sorted(self.subset)}

    @classmethod
    def from_json(cls, obj: dict) -> Indicator:
        try:
            return cls(int(obj["modulus"]), frozenset(int(a) for a in obj["subset"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed indicator object: {exc}") from exc


def _check_same_modulus(*fs) -> int:
    moduli = {f.modulus for f in fs}
    if len(moduli) != 1:
        raise ValueError(f"modulus mismatch: {sorted(moduli)}")
    return moduli.pop()


def character(M: int, xi: int) -> CyclicFunction:
    """x -> e_M(xi x)."""
    if M < 1 or not 0 <= xi < M:
        raise ValueError(f"need M >= 1 and 0 <= xi < M, got M={M}, xi={xi}")
    x = np.arange(M, dtype=np.int64)
    return CyclicFunction(e_M(xi * x, M))


def _dft_naive(values: np.ndarray) -> np.ndarray:
    M = values.shape[0]
    roots = np.conj(_unit_roots(M))
    x = np.arange(M, dtype=np.int64)
    out = np.empty(M, dtype=np.complex128)
    # Row blocks keep the kernel matrix at <= ~2**20 entries.
    block = max(1, (1 << 20) // M)
    for start in range(0, M, block):
        xi = np.arange(start, min(M, start + block), dtype=np.int64)
        kernel = roots[np.outer(xi, x) % M]
        out[xi] = (kernel * values).sum(axis=1) / M
    return out


def dft(f: CyclicFunction, method: str = "fft") -> Spectrum:
    """Averaged Fourier transform.

    ``method="fft"`` is the O(M log M) path (pocketfft: mixed radix with a
    Bluestein fallback, so any M works); ``method="naive"`` is the direct
    O(M^2) sum kept as an oracle.
    """
    if method == "fft":
        return Spectrum(np.fft.fft(f.values) / f.modulus)
    if method == "naive":
        return Spectrum(_dft_naive(f.values))
    raise ValueError(f"unknown dft method {method!r}")


def inverse_dft(S: Spectrum, method: str = "fft") -> CyclicFunction:
    if method == "fft":
        return CyclicFunction(np.fft.ifft(S.coeffs) * S.modulus)
    if method == "naive":
        M = S.modulus
        # sum_xi c(xi) e(xi x/M) = M * conj(naive_dft(conj c))
        return CyclicFunction(np.conj(_dft_naive(np.conj(S.coeffs))) * M)
    raise ValueError(f"unknown inverse_dft method {method!r}")


def inner_product(g: CyclicFunction, h: CyclicFunction) -> complex:
    """<g, h> = E_x g(x) conj(h(x))."""
    _check_same_modulus(g, h)
    return complex(np.mean(g.values * np.conj(h.values)))


def norm(f: CyclicFunction | Spectrum | ArrayLike, p: float = 2.0, kind: str = "L") -> float:
    """L^p (averaged) or l^p (summed) norm; p = inf gives the max in both cases.

    Accepts a CyclicFunction, a Spectrum or a raw array. Parseval reads
    ``norm(f, 2, "L") == norm(dft(f), 2, "l")``.
    """
    if isinstance(f, CyclicFunction):
        vals = f.values
    elif isinstance(f, Spectrum):
        vals = f.coeffs
    else:
        vals = np.asarray(f, dtype=np.complex128)
    if kind not in ("L", "l"):
        raise ValueError(f"kind must be 'L' or 'l', got {kind!r}")
    p = float(p)
    if math.isnan(p) or p < 1:
        raise ValueError(f"invalid exponent p={p}")
    a = np.abs(vals)
    if math.isinf(p):
        return float(np.max(a))
    total = np.mean(a**p) if kind == "L" else np.sum(a**p)
    return float(total ** (1.0 / p))


def random_bounded(M: int, rng: np.random.Generator, kind: str = "disk") -> CyclicFunction:
    """A random 1-bounded function: uniform in the unit disk, or unit-modulus phases."""
    theta = rng.uniform(0.0, 2 * np.pi, M)
    if kind == "phase":
        return CyclicFunction(np.exp(1j * theta))
    if kind == "disk":
        r = np.sqrt(rng.uniform(0.0, 1.0, M))
        return CyclicFunction(r * np.exp(1j * theta))
    if kind == "real":
        return CyclicFunction(rng.uniform(-1.0, 1.0, M))
    raise ValueError(f"unknown kind {kind!r}")
