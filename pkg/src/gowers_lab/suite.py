"""Check batteries behind `gowers-lab suite`.

Every check returns one Record with the measured quantity and the threshold it
was held to. Output depends only on the preset, parameters and seed; timings
are deliberately left out so repeated runs are byte-identical.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import constructions as C
from . import inverse as inv
from . import nilseq as nl
from . import progressions as pr
from . import roth
from . import uniformity as un
from .ring import CyclicFunction, dft, inverse_dft, norm, random_bounded

PRESETS = ("identities", "quadphase", "counterexamples", "nilseq", "roth", "all")
CSV_COLUMNS = ("preset", "check", "passed", "measured", "threshold", "detail")


@dataclass(frozen=True)
class Record:
    preset: str
    check: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""


def _le(preset, check, measured, threshold, detail=""):
    return Record(preset, check, bool(measured <= threshold), float(measured), float(threshold), detail)


def _ge(preset, check, measured, threshold, detail=""):
    return Record(preset, check, bool(measured >= threshold), float(measured), float(threshold), detail)


def identities(seed: int, threads: int | None = None) -> list[Record]:
    P = "identities"
    rng = np.random.default_rng(seed)
    out = []

    f = random_bounded(101, rng)
    S = dft(f)
    err = max(abs(norm(f, 2) - norm(S, 2, kind="l")), float(np.max(np.abs(inverse_dft(S).values - f.values))))
    out.append(_le(P, "parseval_and_inversion", err, 1e-12, "M=101"))

    worst = 0.0
    for _ in range(10):
        fs = [random_bounded(101, rng) for _ in range(3)]
        worst = max(worst, abs(pr.lambda3_via_fourier(*fs) - pr.lambda_k(fs)))
    out.append(_le(P, "lambda3_fourier_identity", worst, 1e-9, "M=101, 10 triples"))

    worst = 0.0
    mono = True
    for s, M in ((2, 32), (3, 16), (4, 8)):
        g = random_bounded(M, rng)
        a = un.gowers_norm_naive(g, s).value
        b = un.gowers_norm_recursive(g, s, threads).value
        worst = max(worst, abs(a - b))
        mono &= un.gowers_norm_naive(g, s - 1).value <= a + 1e-12
    out.append(_le(P, "gowers_recursion", worst, 1e-9, "s=2,3,4"))
    out.append(Record(P, "gowers_monotonicity", mono, float(mono), 1.0))

    fs = [random_bounded(8, rng) for _ in range(8)]
    gcs = un.gcs_check(fs, 3)
    out.append(_le(P, "gowers_cauchy_schwarz", gcs.lhs - gcs.rhs, 1e-9, "s=3, M=8"))

    g = random_bounded(256, rng)
    found = inv.inverse_u2(g, 1.0)
    out.append(_ge(P, "u2_inverse", found.correlation - found.u2**2, -1e-9, "M=256, delta=||f||_U2"))

    A = pr.embed_interval(C.behrend_set(200), 200)
    dev = pr.deviation_bound_check(A)
    out.append(_le(P, "lambda3_deviation", dev.lhs - min(dev.rhs_linear, dev.rhs_sqrt), 1e-12, "Behrend(200)"))

    bad = 0
    for d in range(5):
        coeffs = tuple(int(c) for c in rng.integers(0, 7, size=d + 1))
        phi = inv.poly_eval(coeffs, np.arange(7), 7)
        bad += inv.reconstruct_polynomial(phi, 7, 4) != coeffs + (0,) * (4 - d)
    out.append(_le(P, "toy_inverse_recovery", bad, 0, "p=7, degrees 0..4"))
    return out


def quadphase(seed: int, M: int = 35) -> list[Record]:
    P = "quadphase"
    st = C.quad_phase_stats(M)
    return [
        _le(P, "lambda4_equals_one", abs(st.lambda4 - 1), 1e-10, f"M={M} lambda4={st.lambda4.real:.12f}"),
        _le(P, "spectral_gauss_bound", st.max_spectral, st.gauss_bound + 1e-9, f"M={M}"),
    ]


def counterexamples(seed: int, threads: int | None = None) -> list[Record]:
    P = "counterexamples"
    out = quadphase(seed, 101)
    out = [Record(P, r.check, r.passed, r.measured, r.threshold, r.detail) for r in out]

    st = C.quad_bohr_stats(20001, 20)
    out.append(_le(P, "bohr_density", abs(st.density - 1 / 20) / (1 / 20), 0.2, "M=20001 w=20, relative error"))
    out.append(_le(P, "bohr_fourier_small", st.max_nonzero_coeff / st.density, 0.2, "max coefficient / alpha"))
    out.append(_ge(P, "bohr_ap4_excess", st.excess_ratio, 3.0, f"count={st.ap4_count} random={st.random_ap4:.1f}"))

    br = C.block_random_counterexample(64, seed)
    corr = br.block_correlations()
    out.append(_le(P, "block_correlation_one", float(np.max(np.abs(corr - 1))), 1e-12, "N=64"))
    u2 = un.gowers_norm_recursive(br.function, 2).value
    out.append(_le(P, "block_random_u2", u2**4 * 64**2, 100.0, f"N^2 ||f||_U2^4, seed={seed}"))

    an = C.almost_nil_function(1600, 0.25)
    u3 = un.gowers_norm_recursive(an.function, 3, threads).value
    qc = C.max_quadratic_correlation(an.function)[0]
    out.append(_ge(P, "almost_nil_u3", u3, 0.05, "M=1600 box=1/4"))
    out.append(_le(P, "almost_nil_quadratic_corr", qc / u3, 0.5, "max quadratic correlation / U3"))
    return out


def nilseq_checks(seed: int) -> list[Record]:
    P = "nilseq"
    rng = np.random.default_rng(seed)
    worst = 0.0
    for v in rng.uniform(-1000, 1000, size=(2000, 3)):
        g = nl.HeisenbergElement(*v)
        r = nl.heisenberg_reduce(g)
        back = r.rep * r.gamma
        worst = max(worst, max(abs(a - b) for a, b in zip(back.entries(), g.entries())))
    out = [_le(P, "reduce_round_trip", worst, 1e-9, "2000 random elements")]

    ns = nl.bracket_nilsequence(10)
    err = max(abs(ns(n) - nl.bracket_phase(10, n)) for n in range(1001))
    out.append(_le(P, "bracket_dual_path", err, 1e-9, "L=10, 0<=n<=1000"))

    al, be, ga = Fraction(1, 3), Fraction(2, 7), Fraction(5, 11)
    ok = nl.is_polynomial_map(lambda n: nl.HeisenbergElement(al * n, be * n, ga * n * n), nl.heisenberg_filtration())
    out.append(Record(P, "polynomial_map_accepted", ok.holds, float(ok.holds), 1.0))
    rej = nl.is_polynomial_map(lambda n: nl.HeisenbergElement(0, 0, math.exp(n)), nl.heisenberg_filtration())
    out.append(Record(P, "non_polynomial_rejected", not rej.holds, float(not rej.holds), 1.0))

    w = nl.weyl_diagnostic([0, 0, math.sqrt(2)], 10**4, 0.1, q_max=1000)
    out.append(_le(P, "weyl_irrational_small", abs(w.exp_sum), 0.05, "sqrt(2) n^2, N=10^4"))
    w = nl.weyl_diagnostic([0, Fraction(3, 7)], 1000, 0.1)
    out.append(_le(P, "weyl_rational_q", abs(w.q - 7) + w.quality, 0, "3n/7"))
    return out


def roth_checks(seed: int) -> list[Record]:
    P = "roth"
    A = C.behrend_set(3000)
    tr = roth.run_increment_loop(A, 3000)
    gain = float("-inf")
    if tr.steps:
        s0 = tr.steps[0]
        recount = sum(1 for x in s0.progression.elements() if x in A)
        a = Fraction(len(A), 3000)
        gain = float(Fraction(recount, s0.progression.length) - a - Fraction(1, 8) * a * a)
    out = [
        _ge(P, "behrend_increment_steps", len(tr.steps), 1, f"exit={tr.final_exit}"),
        _ge(P, "behrend_first_gain", gain, 0.0, "recounted density - alpha - alpha^2/8"),
    ]
    rng = np.random.default_rng(seed)
    x, d = int(rng.integers(1, 400)), int(rng.integers(1, 200))
    planted = set(A) | {x, x + d, x + 2 * d}
    tr = roth.run_increment_loop(planted, 3000)
    w = tr.witness
    ok = tr.final_exit == "found_3ap" and w is not None and all(t in planted for t in w) and w[1] - w[0] == w[2] - w[1] > 0
    out.append(Record(P, "planted_3ap_found", ok, float(ok), 1.0, f"witness={w}"))
    return out


def run_preset(preset: str, seed: int = 0, threads: int | None = None, M: int | None = None) -> list[Record]:
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}; choose from {PRESETS}")
    table: dict[str, Callable[[], list[Record]]] = {
        "identities": lambda: identities(seed, threads),
        "quadphase": lambda: quadphase(seed, M or 35),
        "counterexamples": lambda: counterexamples(seed, threads),
        "nilseq": lambda: nilseq_checks(seed),
        "roth": lambda: roth_checks(seed),
    }
    if preset == "all":
        return [r for name in ("identities", "counterexamples", "nilseq", "roth") for r in table[name]()]
    return table[preset]()


def to_csv(records: list[Record]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in records:
        row = asdict(r)
        row["measured"] = repr(r.measured)
        row["threshold"] = repr(r.threshold)
        w.writerow(row)
    return buf.getvalue()


def format_table(records: list[Record]) -> str:
    width = max((len(r.check) for r in records), default=5)
    lines = [f"{'check':<{width}}  result  measured            threshold"]
    for r in records:
        lines.append(f"{r.check:<{width}}  {'PASS' if r.passed else 'FAIL'}    {r.measured:<18.6g}  {r.threshold:.6g}")
    return "\n".join(lines)
