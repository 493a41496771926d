"""Command-line entry point: gowers-lab <subcommand> [options].

Exit codes: 0 success, 2 usage or input error, 3 a check or certificate failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import constructions as C
from . import inverse as inv
from . import nilseq as nl
from . import progressions as pr
from . import roth, suite
from . import uniformity as un
from .ring import CyclicFunction, Indicator

EXIT_OK, EXIT_USAGE, EXIT_CHECK = 0, 2, 3


class UsageError(Exception):
    pass


class CheckFailed(Exception):
    def __init__(self, record: Any):
        super().__init__("check failed")
        self.record = record


def _dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _load_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _load_function(path: str) -> CyclicFunction:
    try:
        return CyclicFunction.from_json(_load_json(path))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path} is not a function record: {exc}") from exc


def _load_integer_set(path: str) -> tuple[list[int], int]:
    obj = _load_json(path)
    try:
        elems = [int(v) for v in obj["subset"]]
        N = int(obj["N"]) if "N" in obj else max(elems, default=1)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path} needs 'subset' (and optionally 'N'): {exc}") from exc
    return elems, N


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except ValueError as exc:
        raise UsageError(f"not a rational number: {text!r}") from exc


def _coeff_list(text: str) -> list:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        try:
            out.append(Fraction(tok))
        except ValueError:
            try:
                out.append(float(tok))
            except ValueError as exc:
                raise UsageError(f"bad coefficient {tok!r}") from exc
    return out


# ---------------------------------------------------------------------------
# subcommands


def cmd_count_aps(args) -> dict:
    obj = _load_json(args.input)
    if "modulus" in obj and "subset" in obj:
        A = Indicator.from_json(obj)
        return {"modulus": A.modulus, "k": args.k, "count": pr.count_aps_cyclic(A, args.k, nontrivial=not args.trivial)}
    if "subset" in obj:
        elems, N = _load_integer_set(args.input)
        return {"N": N, "k": args.k, "count": pr.count_aps_integers(elems, args.k)}
    f = _load_function(args.input)
    lam = pr.lambda_k([f] * args.k)
    return {"modulus": f.modulus, "k": args.k, "lambda": lam}


def cmd_gowers_norm(args) -> dict:
    f = _load_function(args.input)
    if args.N is not None:
        return {"s": args.s, "N": args.N, "value": un.gowers_norm_interval(f, args.N, args.s, threads=args.threads)}
    return un.gowers_norm(f, args.s, args.method, threads=args.threads).to_json()


def cmd_inverse_u2(args) -> dict:
    f = _load_function(args.input)
    found = inv.inverse_u2(f, args.delta)
    out = {"xi": found.xi, "correlation": found.correlation, "u2": found.u2, "delta": found.delta, "guaranteed": found.guaranteed}
    if found.guaranteed and found.correlation < found.delta**2 - 1e-9:
        raise CheckFailed(out)
    return out


def cmd_toy_inverse(args) -> dict:
    p, s = args.p, args.s
    if args.input:
        obj = _load_json(args.input)
        table = np.asarray(obj["values"], dtype=np.int64) % p
        expected = None
    else:
        expected = [int(c) % p for c in args.coeffs.split(",")]
        table = inv.poly_eval(expected, np.arange(p), p)
    try:
        coeffs = inv.reconstruct_polynomial(table, p, s)
    except inv.ReconstructionError as exc:
        raise CheckFailed({"p": p, "s": s, "error": str(exc)}) from exc
    out: dict[str, Any] = {"p": p, "s": s, "coeffs": list(coeffs)}
    if p ** 3 <= 10**6 and s >= 1:
        rep = inv.cocycle_check(table, p, s)
        out["cocycle"] = {"cocycle": rep.cocycle, "top_additive": rep.top_additive,
                          "coeff_degrees_ok": rep.coeff_degrees_ok, "recovered": rep.recovered}
    if expected is not None:
        padded = (expected + [0] * (s + 1))[: s + 1]
        out["expected"] = padded
        if list(coeffs) != padded:
            raise CheckFailed(out)
    return out


_CONSTRUCT_KINDS = {
    "behrend": "behrend",
    "quadphase": "quad_phase",
    "bohr": "quad_bohr",
    "blockrandom": "block_random",
    "almostnil": "almost_nil",
}


def cmd_construct(args) -> dict:
    params = {k: v for k, v in (("N", args.N), ("M", args.M), ("w", args.w), ("box_fraction", args.box_fraction)) if v is not None}
    params["seed"] = args.seed
    try:
        spec = C.ConstructionSpec(_CONSTRUCT_KINDS[args.kind], params)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return C.build(spec, seed=args.seed)


def cmd_nilseq(args) -> dict:
    if args.action == "bracket":
        ns = nl.bracket_nilsequence(args.L)
        direct = nl.bracket_phase(args.L, args.n)
        via = ns(args.n)
        return {"L": args.L, "n": args.n, "bracket": direct, "nilsequence": via, "error": abs(direct - via)}
    if args.action == "eval":
        ns = nl.smoothed_bracket_nilsequence(args.L, args.margin) if args.smooth else nl.bracket_nilsequence(args.L)
        vals = [ns(n) for n in range(args.n_min, args.n_max + 1)]
        return {"L": args.L, "smooth": args.smooth, "n_min": args.n_min, "values": vals}
    if args.action == "check-poly":
        a, b, g = _fraction(args.alpha), _fraction(args.beta), _fraction(args.gamma)
        res = nl.is_polynomial_map(lambda n: nl.HeisenbergElement(a * n, b * n, g * n * n), nl.heisenberg_filtration())
        return {"holds": res.holds, "witness": None if res.witness is None else [str(t) for t in res.witness]}
    coeffs = _coeff_list(args.coeffs)
    rep = nl.weyl_diagnostic(coeffs, args.N, args.delta, args.q_max)
    return {"exp_sum": rep.exp_sum, "abs": abs(rep.exp_sum), "q": rep.q,
            "approx_errors": list(rep.approx_errors), "quality": rep.quality}


def cmd_roth(args) -> dict:
    elems, N = _load_integer_set(args.input)
    cfg = roth.IncrementConfig.from_json(_load_json(args.config)) if args.config else roth.IncrementConfig()
    try:
        trace = roth.run_increment_loop(elems, N, cfg)
    except roth.EngineFailure as exc:
        raise CheckFailed({"error": str(exc), "certificate": exc.certificate}) from exc
    out = trace.to_json()
    if args.trace:
        Path(args.trace).write_text(_dumps(out))
    return out


def cmd_suite(args) -> dict:
    if not args.preset:
        raise UsageError("empty preset")
    if args.preset not in suite.PRESETS:
        raise UsageError(f"unknown preset {args.preset!r}; choose from {suite.PRESETS}")
    records = suite.run_preset(args.preset, seed=args.seed, threads=args.threads, M=args.M)
    if args.csv:
        Path(args.csv).write_text(suite.to_csv(records))
    out: dict[str, Any] = {
        "preset": args.preset,
        "seed": args.seed,
        "passed": all(r.passed for r in records),
        "records": [r.__dict__ for r in records],
    }
    if args.preset == "quadphase":
        st = C.quad_phase_stats(args.M or 35)
        out["lambda4"] = round(st.lambda4.real, 12)
        out["M"] = args.M or 35
    if not args.json:
        print(suite.format_table(records), file=sys.stderr)
    if not out["passed"]:
        raise CheckFailed(out)
    return out


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON result here instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None, help="worker threads (default: GOWERS_LAB_THREADS or CPU count)")
    common.add_argument("--json", action="store_true", help="machine-readable output only")

    p = argparse.ArgumentParser(prog="gowers-lab", description="Fourier and Gowers-norm tools for additive combinatorics")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("count-aps", parents=[common], help="count k-APs in a set or Lambda_k of a function")
    s.add_argument("--input", required=True)
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--trivial", action="store_true", help="include y = 0 in cyclic counts")
    s.set_defaults(func=cmd_count_aps)

    s = sub.add_parser("gowers-norm", parents=[common], help="U^s norm on Z/MZ or on [N]")
    s.add_argument("--input", required=True)
    s.add_argument("--s", type=int, required=True)
    s.add_argument("--method", choices=("auto", "naive", "recursive"), default="auto")
    s.add_argument("--N", type=int, help="normalise as a U^s[N] norm")
    s.set_defaults(func=cmd_gowers_norm)

    s = sub.add_parser("inverse-u2", parents=[common], help="find the correlating character")
    s.add_argument("--input", required=True)
    s.add_argument("--delta", type=float, default=1.0)
    s.set_defaults(func=cmd_inverse_u2)

    s = sub.add_parser("toy-inverse", parents=[common], help="recover a polynomial over F_p from its values")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--s", type=int, required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--coeffs", help="comma-separated a_0,...,a_d")
    g.add_argument("--input", help='JSON {"values": [...]} with p entries')
    s.set_defaults(func=cmd_toy_inverse)

    s = sub.add_parser("construct", parents=[common], help="build an extremal example")
    s.add_argument("kind", choices=sorted(_CONSTRUCT_KINDS))
    s.add_argument("--N", type=int)
    s.add_argument("--M", type=int)
    s.add_argument("--w", type=int)
    s.add_argument("--box-fraction", type=float)
    s.set_defaults(func=cmd_construct)

    s = sub.add_parser("nilseq", parents=[common], help="Heisenberg nilsequences and Weyl sums")
    s.add_argument("action", choices=("eval", "check-poly", "bracket", "weyl"))
    s.add_argument("--L", type=int, default=10)
    s.add_argument("--n", type=int, default=0)
    s.add_argument("--n-min", type=int, default=0)
    s.add_argument("--n-max", type=int, default=99)
    s.add_argument("--smooth", action="store_true")
    s.add_argument("--margin", type=float, default=1e-6)
    s.add_argument("--alpha", default="1/3")
    s.add_argument("--beta", default="2/7")
    s.add_argument("--gamma", default="5/11")
    s.add_argument("--coeffs", default="0,3/7", help="a_0,a_1,... ; rationals stay exact")
    s.add_argument("--N", type=int, default=1000)
    s.add_argument("--delta", type=float, default=0.1)
    s.add_argument("--q-max", type=int)
    s.set_defaults(func=cmd_nilseq)

    s = sub.add_parser("roth-increment", parents=[common], help="run the density-increment loop")
    s.add_argument("--input", required=True, help='JSON {"N": N, "subset": [...]}')
    s.add_argument("--config", help="JSON overrides for IncrementConfig")
    s.add_argument("--trace", help="also write the trace here")
    s.set_defaults(func=cmd_roth)

    s = sub.add_parser("suite", parents=[common], help="run a preset battery of checks")
    s.add_argument("--preset", required=True)
    s.add_argument("--M", type=int, help="modulus for the quadphase preset")
    s.add_argument("--csv", help="write measured quantities as CSV")
    s.set_defaults(func=cmd_suite)
    return p


def _emit(result: dict, args) -> None:
    text = _dumps(result)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    try:
        result = args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CheckFailed as exc:
        _emit(exc.record, args)
        print("error: check failed", file=sys.stderr)
        return EXIT_CHECK
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(result, args)
    return EXIT_OK


def main() -> None:
    sys.exit(run())
