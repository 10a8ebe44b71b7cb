"""Command-line driver.

Every command prints one JSON document on stdout.  Real numbers appear as
``{"value": float, "digits": str, "error_radius": float}``; integers that
may be large are decimal strings.  Exit codes: 0 success, 1 other error,
2 downgraded proof with --strict, 3 input error, 4 budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys

import mpmath

from . import __version__
from .analytic import Method, bf_weighted_sum, euler_partial, euler_statistics
from .bounds import ProofLevel, bach_bound, heuristic_bound, minkowski_bound
from .class_sat import (
    GRH_CONDITIONAL, HEURISTIC, RIGOROUS, SATURATION_VERIFIED, PipelineConfig,
    full_pipeline,
)
from .core_arith.field import build_field
from .core_arith.intervals import hi, lo, mid, precision
from .errors import BudgetExhausted, InputError, NFClassError

SCHEMA_VERSION = 1
EXIT_OK, EXIT_ERROR, EXIT_DOWNGRADED, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3, 4
# expand units whose coordinates stay below this many bits
_RAW_BITS = 256

log = logging.getLogger("nfclass")


# ------------------------------------------------------------ serialisation

def real(x, digits=30):
    """{value, digits, error_radius} for an mpmath interval or number."""
    with precision(256):
        if hasattr(x, "_mpi_"):
            m = mid(x)
            r = max(hi(x) - m, m - lo(x))
        else:
            m = mpmath.mpf(x)
            r = mpmath.mpf(0)
        if mpmath.isinf(m) or mpmath.isnan(m):
            return {"value": None, "digits": str(m), "error_radius": None}
        return {"value": float(m), "digits": mpmath.nstr(m, digits),
                "error_radius": float(mpmath.mpf(r))}


def element_json(x):
    return {"coords": [str(c) for c in x.coords], "den": str(x.den)}


def power_product_json(pp):
    return [{"base": element_json(x), "exp": str(e)} for x, e in pp.factors]


def _small(pp, K):
    if len(pp) == 0:
        return True
    bits = sum(abs(e) * max(max((abs(c).bit_length() for c in x.coords), default=0),
                            x.den.bit_length()) for x, e in pp.factors)
    return bits <= _RAW_BITS


def unit_json(pp, K, raw):
    if raw or not _small(pp, K):
        return {"power_product": power_product_json(pp)}
    return {"element": element_json(pp.expand(K))}


def field_json(K):
    return {"poly": K.poly_string(), "degree": K.n, "signature": [K.r1, K.r2],
            "disc": str(K.disc)}


def ideal_json(I, fb=None, vec=None):
    out = {"norm": str(I.norm),
           "hnf": [[str(c) for c in row] for row in I.hnf]}
    if fb is not None and vec is not None:
        out["factorization"] = [
            {"p": str(fb.primes[j].p), "e": fb.primes[j].e, "f": fb.primes[j].fdeg, "exp": e}
            for j, e in enumerate(vec) if e]
    return out


# ------------------------------------------------------------ parsing

def parse_poly(text):
    text = text.strip()
    if not text:
        raise InputError("empty polynomial")
    try:
        coeffs = [int(t) for t in text.replace(" ", "").split(",")]
    except ValueError:
        raise InputError(f"cannot parse coefficients: {text!r}") from None
    if len(coeffs) < 2:
        raise InputError("polynomial must have degree at least 1")
    if coeffs[0] == 0:
        raise InputError("leading coefficient is zero")
    return coeffs


def _polys(args):
    if getattr(args, "file", None):
        with open(args.file) as fh:
            lines = [ln.split("#")[0].strip() for ln in fh]
        return [parse_poly(ln) for ln in lines if ln]
    if not args.poly:
        raise InputError("--poly or --file is required")
    return [parse_poly(args.poly)]


def _config(args):
    return PipelineConfig(fb_bound=args.factor_base_bound, euler_start=args.euler_start,
                          tolerance=args.tolerance, seed=args.seed, threads=args.threads,
                          budget=args.budget, euler_inner=args.euler_inner)


_EXPECTED = {ProofLevel.FULL: SATURATION_VERIFIED, ProofLevel.GRH: GRH_CONDITIONAL,
             ProofLevel.HEURISTIC: HEURISTIC}
_EXPECTED_UNITS = {ProofLevel.FULL: RIGOROUS, ProofLevel.GRH: GRH_CONDITIONAL,
                   ProofLevel.HEURISTIC: HEURISTIC}


# ------------------------------------------------------------ commands

def _pipeline(args, coeffs):
    K = build_field(coeffs)
    level = ProofLevel.parse(args.proof)
    cg, U = full_pipeline(K, level, _config(args))
    downgraded = cg.proof != _EXPECTED[level] or U.proof != _EXPECTED_UNITS[level]
    return K, level, cg, U, downgraded


def _class_doc(K, cg, args):
    pres = cg.presentation
    return {
        "h": str(cg.h),
        "invariants": [str(d) for d in pres.invariants],
        "proof": cg.proof,
        "generators": [ideal_json(a, None, None) | {"order": str(d)}
                       for a, d in zip(cg.cyclic_gens, pres.invariants)],
        "principal_generators": [power_product_json(g) for g in cg.principal_gens]
        if args.raw else None,
    }


def _unit_doc(K, U, args):
    return {
        "w": U.w,
        "zeta": element_json(U.zeta),
        "rank": U.rank,
        "regulator": real(U.regulator),
        "fundamental_units": [unit_json(u, K, args.raw) for u in U.fund_units],
        "proof": U.proof,
    }


def cmd_classgroup(args, coeffs):
    K, level, cg, U, down = _pipeline(args, coeffs)
    doc = {"field": field_json(K), "level": level.value}
    doc.update(_class_doc(K, cg, args))
    doc["units"] = _unit_doc(K, U, args)
    doc["downgraded"] = down
    doc["notes"] = list(cg.notes)
    return doc, down


def cmd_unitgroup(args, coeffs):
    K, level, cg, U, down = _pipeline(args, coeffs)
    doc = {"field": field_json(K), "level": level.value}
    doc.update(_unit_doc(K, U, args))
    doc["downgraded"] = down
    doc["notes"] = list(cg.notes)
    return doc, down


def cmd_residue(args, coeffs):
    K = build_field(coeffs)
    method = Method.EULER if args.method in ("euler", Method.EULER.value) else Method.WEIGHTED
    X = args.X
    est = euler_partial(K, X) if method is Method.EULER else bf_weighted_sum(K, X)
    with precision(256):
        return {
            "field": field_json(K),
            "method": est.method.value,
            "X": str(X),
            "log_residue": {"value": float(est.log_residue),
                            "digits": mpmath.nstr(est.log_residue, 30),
                            "error_radius": float(est.fp_error)},
            "trunc_error": None if mpmath.isinf(est.trunc_error) else float(est.trunc_error),
            "fp_error": float(est.fp_error),
            "rigorous": method is Method.WEIGHTED,
        }, False


def cmd_bounds(args, coeffs):
    K = build_field(coeffs)
    return {"field": field_json(K), "minkowski": str(minkowski_bound(K)),
            "bach": str(bach_bound(K)), "heuristic": str(heuristic_bound(K))}, False


def cmd_verify(args, coeffs):
    """Run the pipeline and compare with the brute-force oracles where they apply."""
    from . import oracle
    K, level, cg, U, down = _pipeline(args, coeffs)
    doc = {"field": field_json(K), "level": level.value, "h": str(cg.h),
           "invariants": [str(d) for d in cg.invariants], "proof": cg.proof}
    checks = {}
    if K.n == 2 and K.disc < 0:
        h = oracle.forms_class_number(K.disc)
        checks["forms_class_number"] = {"expected": str(h), "ok": h == cg.h}
    if K.n == 2 and K.disc > 0:
        u = oracle.cf_fundamental_unit(K.disc)
        with precision(256):
            reg = u.regulator(256)
            ok = lo(U.regulator) <= reg <= hi(U.regulator)
        checks["cf_regulator"] = {"expected": real(reg), "ok": bool(ok)}
        h = oracle.indefinite_class_number(K.disc)
        checks["indefinite_class_number"] = {"expected": str(h), "ok": h == cg.h}
    if minkowski_bound(K) <= 50:
        t = oracle.tiny_class_group(K)
        checks["tiny_class_group"] = {"expected": [str(d) for d in t.invariants],
                                      "ok": list(t.invariants) == list(cg.invariants)}
    doc["checks"] = checks
    doc["ok"] = all(c["ok"] for c in checks.values())
    doc["downgraded"] = down
    return doc, down


def cmd_stats(args, coeffs_list):
    """Euler-product error statistics over quadratic fields."""
    from .oracle import is_fundamental
    X = args.X
    if coeffs_list:
        fields = [build_field(c) for c in coeffs_list]
    else:
        rng = random.Random(args.seed)
        seen, fields = set(), []
        while len(fields) < args.count:
            d = rng.randrange(-args.max_disc, args.max_disc)
            if d in (0, 1) or not is_fundamental(d) or d in seen:
                continue
            seen.add(d)
            # x^2 - d/4 or x^2 - x + (1-d)/4
            poly = [1, 0, -(d // 4)] if d % 4 == 0 else [1, -1, (1 - d) // 4]
            fields.append(build_field(poly))
    st = euler_statistics(fields, X)
    return {"X": str(X), "count": len(fields),
            "mean": st["mean"], "sd": st["sd"], "skewness": st["skewness"],
            "kurtosis": st["kurtosis"],
            "discs": [str(K.disc) for K in fields]}, False


_COMMANDS = {"classgroup": cmd_classgroup, "unitgroup": cmd_unitgroup, "residue": cmd_residue,
             "bounds": cmd_bounds, "verify": cmd_verify}


# ------------------------------------------------------------ entry point

def build_parser():
    ap = argparse.ArgumentParser(prog="nfclass", description="Class groups and unit groups of number fields.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, pipeline=False):
        p.add_argument("--poly", help="coefficients, highest degree first, comma separated")
        p.add_argument("--file", help="file with one polynomial per line")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--strict", action="store_true")
        if pipeline:
            p.add_argument("--proof", choices=[v.value for v in ProofLevel], default="grh")
            p.add_argument("--factor-base-bound", type=int, default=None)
            p.add_argument("--euler-start", type=int, default=1000)
            p.add_argument("--tolerance", type=float, default=0.05)
            p.add_argument("--euler-inner", choices=["truncated", "full"], default="truncated",
                           help="cut the inner Euler factors at NP < X, or keep all of them")
            p.add_argument("--threads", type=int, default=1)
            p.add_argument("--budget", type=int, default=10 ** 6)
            p.add_argument("--raw", action="store_true", help="emit units and generators as power products")

    for name in ("classgroup", "unitgroup", "verify"):
        common(sub.add_parser(name), pipeline=True)
    p = sub.add_parser("residue")
    common(p)
    p.add_argument("--method", choices=["euler", "weighted", "EulerProduct", "WeightedSum"], default="euler")
    p.add_argument("--X", type=int, default=100000)
    common(sub.add_parser("bounds"))
    p = sub.add_parser("stats")
    common(p)
    p.add_argument("--X", type=int, default=1000)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--max-disc", type=int, default=10 ** 6)
    return ap


def _error_doc(command, exc):
    code = getattr(exc, "code", "error")
    doc = {"schema_version": SCHEMA_VERSION, "command": command,
           "error": {"code": code, "message": str(exc)}}
    if isinstance(exc, InputError):
        status = EXIT_INPUT
    elif isinstance(exc, BudgetExhausted):
        status = EXIT_BUDGET
    else:
        status = EXIT_ERROR
    return doc, status


def run(argv=None):
    """(document, exit status) for a command line; never raises on field errors."""
    ap = build_parser()
    args = ap.parse_args(argv)
    cmd = args.command
    try:
        if cmd == "stats":
            polys = _polys(args) if (args.poly or args.file) else []
            body, down = cmd_stats(args, polys)
            doc = {"schema_version": SCHEMA_VERSION, "command": cmd}
            doc.update(body)
            return doc, EXIT_OK
        polys = _polys(args)
        fn = _COMMANDS[cmd]
        results, any_down = [], False
        for c in polys:
            body, down = fn(args, c)
            results.append(body)
            any_down = any_down or down
    except NFClassError as e:
        return _error_doc(cmd, e)
    except (ValueError, ZeroDivisionError) as e:
        return _error_doc(cmd, InputError(str(e)))
    doc = {"schema_version": SCHEMA_VERSION, "command": cmd}
    if getattr(args, "file", None):
        doc["results"] = results
    else:
        doc.update(results[0])
    status = EXIT_DOWNGRADED if (args.strict and any_down) else EXIT_OK
    return doc, status


def main(argv=None):
    doc, status = run(argv)
    json.dump(doc, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return status


if __name__ == "__main__":
    sys.exit(main())
