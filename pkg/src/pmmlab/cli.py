"""Command-line front end.

Exit codes: 0 success / Accept / verified, 1 Reject / not verified,
2 Undetermined, 64 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from . import achievability, bounds, capacity, info, tensor
from .fixtures import resolve
from .io import (
    InputError,
    dump_report,
    eps_decomposition_from_json,
    is_eps_decomposition,
    load_json,
    parse_rational,
    pattern_from_json,
    points_from_json,
    rank_decomposition_from_json,
)
from .pattern import Pattern, PatternError, mm_support

DEFAULT_SEED = 20240607
SEED_ENV = "PMMLAB_SEED"

EXIT_OK, EXIT_FALSE, EXIT_UNDETERMINED, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _floats(text: str, field: str) -> list[float]:
    try:
        return [float(parse_rational(x, field)) for x in text.split(",")]
    except InputError:
        raise
    except ValueError:
        raise InputError(field, f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str, field: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise InputError(field, f"expected comma-separated integers, got {text!r}") from None


def _load(name_or_path):
    return load_json(resolve(name_or_path))


def _pattern(arg) -> Pattern:
    return pattern_from_json(_load(arg), "pattern")


def _config(args, extra=None) -> capacity.SolverConfig:
    data = dict(extra or {})
    if getattr(args, "config", None):
        data.update(_load(args.config))
    data.setdefault("seed", args.seed)
    try:
        return capacity.SolverConfig.from_dict(data)
    except (capacity.CapacityError, TypeError) as exc:
        raise InputError("config", str(exc)) from None


def _membership_body(result: capacity.MembershipResult) -> dict:
    body = {
        "verdict": result.verdict,
        "rate": result.rate,
        "min_slack": result.min_slack,
        "slacks": result.slacks,
        "witness": result.witness,
    }
    if result.direction is not None:
        body["separation"] = {
            "t": result.direction,
            "t_dot_rate": result.direction_value,
            "h": result.h_value,
            "h_upper": result.h_upper,
            "gap": result.separation_gap,
        }
    if result.notes:
        body["notes"] = result.notes
    return body


def _verdict_exit(verdict: capacity.Verdict) -> int:
    return {capacity.Verdict.ACCEPT: EXIT_OK, capacity.Verdict.REJECT: EXIT_FALSE}.get(verdict, EXIT_UNDETERMINED)


def _bound_body(report: bounds.BoundReport) -> dict:
    witness = {k: (_membership_body(v) if isinstance(v, capacity.MembershipResult) else v)
               for k, v in report.witness.items() if k not in ("certificates",)}
    if "certificates" in report.witness:
        witness["certificates"] = [_membership_body(c) for c in report.witness["certificates"]]
    return {"bound": report.value, "formula": report.formula, "inputs": report.inputs,
            "witness": witness, "flags": report.flags}


def cmd_bound(args):
    pattern = _pattern(args.pattern)
    if args.rate is None:
        report = bounds.omega_s_pattern_bound(pattern, args.rank)
        body = _bound_body(report)
        body["omega_via_cohn_umans"] = bounds.omega_from_omega_s(report.value)
        return EXIT_OK, body, [f"omega_s <= {report.value:.6f}   (3 log {args.rank} / log {len(pattern)})"]
    rate = _floats(args.rate, "rate")
    try:
        report = bounds.rate_specific_bound(pattern, args.rank, rate, _config(args))
    except bounds.BoundRefused as exc:
        body = {"refused": str(exc), "membership": _membership_body(exc.certificate)}
        return _verdict_exit(exc.verdict), body, [f"refused: {exc}"]
    return EXIT_OK, _bound_body(report), [f"omega_s({args.rate}) <= {report.value:.6f}   (log {args.rank})"]


def cmd_capacity(args):
    extra = None
    if args.query:
        query = _load(args.query)
        points = points_from_json(query.get("pattern") if isinstance(query, dict) else None, "pattern")
        rate = query.get("rate")
        if not isinstance(rate, list):
            raise InputError("rate", "expected a list of numbers")
        rate = [float(parse_rational(r, f"rate[{n}]")) for n, r in enumerate(rate)]
        extra = query.get("config")
    else:
        if not args.pattern or not args.rate:
            raise UsageError("capacity needs --pattern and --rate, or --query")
        points = points_from_json(_load(args.pattern), "pattern")
        rate = _floats(args.rate, "rate")
    try:
        result = capacity.membership(points, rate, _config(args, extra))
    except capacity.CapacityError as exc:
        raise InputError("rate", str(exc)) from None
    lines = [f"verdict: {result.verdict.value}", f"min slack: {result.min_slack:.6g}"]
    if result.direction is not None:
        lines.append(f"separation t = {np.round(result.direction, 6).tolist()}  t.r = {result.direction_value:.6f}"
                     f"  h(t) <= {result.h_upper:.6f}")
    return _verdict_exit(result.verdict), _membership_body(result), lines


def cmd_simulate(args):
    pattern = _pattern(args.pattern)
    rate = _floats(args.rate, "rate")
    ntype = None
    if args.type:
        counts = _ints(args.type, "type")
        if len(counts) != len(pattern):
            raise InputError("type", f"expected {len(pattern)} counts (one per pattern triple)")
        ntype = info.NType(pattern.triples, counts)
    try:
        cfg = achievability.SimConfig(args.n, rate, args.trials, args.seed, ntype)
        report = achievability.simulate(pattern, cfg)
    except (achievability.SimulationError, info.DistributionError) as exc:
        raise InputError("simulate", str(exc)) from None
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["trial", "missing_cells"])
            writer.writerows(enumerate(report.missing))
    body = {
        "n": args.n, "rate": rate, "targets": report.targets, "trials": report.trials,
        "successes": report.successes, "failure_rate": report.failure_rate,
        "standard_error": report.standard_error, "missing_total": sum(report.missing),
        "predicted": report.predicted, "notes": report.notes, "seed": args.seed,
    }
    if args.timing:
        body["wall_clock"] = report.wall_clock
    lines = [f"targets {report.targets}, {report.trials} trials, {report.successes} full coverings",
             f"empirical failure rate {report.failure_rate:.4f} (se {report.standard_error:.4f})"]
    if report.predicted is not None:
        lines.append(f"union bound {report.predicted.union:.4g} (entropy estimate {report.predicted.union_estimate:.4g})")
    return EXIT_OK, body, lines


def cmd_verify(args):
    pattern = _pattern(args.pattern)
    target = tensor.from_pattern(pattern)
    modes = [m for m in ("border", "rank", "support_witness") if getattr(args, m)]
    if len(modes) != 1:
        raise UsageError("verify needs exactly one of --border, --rank, --support-witness")
    mode = modes[0]
    obj = _load(getattr(args, mode))
    if mode == "border":
        dec = eps_decomposition_from_json(obj)
        order = args.order if args.order is not None else dec.order
        if order != dec.order:
            raise InputError("order", f"--order {order} differs from the file's claimed order {dec.order}")
        ok = tensor.verify_border_decomposition(dec, target, order)
        body = {"mode": mode, "verified": ok, "terms": len(dec), "order": order}
    else:
        if is_eps_decomposition(obj):
            raise InputError("terms", "expected an exact decomposition (no eps-polynomials or order)")
        dec = rank_decomposition_from_json(obj)
        if mode == "rank":
            ok = tensor.verify_rank_decomposition(dec, target)
        else:
            ok = tensor.verify_support_rank_witness(dec, mm_support(pattern))
        body = {"mode": mode, "verified": ok, "terms": len(dec)}
    return (EXIT_OK if ok else EXIT_FALSE), body, [f"{mode} decomposition with {len(dec)} terms: {str(ok).lower()}"]


def cmd_suminq(args):
    if args.component:
        if args.q is None:
            raise UsageError("--component needs --q")
        q = _floats(args.q, "q")
        comps = []
        for n, spec in enumerate(args.component):
            path, sep, rate = spec.rpartition(":")
            if not sep:
                raise InputError(f"component[{n}]", "expected PATTERN:a,b,c")
            comps.append((pattern_from_json(_load(path), f"component[{n}]"), _floats(rate, f"component[{n}].rate")))
        try:
            report = bounds.sum_inequality_rate_bound(q, args.rank, comps, cfg=_config(args))
        except bounds.BoundRefused as exc:
            return _verdict_exit(exc.verdict or capacity.Verdict.UNDETERMINED), {"refused": str(exc)}, [f"refused: {exc}"]
        return EXIT_OK, _bound_body(report), [f"omega_s(mixed rate) <= {report.value:.6f}"]
    if not args.sizes:
        raise UsageError("suminq needs --sizes or --component")
    report = bounds.sum_inequality_omega(_ints(args.sizes, "sizes"), args.rank)
    lines = [f"omega_s <= {report.value:.6f}"] + [f"flag: {f}" for f in report.flags]
    return EXIT_OK, _bound_body(report), lines


def cmd_laser(args):
    obj = _load(args.input)
    try:
        support = [tuple(p) for p in obj["support"]]
        q = {p: float(parse_rational(v, f"Q[{n}]")) for n, (p, v) in enumerate(zip(support, obj["Q"]))}
        w = obj["witness"]
        witness = bounds.TightWitness(tuple(w["u"]), tuple(w["v"]), tuple(w["w"]))
        blocks, rates = {}, {}
        for n, block in enumerate(obj["blocks"]):
            at = tuple(block["at"])
            pat = block["pattern"]
            blocks[at] = _pattern(pat) if isinstance(pat, str) else pattern_from_json(pat, f"blocks[{n}].pattern")
            rates[at] = [float(parse_rational(r, f"blocks[{n}].rate")) for r in block["rate"]]
        asym = float(parse_rational(obj["asym_rank"], "asym_rank"))
    except (KeyError, TypeError) as exc:
        raise InputError("laser", f"missing or malformed field {exc}") from None
    try:
        report = bounds.laser_bound(support, blocks, q, rates, asym, witness, cfg=_config(args))
    except bounds.BoundRefused as exc:
        return _verdict_exit(exc.verdict or capacity.Verdict.REJECT), {"refused": str(exc)}, [f"refused: {exc}"]
    except (bounds.BoundError, KeyError) as exc:
        raise InputError("laser", str(exc)) from None
    lines = [f"omega_s(mixed rate) <= {report.value:.6f}",
             f"square form: omega_s <= {report.witness['omega_s_square']:.6f}"]
    return EXIT_OK, _bound_body(report), lines


def cmd_types(args):
    m, n = args.m, args.n
    if args.counts:
        counts = _ints(args.counts, "counts")
        t = info.NType(tuple(range(1, len(counts) + 1)), counts)
        size = info.type_class_size(t)
        h = info.entropy(t.distribution())
        lower = (t.n + 1) ** (-len(counts)) * 2 ** (t.n * h)
        upper = 2 ** (t.n * h)
        body = {"counts": counts, "n": t.n, "type_class_size": size, "entropy": h,
                "lower_estimate": lower, "upper_estimate": upper, "sandwich_holds": lower <= size <= upper * (1 + 1e-12)}
        return EXIT_OK, body, [f"|T| = {size}   bounds [{lower:.6g}, {upper:.6g}]"]
    if m is None or n is None:
        raise UsageError("types needs --m and --n, or --counts")
    try:
        types = info.enumerate_types(m, n)
    except info.DistributionError as exc:
        raise InputError("types", str(exc)) from None
    total = sum(info.type_class_size(t) for t in types)
    body = {"m": m, "n": n, "count": len(types), "polynomial_bound": (n + 1) ** m,
            "sum_of_class_sizes": total, "m_to_the_n": m**n}
    return EXIT_OK, body, [f"{len(types)} types of denominator {n} over {m} symbols",
                           f"sum of type-class sizes = {total} (m^n = {m**n})"]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pmmlab", description="Capacity regions and exponent bounds for partial matrix multiplication.")
    parser.add_argument("--json", action="store_true", help="emit a JSON report")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="emit a JSON report")
        p.add_argument("--seed", type=int, default=None)
        p.set_defaults(func=func)
        return p

    p = add("bound", cmd_bound, "omega_s bound from a pattern and a support-rank upper bound")
    p.add_argument("--pattern", required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--rate")
    p.add_argument("--config")

    p = add("capacity", cmd_capacity, "capacity-region membership with a certificate")
    p.add_argument("--pattern")
    p.add_argument("--rate")
    p.add_argument("--query")
    p.add_argument("--config")

    p = add("simulate", cmd_simulate, "Monte Carlo run of the random covering maps")
    p.add_argument("--pattern", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rate", required=True)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--type", help="comma-separated counts per pattern triple (restrict to one type class)")
    p.add_argument("--csv", help="write per-trial missing-cell counts here")
    p.add_argument("--timing", action="store_true", help="include wall-clock time in the report")

    p = add("verify", cmd_verify, "check rank, support-rank, or border decompositions exactly")
    p.add_argument("--pattern", required=True)
    p.add_argument("--border")
    p.add_argument("--order", type=int)
    p.add_argument("--rank")
    p.add_argument("--support-witness", dest="support_witness")

    p = add("suminq", cmd_suminq, "asymptotic sum inequality")
    p.add_argument("--sizes")
    p.add_argument("--rank", type=float, required=True)
    p.add_argument("--q")
    p.add_argument("--component", action="append", help="PATTERN:a,b,c (repeatable)")
    p.add_argument("--config")

    p = add("laser", cmd_laser, "laser-method bound for a block-tight tensor")
    p.add_argument("--input", required=True)
    p.add_argument("--config")

    p = add("types", cmd_types, "n-type enumeration and type-class sizes")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--counts")
    return parser


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        if args.seed is None:
            args.seed = default_seed()
        code, body, lines = args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=err)
        return EXIT_USAGE
    except InputError as exc:
        print(f"input error at {exc.field}: {exc}", file=err)
        return EXIT_USAGE
    except (PatternError, tensor.TensorError, info.DistributionError) as exc:
        print(f"input error: {exc}", file=err)
        return EXIT_USAGE
    if args.json:
        print(dump_report(args.command, body), file=out)
    else:
        print("\n".join(lines), file=out)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
