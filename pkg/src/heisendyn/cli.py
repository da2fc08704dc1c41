"""Command line entry point: heisendyn <subcommand> ...

Exit status 0 for any completed analysis (inconclusive included), 1 for
usage and parse errors, 2 when the pipeline finds contradictory evidence.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import ParseError, format_poly, parse_poly

SCHEMA = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# ---------------------------------------------------------------- output


def _float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g") if x != int(x) or abs(x) >= 1e17 else format(x, ".1f")


def to_json(obj, indent: int = 2, level: int = 0) -> str:
    """JSON with floats at 17 significant digits and fractions as "num/den"."""
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, Fraction):
        return json.dumps(str(obj.numerator) if obj.denominator == 1 else f"{obj.numerator}/{obj.denominator}")
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, complex):
        return to_json([obj.real, obj.imag], indent, level)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}{to_json(v, indent, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "to_json"):
        return to_json(obj.to_json(), indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(report: dict, args) -> None:
    text = to_json({"schema": SCHEMA, **report}) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(x) for x in row])


def _cell(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
    if isinstance(x, float):
        return format(x, ".17g")
    return x


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("HEISENDYN_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise UsageError(f"HEISENDYN_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise UsageError("HEISENDYN_THREADS must be positive")
        return n
    return os.cpu_count() or 1


def _pmap(fn, items, threads: int) -> list:
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(threads, len(items))) as ex:
        return list(ex.map(fn, items))


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _int_list(text: str) -> list:
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("expected positive integers")
    return vals


# ---------------------------------------------------------------- subcommands


@dataclass(frozen=True)
class _DecideJob:
    text: str
    budget: object


def _decide_one(job: _DecideJob):
    from .expansive import InvariantViolation, decide

    try:
        return decide(parse_poly(job.text), job.budget).to_json(), False
    except InvariantViolation as exc:
        out = exc.verdict.to_json()
        out["status"] = "contradiction"
        return out, True


def cmd_expansive(args) -> int:
    from .expansive import Budget

    for text in args.poly:
        parse_poly(text)
    skip = set(args.skip or [])
    budget = Budget(
        lopsided="lopsided" not in skip,
        neumann="neumann" not in skip,
        neumann_N=args.N,
        neumann_K=args.K,
        ideal="ideal" not in skip,
        localization="localization" not in skip,
        grid=args.grid,
        split_N=args.split_N,
        character="character" not in skip,
        representation="representation" not in skip,
        p_max=args.p_max,
        cocycle="cocycle" not in skip,
        exhaustive=not args.first,
    )
    results = _pmap(_decide_one, [_DecideJob(t, budget) for t in args.poly], _threads(args))
    verdicts = [r for r, _ in results]
    if args.csv:
        _write_csv(args.csv, ["polynomial", "status"], [(v["polynomial"], v["status"]) for v in verdicts])
    _emit({"command": "expansive", "verdicts": verdicts} if len(verdicts) > 1 else {"command": "expansive", **verdicts[0]}, args)
    return 2 if any(bad for _, bad in results) else 0


def cmd_qbin(args) -> int:
    from .qbinomial import norm_series, qbinom

    report = {"command": "qbin"}
    if args.n is not None:
        if args.k is None:
            raise UsageError("qbin: --n needs --k")
        report["qbinomial"] = {"n": args.n, "k": args.k, "coefficients": qbinom(args.n, args.k)}
    ns = norm_series(args.table)
    report["table"] = [{"n": n, "S": s, "T": t, "T_float": float(t)} for n, (s, t) in enumerate(zip(ns.S, ns.T))]
    report["blocks"] = [{"j": j, "sum": b, "sum_float": float(b)} for j, b in sorted(ns.blocks.items())]
    report["blocks_decreasing_from_4"] = ns.decreasing_from(4)
    if args.csv:
        _write_csv(args.csv, ["n", "S", "T", "T_float"], [(n, s, t, float(t)) for n, (s, t) in enumerate(zip(ns.S, ns.T))])
    _emit(report, args)
    return 0


def cmd_homoclinic(args) -> int:
    from .core import Box
    from .homoclinic import boundary_mass, build_kernel, homoclinic_point, membership_defect
    from .qbinomial import norm_series

    k = build_kernel(args.N)
    r = args.window
    if 2 * r > args.N:
        raise UsageError("homoclinic: window radius must be at most N/2")
    window = Box.centered(r, r, r * r)
    # x must be known on g x^-1 and g y^-1 for every window site g
    known = Box((-r - 1, r), (-r - 1, r), (-r * r - r, r * r + r))
    f = parse_poly("2-x^-1-y^-1")
    x = homoclinic_point(k, known)
    defect, site = membership_defect(x, f, window)
    T = norm_series(args.N + 1).T
    bound = boundary_mass(T, args.N)
    report = {
        "command": "homoclinic",
        "N": args.N,
        "window": r,
        "norm": k.norm,
        "defect": defect,
        "defect_site": None if site is None else list(site),
        "bound": bound,
        "within_bound": defect <= bound,
        "level_norms": [float(t) for t in k.level_norms],
    }
    if args.dump:
        with open(args.dump, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(k.dump())
    if args.csv:
        _write_csv(args.csv, ["r", "sigma"], [(n, t) for n, t in enumerate(k.level_norms)])
    _emit(report, args)
    return 0


def _cover_trial(job):
    from .cover import cover_experiment, random_configuration

    from .core import Box
    from .homoclinic import build_kernel

    seed, M_list, window, N = job

    rng = np.random.default_rng(seed)
    v = random_configuration(max(M_list), rng)
    pts = cover_experiment(v, M_list, Box.centered(window, window, window), build_kernel(max(N, 64)))
    return [p.to_json() for p in pts]


def cmd_cover(args) -> int:
    from .cover import shift_entropy_count

    M_list = args.M
    if M_list != sorted(M_list):
        raise UsageError("cover: --M must be increasing")
    N = 2 * (max(M_list) + args.window) + 1
    seeds = [args.seed + i for i in range(args.trials)]
    results = _pmap(_cover_trial, [(s, M_list, args.window, N) for s in seeds], _threads(args))
    trials = [{"seed": s, "points": pts} for s, pts in zip(seeds, results)]
    report = {
        "command": "cover",
        "M": M_list,
        "window": args.window,
        "trials": trials,
        "shift_entropy": shift_entropy_count(1),
        "all_within_bound": all(Fraction(p["d"]) <= Fraction(p["b"]) for t in trials for p in t["points"]),
    }
    if args.csv:
        rows = [(t["seed"], p["M"], p["topplings"], p["outside_max"], float(p["d"]), float(p["b"])) for t in trials for p in t["points"]]
        _write_csv(args.csv, ["seed", "M", "topplings", "outside_max", "d", "b"], rows)
    _emit(report, args)
    return 0


def cmd_entropy(args) -> int:
    from .cocycle import NotLinearError, decompose_linear, entropy_bound

    f = parse_poly(args.poly)
    try:
        d = decompose_linear(f)
    except NotLinearError as exc:
        raise UsageError(f"entropy: {exc}") from None
    e = entropy_bound(d, args.nodes)
    report = {
        "command": "entropy",
        "polynomial": format_poly(f),
        "value": e.value,
        "error": e.error,
        "cross_check": e.cross_check,
        "agreement": e.agreement,
        "decomposition": {"orientation": d.orientation, "shift": d.shift},
    }
    _emit(report, args)
    return 0


def cmd_inverse(args) -> int:
    from .expansive import NoSeriesSeed, lopsided_ideal_search, neumann_inverse

    f = parse_poly(args.poly)
    try:
        res = neumann_inverse(f, args.N, args.K)
    except NoSeriesSeed as exc:
        raise UsageError(f"inverse: {exc}") from None
    report = {
        "command": "inverse",
        "polynomial": format_poly(f),
        "N": res.N,
        "K": res.K,
        "seed": res.seed,
        "residual": res.residual,
        "residual_float": float(res.residual),
        "certifies": res.certifies,
        "support": len(res.u.support()),
    }
    cert = lopsided_ideal_search(f, neumann=res)
    report["lopsided_multiple"] = None if cert is None else {"q": cert.q, "margin": cert.lopsided.margin}
    if args.csv:
        _write_csv(args.csv, ["a", "b", "c", "coefficient"], [(*g, v) for g, v in res.u.items()])
    _emit(report, args)
    return 0


def _conjecture_row(n):
    from .qbinomial import conjecture_search

    rows = []
    for k in range(1, n // 2 + 1):
        if math.gcd(n, k) == 1:
            ev = conjecture_search(n, k)
            rows.append({"n": ev.n, "k": ev.k, "m": ev.m, "attempts": [list(a) for a in ev.attempts]})
    return rows


def cmd_conjecture(args) -> int:
    rows = [r for chunk in _pmap(_conjecture_row, range(2, args.n_max + 1), _threads(args)) for r in chunk]
    report = {
        "command": "conjecture",
        "n_max": args.n_max,
        "rows": rows,
        "found": sum(1 for r in rows if r["m"] is not None),
        "searched": len(rows),
    }
    if args.csv:
        _write_csv(args.csv, ["n", "k", "m"], [(r["n"], r["k"], "" if r["m"] is None else r["m"]) for r in rows])
    _emit(report, args)
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--csv", help="write the main series as CSV")
    common.add_argument("--threads", type=_positive, help="worker processes (default: HEISENDYN_THREADS or all cores)")

    p = _Parser(prog="heisendyn", description="Expansiveness, homoclinic points and entropy for Heisenberg group actions.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    e = sub.add_parser("expansive", parents=[common], help="decide expansiveness of one or more polynomials")
    e.add_argument("poly", nargs="+")
    e.add_argument("--grid", type=_positive, default=512)
    e.add_argument("--N", type=_positive, default=8, help="Neumann series order")
    e.add_argument("--K", type=_positive, default=24, help="central inverse truncation")
    e.add_argument("--split-N", dest="split_N", type=_positive, default=12)
    e.add_argument("--p-max", dest="p_max", type=_positive, default=8)
    e.add_argument(
        "--skip",
        action="append",
        choices=["lopsided", "neumann", "ideal", "localization", "character", "representation", "cocycle"],
    )
    e.add_argument("--first", action="store_true", help="stop at the first conclusive stage")
    e.set_defaults(func=cmd_expansive)

    q = sub.add_parser("qbin", parents=[common], help="norm series table of q-binomial differences")
    q.add_argument("--table", type=_positive, default=64)
    q.add_argument("--n", type=int)
    q.add_argument("--k", type=int)
    q.set_defaults(func=cmd_qbin)

    h = sub.add_parser("homoclinic", parents=[common], help="kernel of 2 - x^-1 - y^-1 and its membership defect")
    h.add_argument("--N", type=_positive, default=64)
    h.add_argument("--window", type=_positive, default=16)
    h.add_argument("--dump", help="write kernel coefficients as '(a,b,c) num/den' lines")
    h.set_defaults(func=cmd_homoclinic)

    c = sub.add_parser("cover", parents=[common], help="toppling and symbolic cover experiment")
    c.add_argument("--M", type=_int_list, default=[2, 4, 6, 8])
    c.add_argument("--window", type=_positive, default=1)
    c.add_argument("--trials", type=_positive, default=1)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_cover)

    en = sub.add_parser("entropy", parents=[common], help="entropy of a polynomial linear in x or y")
    en.add_argument("poly")
    en.add_argument("--nodes", type=_positive, default=256)
    en.set_defaults(func=cmd_entropy)

    i = sub.add_parser("inverse", parents=[common], help="truncated l1 inverse with exact residual")
    i.add_argument("poly", nargs="?", default="3+x+y+z")
    i.add_argument("--N", type=_positive, default=8)
    i.add_argument("--K", type=_positive, default=24)
    i.set_defaults(func=cmd_inverse)

    cj = sub.add_parser("conjecture", parents=[common], help="search for nonnegative q-binomial quotients")
    cj.add_argument("--n-max", dest="n_max", type=_positive, default=20)
    cj.set_defaults(func=cmd_conjecture)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return 1
        return args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
