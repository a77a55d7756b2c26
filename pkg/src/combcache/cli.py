"""Command-line front end.

Exit codes: 0 success, 1 axiom or check failure, 2 usage error, 3 I/O or
malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from math import comb, lcm
from pathlib import Path
from typing import Optional, Sequence

from . import analytics
from .constructions import DirectParams, direct_cpda, hybrid_cpda, mn_pda
from .errors import StructuralError
from .pda import dumps_array, find_useless_stars, load_array, verify_cpda, verify_pda
from .simulator import (
    DemandVector,
    NetworkInstance,
    demands,
    run_scheme_b,
    run_zy,
    scheme_b_array,
    simulate,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


def _write(text: str, out: Optional[str]):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _read_array(path: str):
    try:
        return load_array(path)
    except json.JSONDecodeError as exc:
        raise StructuralError(f"{path}: not valid JSON ({exc})") from None


def _report(array):
    return verify_cpda(array) if array.col_labels is not None else verify_pda(array)


# --- subcommands -------------------------------------------------------------

def cmd_construct(args) -> int:
    if args.kind == "mn":
        array = mn_pda(args.K, args.t)
    elif args.kind == "direct":
        array = direct_cpda(DirectParams(args.H, args.r, args.a, args.omega, args.lam))
    else:
        array = hybrid_cpda(_read_array(args.outer), _read_array(args.inner))
    report = _report(array)
    _write(dumps_array(array), args.out)
    print(report.summary(), file=sys.stderr if args.out in (None, "-") else sys.stdout)
    return EXIT_OK if report.is_pda else EXIT_FAIL


def cmd_verify(args) -> int:
    array = _read_array(args.path)
    report = verify_cpda(array, args.H) if array.col_labels is not None else verify_pda(array)
    if args.json:
        print(json.dumps(report.to_json(), indent=2))
    else:
        print(report.summary())
        if report.mu is not None:
            print(f"mu={report.mu} nu={report.nu}")
        counts = report.useless_star_count_per_column
        if counts is not None:
            uniform = report.uniform_useless_stars
            print(f"useless stars per column: {uniform if uniform is not None else list(counts)}")
        for v in report.violations:
            print(f"violation {v} at {list(v.cells)}")
    ok = report.is_cpda if array.col_labels is not None else report.is_pda
    return EXIT_OK if ok else EXIT_FAIL


def _minimal_bytes_cpda(array, mode: str) -> int:
    report = verify_cpda(array)
    if not report.is_cpda:
        raise ValueError(f"array is not a CPDA: {report.violations[0]}")
    rows, unit = array.F, 1
    if mode == "mds_coded":
        counts = find_useless_stars(array).counts
        rows = array.F - counts[0]
        unit = 1 if array.F <= 256 else 2
    mus = {len(v) for v in report.intersections.values()}
    return rows * lcm(unit, *mus)


def _demand_list(args, K: int, N: int) -> list[DemandVector]:
    if args.demand == "random":
        return demands(K, N, args.trials, seed=args.seed)
    if args.demand == "worst":
        # as many distinct requests as the library allows
        return [DemandVector(tuple(k % N + 1 for k in range(K)))]
    try:
        data = json.loads(Path(args.demand).read_text())
    except OSError as exc:
        raise OSError(f"cannot read demand file {args.demand}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise StructuralError(f"{args.demand}: not valid JSON ({exc})") from None
    rows = data if data and isinstance(data[0], list) else [data]
    return [DemandVector(tuple(row)) for row in rows]


def cmd_simulate(args) -> int:
    if args.scheme == "zy":
        k_tilde = args.u * comb(args.H - 1, args.r - 1)
        if not 0 < args.t < k_tilde:
            raise ValueError(f"need 0 < t < {k_tilde}, got t={args.t}")
        unit = 1 if args.H <= 256 else 2
        size = args.bytes or args.r * lcm(unit, comb(k_tilde, args.t))
        net = NetworkInstance.random(args.H, args.r, args.u, args.files, size, seed=args.seed)
        run = lambda d: run_zy(args.H, args.r, args.u, args.t, net, d)  # noqa: E731
    elif args.scheme == "b":
        p = DirectParams(args.H, args.r, args.a, args.omega, args.lam)
        array = scheme_b_array(p, args.K2, args.t2)
        size = args.bytes or _minimal_bytes_cpda(array, "mds_coded")
        net = NetworkInstance.for_array(array, args.files, size, seed=args.seed)
        run = lambda d: run_scheme_b(p, args.K2, args.t2, net, d)  # noqa: E731
    else:
        if args.scheme == "direct":
            array = direct_cpda(DirectParams(args.H, args.r, args.a, args.omega, args.lam))
        else:
            array = _read_array(args.array)
        size = args.bytes or _minimal_bytes_cpda(array, args.mode)
        net = NetworkInstance.for_array(array, args.files, size, seed=args.seed)
        run = lambda d: simulate(array, net, d, mode=args.mode, scheme=args.scheme)  # noqa: E731

    status = EXIT_OK
    for demand in _demand_list(args, net.K, net.N):
        result = run(demand)
        print(json.dumps(result.to_json(), separators=(",", ":")))
        if not result.ok:
            status = EXIT_FAIL
    return status


def cmd_compare(args) -> int:
    row = analytics.compare_row(args.H, args.r, args.a, args.K2, args.t2, convention=args.convention)
    _write(analytics.write_csv(analytics.COMPARE_HEADER, [row.csv_fields()]), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    rows = analytics.sweep_memory(args.H, args.r, args.u, schemes, args.a_max, args.lambda_max)
    _write(analytics.write_csv(analytics.SWEEP_HEADER, [r.csv_fields() for r in rows]), args.out)
    return EXIT_OK


# --- parser ------------------------------------------------------------------

def _direct_flags(p: argparse.ArgumentParser):
    p.add_argument("--H", type=int, required=True, help="number of relays")
    p.add_argument("--r", type=int, required=True, help="relays per user")
    p.add_argument("--a", type=int, required=True, help="row vector weight")
    p.add_argument("--omega", type=int, required=True, help="zeros in each column vector")
    p.add_argument("--lambda", dest="lam", type=int, required=True, help="agreement count")


def _sim_flags(p: argparse.ArgumentParser):
    p.add_argument("--files", type=int, default=4, help="library size N (default 4)")
    p.add_argument("--bytes", type=int, default=None, help="file size in bytes (default: smallest valid)")
    p.add_argument("--seed", type=int, default=0, help="seed for file contents and random demands")
    p.add_argument("--demand", default="random", help="'random', 'worst', or a JSON file with one or more demand vectors")
    p.add_argument("--trials", type=int, default=1, help="number of random demand vectors")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="combcache", description="CPDA coded caching for combination networks")
    sub = parser.add_subparsers(dest="command", required=True)

    con = sub.add_parser("construct", help="build an array and write it as JSON")
    kinds = con.add_subparsers(dest="kind", required=True)
    mn = kinds.add_parser("mn", help="MN PDA")
    mn.add_argument("--K", type=int, required=True)
    mn.add_argument("--t", type=int, required=True)
    d = kinds.add_parser("direct", help="direct CPDA")
    _direct_flags(d)
    hy = kinds.add_parser("hybrid", help="hybrid of a CPDA with a PDA")
    hy.add_argument("--outer", required=True, help="CPDA JSON file")
    hy.add_argument("--inner", required=True, help="PDA JSON file")
    for p in (mn, d, hy):
        p.add_argument("-o", "--out", default=None, help="output path (default stdout)")
        p.set_defaults(func=cmd_construct)

    ver = sub.add_parser("verify", help="check the PDA/CPDA axioms of a JSON array")
    ver.add_argument("path")
    ver.add_argument("--H", type=int, default=None, help="relay count (default: largest relay id)")
    ver.add_argument("--json", action="store_true", help="print the full report as JSON")
    ver.set_defaults(func=cmd_verify)

    sim = sub.add_parser("simulate", help="run placement and delivery bit-exactly")
    schemes = sim.add_subparsers(dest="scheme", required=True)
    arr = schemes.add_parser("cpda", help="a CPDA from a JSON file")
    arr.add_argument("--array", required=True)
    arr.add_argument("--mode", choices=("uncoded", "mds_coded"), default="uncoded")
    dsim = schemes.add_parser("direct", help="the direct CPDA")
    _direct_flags(dsim)
    dsim.add_argument("--mode", choices=("uncoded", "mds_coded"), default="uncoded")
    zy = schemes.add_parser("zy", help="MDS split plus per-relay MN")
    zy.add_argument("--H", type=int, required=True)
    zy.add_argument("--r", type=int, required=True)
    zy.add_argument("--u", type=int, required=True)
    zy.add_argument("--t", type=int, required=True)
    b = schemes.add_parser("b", help="direct CPDA hybridised with an MN PDA, MDS-coded")
    _direct_flags(b)
    b.add_argument("--K2", type=int, required=True)
    b.add_argument("--t2", type=int, required=True)
    for p in (arr, dsim, zy, b):
        _sim_flags(p)
        p.set_defaults(func=cmd_simulate)

    cmp_ = sub.add_parser("compare", help="closed-form ratio against ZY at lambda = omega = 1")
    cmp_.add_argument("--H", type=int, required=True)
    cmp_.add_argument("--r", type=int, required=True)
    cmp_.add_argument("--a", type=int, required=True)
    cmp_.add_argument("--K2", type=int, default=None)
    cmp_.add_argument("--t2", type=int, default=None)
    cmp_.add_argument("--convention", choices=("continuous", "exact"), default="continuous")
    cmp_.add_argument("-o", "--out", default=None, help="CSV path (default stdout)")
    cmp_.set_defaults(func=cmd_compare)

    sw = sub.add_parser("sweep", help="memory/load/subpacketization tradeoff points")
    sw.add_argument("--H", type=int, required=True)
    sw.add_argument("--r", type=int, required=True)
    sw.add_argument("--u", type=int, required=True)
    sw.add_argument("--schemes", default=",".join(analytics.SCHEMES), help="comma-separated subset of ZY,B,A,Repeat")
    sw.add_argument("--a-max", type=int, default=None)
    sw.add_argument("--lambda-max", type=int, default=None)
    sw.add_argument("-o", "--out", default=None, help="CSV path (default stdout)")
    sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StructuralError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AssertionError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
