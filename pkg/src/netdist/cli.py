"""Command-line front end: validate, distance, neighbors, sequence, enumerate, selftest."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import __version__
from .agreement import agreement_distance
from .builder import mag_to_pr_sequence, pr_to_snpr_sequence
from .canonical import canonical_key
from .distances import DEFAULT_BUDGET, pr_distance, rspr_distance, snpr_distance
from .enewick import export_dot, parse_enewick, write_enewick
from .errors import BudgetExceededError, NetdistError, ParseError
from .generate import enumerate_space, random_network
from .network import TaxaSet, validate
from .rearrange import OpSet, enumerate_neighbors
from .sequences import verify_sequence

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_BUDGET = 3

log = logging.getLogger("netdist")


def _setup_logging() -> None:
    level = os.environ.get("NETDIST_LOG", "WARNING").upper()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level, logging.WARNING))


def _load_networks(args: list[str]) -> list:
    """Each argument is an inline eNewick string or a path to a file of them."""
    nets = []
    for arg in args:
        if os.path.exists(arg):
            with open(arg, "r", encoding="utf-8") as fh:
                for line in fh:
                    stripped = line.strip()
                    if not stripped or stripped.startswith("#"):
                        continue
                    nets.append(parse_enewick(stripped))
        else:
            nets.append(parse_enewick(arg.strip()))
    return nets


def _emit(nets, fmt: str) -> None:
    if fmt == "enewick":
        for g in nets:
            print(write_enewick(g))
    elif fmt == "dot":
        for g in nets:
            print(export_dot(g))
    else:
        print(json.dumps([write_enewick(g) for g in nets]))


def cmd_validate(args) -> int:
    code = EXIT_OK
    reports = []
    for arg in args.inputs:
        try:
            nets = _load_networks([arg])
        except ParseError as exc:
            reports.append({"input": arg, "ok": False, "error": exc.message, "position": exc.position})
            code = EXIT_DATA
            continue
        for g in nets:
            rep = validate(g)
            reports.append({"input": arg, "ok": rep.ok, "violations": rep.violations})
            if not rep.ok:
                code = EXIT_DATA
    print(json.dumps(reports, indent=2))
    return code


def cmd_distance(args) -> int:
    a, b = _load_networks([args.first, args.second])[:2]
    if args.metric == "ad":
        res = agreement_distance(a, b)
    elif args.metric == "pr":
        res = pr_distance(a, b, cap=args.cap, budget_states=args.budget_states)
    elif args.metric == "snpr":
        res = snpr_distance(a, b, cap=args.cap, budget_states=args.budget_states)
    else:
        res = rspr_distance(a, b, budget_states=args.budget_states)
    print(json.dumps(res.to_json(include_witness=args.witness), indent=2))
    return EXIT_OK


def cmd_neighbors(args) -> int:
    (g,) = _load_networks([args.network])[:1]
    ops = OpSet(args.ops)
    nbrs = enumerate_neighbors(g, ops, cap=args.cap)
    if args.format == "json":
        out = [
            {"op": op.to_json(), "network": write_enewick(h)}
            for op, _, h in nbrs
        ]
        print(json.dumps(out, indent=2))
    else:
        _emit([h for _, _, h in nbrs], args.format)
    return EXIT_OK


def cmd_sequence(args) -> int:
    a, b = _load_networks([args.first, args.second])[:2]
    if args.via == "mag":
        res = agreement_distance(a, b)
        seq = mag_to_pr_sequence(a, b, res.witness)
        if args.ops == "snpr":
            seq = pr_to_snpr_sequence(seq)
    else:
        fn = snpr_distance if args.ops == "snpr" else pr_distance
        res = fn(a, b, cap=args.cap, budget_states=args.budget_states)
        seq = res.witness
    rep = verify_sequence(seq)
    assert rep.ok, "produced sequence failed verification"
    print(json.dumps(seq.to_json(), indent=2))
    return EXIT_OK


def cmd_enumerate(args) -> int:
    taxa = TaxaSet.numbered(args.n)
    space = enumerate_space(taxa, args.max_r)
    _emit(list(space.values()), args.format)
    return EXIT_OK


def cmd_selftest(args) -> int:
    failures = 0

    def report(name: str, ok: bool) -> None:
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'} {name}")
        if not ok:
            failures += 1

    t1 = parse_enewick("((1,2),3);")
    t2 = parse_enewick("((1,3),2);")
    report("parse/validate", validate(t1).ok and validate(t2).ok)
    report("roundtrip", canonical_key(parse_enewick(write_enewick(t1))) == canonical_key(t1))
    report("rspr distance", rspr_distance(t1, t2).value == 1)
    report("agreement distance", agreement_distance(t1, t2).value == 1)
    res = agreement_distance(t1, t2)
    seq = mag_to_pr_sequence(t1, t2, res.witness)
    report("sequence builder", verify_sequence(seq).ok and len(seq) == 1)
    rnd = random_network(TaxaSet.numbered(4), 2, 0)
    report("random network", validate(rnd).ok)
    report(
        "neighbors",
        len(enumerate_neighbors(t1, OpSet.RSPR)) == 2,
    )
    return EXIT_OK if failures == 0 else EXIT_DATA


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="netdist",
        description="Rearrangement and agreement distances for rooted binary phylogenetic networks",
    )
    p.add_argument("--version", action="version", version=f"netdist {__version__}")
    p.add_argument("--threads", type=int, default=1, help="accepted for compatibility; execution is sequential")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized commands")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="parse and validate networks")
    v.add_argument("inputs", nargs="+", help="eNewick strings or files")
    v.set_defaults(fn=cmd_validate)

    d = sub.add_parser("distance", help="compute a distance between two networks")
    d.add_argument("--metric", choices=["ad", "pr", "snpr", "rspr"], default="ad")
    d.add_argument("--cap", type=int, default=None, help="max reticulations in intermediates")
    d.add_argument("--budget-states", type=int, default=DEFAULT_BUDGET)
    d.add_argument("--witness", action="store_true", help="include the witness in the output")
    d.add_argument("first")
    d.add_argument("second")
    d.set_defaults(fn=cmd_distance)

    n = sub.add_parser("neighbors", help="enumerate the rearrangement neighborhood")
    n.add_argument("--ops", choices=["pr", "snpr", "rspr"], default="pr")
    n.add_argument("--cap", type=int, default=None)
    n.add_argument("--format", choices=["json", "enewick", "dot"], default="json")
    n.add_argument("network")
    n.set_defaults(fn=cmd_neighbors)

    s = sub.add_parser("sequence", help="produce an explicit rearrangement sequence")
    s.add_argument("--ops", choices=["pr", "snpr"], default="pr")
    s.add_argument("--via", choices=["bfs", "mag"], default="bfs")
    s.add_argument("--cap", type=int, default=None)
    s.add_argument("--budget-states", type=int, default=DEFAULT_BUDGET)
    s.add_argument("first")
    s.add_argument("second")
    s.set_defaults(fn=cmd_sequence)

    e = sub.add_parser("enumerate", help="enumerate all networks on n taxa up to a cap")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--max-r", type=int, default=0)
    e.add_argument("--format", choices=["json", "enewick", "dot"], default="enewick")
    e.set_defaults(fn=cmd_enumerate)

    t = sub.add_parser("selftest", help="run a quick internal battery")
    t.set_defaults(fn=cmd_selftest)
    return p


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except ParseError as exc:
        print(json.dumps({"error": exc.message, "position": exc.position}), file=sys.stderr)
        return EXIT_DATA
    except BudgetExceededError as exc:
        print(json.dumps({"error": str(exc), "lower_bound": exc.lower_bound}), file=sys.stderr)
        return EXIT_BUDGET
    except NetdistError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
