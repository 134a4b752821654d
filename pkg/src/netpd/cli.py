"""Command-line front end: ``netpd solve|score|reduce|gen|verify``.

Exit codes: 0 success, 1 verification failure, 2 parse error,
3 validation or construction-precondition error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from functools import partial
from pathlib import Path

from . import checks
from .fptsolve import solve
from .generate import random_network
from .hardness import (
    ConstructionError,
    format_penalty_sum,
    format_subset_product,
    nap_to_max_network_pd,
    parse_nap,
    parse_subset_product,
    parse_x3c,
    subset_product_to_penalty_sum,
    x3c_to_subset_product,
)
from .netmodel import InvalidNetworkError, NpdnSyntaxError, format_number, parse_network, require_valid, serialize
from .oracle import InstanceTooLarge, oracle_solve
from .pdscore import gamma_map, netpd_score

EXIT_OK, EXIT_VERIFY, EXIT_PARSE, EXIT_INVALID = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def exact(x) -> str:
    x = Fraction(x)
    text = format_number(x)
    return text if x.denominator == 1 else f"{text} (~{float(x):.6f})"


def _read(path: str) -> tuple[str, str]:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_PARSE) from exc
    return data.decode("utf-8"), hashlib.sha256(data).hexdigest()


def _has_target(text: str) -> bool:
    return any(line.split("#", 1)[0].split()[:1] == ["D"] for line in text.splitlines())


# ---------------------------------------------------------------------------
# commands; each returns (report dict, human-readable lines, exit code)


def cmd_solve(args) -> tuple[dict, list[str], int]:
    text, digest = _read(args.file)
    net = parse_network(text)
    if args.k is not None:
        net.k = args.k
    require_valid(net)
    sol = solve(net)
    report = {
        "input_sha256": digest,
        "k": net.k,
        "score": format_number(sol.score),
        "score_decimal": float(sol.score),
        "witness": sol.sorted_witness(),
        "branches_explored": sol.branches_explored,
    }
    lines = [
        f"score: {exact(sol.score)}",
        f"witness: {' '.join(sol.sorted_witness()) or '(empty)'}",
        f"branches: {sol.branches_explored}",
    ]
    if _has_target(text):
        report["target"] = format_number(net.D)
        report["meets_target"] = sol.score >= net.D
        lines.append(f"D = {exact(net.D)}: {'yes' if sol.score >= net.D else 'no'}")
    code = EXIT_OK
    if args.oracle_check:
        best = oracle_solve(net).best_score
        report["oracle_score"] = format_number(best)
        report["oracle_match"] = best == sol.score
        lines.append(f"oracle: {exact(best)} ({'match' if best == sol.score else 'MISMATCH'})")
        if best != sol.score:
            code = EXIT_VERIFY
    return report, lines, code


def cmd_score(args) -> tuple[dict, list[str], int]:
    text, digest = _read(args.file)
    net = parse_network(text)
    require_valid(net)
    taxa = [t for t in (args.taxa or "").split(",") if t]
    unknown = sorted(set(taxa) - net.labels())
    if unknown:
        raise CliError(f"unknown taxon: {', '.join(unknown)}", EXIT_INVALID)
    gamma = gamma_map(net, taxa)
    score = netpd_score(net, taxa)
    nm = net.name
    table = [
        {"edge": [nm[u], nm[v]], "weight": format_number(net.weight[(u, v)]), "gamma": format_number(gamma[(u, v)])}
        for u, v in net.edges
    ]
    report = {
        "input_sha256": digest,
        "taxa": sorted(taxa),
        "score": format_number(score),
        "score_decimal": float(score),
        "gamma": table,
    }
    lines = [f"score: {exact(score)}", "edge\tweight\tgamma"]
    lines += [f"{r['edge'][0]}->{r['edge'][1]}\t{r['weight']}\t{r['gamma']}" for r in table]
    return report, lines, EXIT_OK


def cmd_reduce(args) -> tuple[dict, list[str], int]:
    text, digest = _read(args.input)
    report: dict = {"input_sha256": digest, "kind": args.kind, "output": args.output}
    if args.kind == "x3c2sp":
        sp = x3c_to_subset_product(parse_x3c(text))
        out = format_subset_product(sp)
        audit = {"M": sp.M, "k": sp.k}
    elif args.kind == "sp2ps":
        ps = subset_product_to_penalty_sum(parse_subset_product(text))
        out = format_penalty_sum(ps)
        audit = {"Q": ps.Q, "H": ps.H, "A": ps.A, "D": format_number(ps.D)}
    else:
        net, gadget = nap_to_max_network_pd(parse_nap(text))
        out = serialize(net)
        audit = {"d": gadget.d, "M": gadget.M, "Q": gadget.Q, "D_prime": format_number(gadget.D_prime)}
    Path(args.output).write_text(out)
    report["audit"] = audit
    lines = [f"wrote {args.output}"] + [f"{key} = {val}" for key, val in audit.items()]
    return report, lines, EXIT_OK


def cmd_gen(args) -> tuple[dict, list[str], int]:
    if args.leaves < 2 or not 0 <= args.reticulations <= args.leaves or args.max_weight < 1:
        raise CliError("infeasible shape: need leaves >= 2, 0 <= reticulations <= leaves, max-weight >= 1", EXIT_INVALID)
    net = random_network(
        args.seed,
        args.leaves,
        args.reticulations,
        max_weight=args.max_weight,
        p_bits=args.dyadic_p_bits,
        cost0_fraction=args.cost0_fraction,
    )
    net.k = args.k
    text = serialize(net)
    report = {"seed": args.seed, "prng": "MT19937", "sha256": hashlib.sha256(text.encode()).hexdigest()}
    if args.out:
        Path(args.out).write_text(text)
        report["output"] = args.out
        return report, [f"wrote {args.out}"], EXIT_OK
    return report, text.splitlines(), EXIT_OK


def _lemma4_row(Q: int, qpmax: int) -> list[checks.Case]:
    return checks.lemma4_row(Q, qpmax)


def _rules_one(item) -> list[checks.Case]:
    tag, net = item
    return checks.rule_cases(net, tag)


def _mapped(fn, items, threads: int):
    if threads <= 1:
        return [x for chunk in map(fn, items) for x in chunk]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return [x for chunk in pool.map(fn, items) for x in chunk]


def cmd_verify(args) -> tuple[dict, list[str], int]:
    if args.suite == "lemma4":
        cases = _mapped(partial(_lemma4_row, qpmax=args.qpmax), range(2, args.qmax + 1), args.threads)
    elif args.suite == "rounding":
        cases = list(checks.rounding_cases(args.cases, args.seed))
    elif args.suite == "rules":
        cases = _mapped(_rules_one, checks.rule_catalog(args.exhaustive), args.threads)
    else:
        cases = list(checks.reduction_cases(args.seed))
    passed = sum(c.ok for c in cases)
    report = {
        "suite": args.suite,
        "passed": passed,
        "total": len(cases),
        "cases": [{"name": c.name, "ok": c.ok, "detail": c.detail} for c in cases],
    }
    lines = [c.line() for c in cases] + [f"{args.suite}: {passed}/{len(cases)} passed"]
    return report, lines, EXIT_OK if passed == len(cases) else EXIT_VERIFY


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print a JSON report instead of text")
    common.add_argument("--threads", type=int, default=1, help="upper bound on worker processes (default 1)")

    parser = argparse.ArgumentParser(prog="netpd", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="exact optimum of a .npdn instance")
    p.add_argument("file")
    p.add_argument("--k", type=int, help="override the budget in the file")
    p.add_argument("--oracle-check", action="store_true", help="also run the brute-force oracle and compare")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("score", parents=[common], help="Network-PD of a taxon set with the per-edge gamma table")
    p.add_argument("file")
    p.add_argument("--taxa", default="", help="comma-separated labels")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("reduce", parents=[common], help="build a reduction-chain instance")
    p.add_argument("kind", choices=["x3c2sp", "sp2ps", "nap2npd"])
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("gen", parents=[common], help="seeded random binary network")
    p.add_argument("--leaves", type=int, required=True)
    p.add_argument("--reticulations", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-weight", type=int, default=20)
    p.add_argument("--dyadic-p-bits", type=int, default=2)
    p.add_argument("--cost0-fraction", type=float, default=0.0)
    p.add_argument("--k", type=int, default=0, help="budget written to the file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", parents=[common], help="run a certification sweep")
    p.add_argument("suite", choices=["lemma4", "rounding", "rules", "reductions"])
    p.add_argument("--qmax", type=int, default=50)
    p.add_argument("--qpmax", type=int, default=150)
    p.add_argument("--cases", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exhaustive", type=int, default=8, help="largest leaf count in the rule catalog")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_INVALID
    start = time.perf_counter()
    try:
        report, lines, code = args.func(args)
    except NpdnSyntaxError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvalidNetworkError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INVALID
    except ConstructionError as exc:
        print(f"construction precondition violated: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except InstanceTooLarge as exc:
        print(f"oracle: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except KeyError as exc:
        print(f"error: unknown name {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.json:
        report = {"command": ["netpd", *argv], **report, "wall_time_s": round(time.perf_counter() - start, 6)}
        print(json.dumps(report, indent=2))
    else:
        print("\n".join(lines))
    return code


if __name__ == "__main__":
    sys.exit(main())
