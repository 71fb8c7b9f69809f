"""Command-line front end.

Every command writes exactly one JSON document to stdout; diagnostics go to
stderr.  Exit codes: 0 success (or "local"), 3 genuinely nonlocal, 2 invalid
input, 1 internal or solver error, 4 unsupported scope.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .behavior import DEFAULT_TOL, Scenario, behavior_to_doc, parse_behavior, validate_behavior
from .errors import GnstError, InputError, UnsupportedScopeError
from .gnst import DEFAULT_MAX_CELLS, certificate_to_doc, conjecture_sweep, optimize_success
from .hardy import HardyArgument, HardyFamily, argument_to_doc, build_argument, evaluate_argument, parse_argument
from .quantum import born_behavior, model_to_doc, parse_model, search_hardy_model
from .witness import ns2_membership, svetlichny_membership, verdict_to_doc

log = logging.getLogger("gnsthardy")

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT, EXIT_NONLOCAL, EXIT_SCOPE = 0, 1, 2, 3, 4
FAMILY_CHOICES = ("general", "chen", "conventional")


def _outcomes(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _scenario(args) -> Scenario:
    if args.outcomes is None and args.parties is None:
        raise InputError("give --outcomes d,d,... and/or --parties N")
    dims = args.outcomes or [2]
    if args.parties is not None:
        if len(dims) == 1:
            dims = dims * args.parties
        elif len(dims) != args.parties:
            raise InputError(f"--parties {args.parties} disagrees with {len(dims)} outcome counts")
    return Scenario(tuple(dims))


def _argument(args, scenario: Scenario | None = None) -> HardyArgument:
    scenario = scenario or _scenario(args)
    fixed_j = None if args.fixed_j is None else args.fixed_j - 1
    return build_argument(args.family, scenario, fixed_j)


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def _num(x):
    """Fractions as "a/b" strings, floats unchanged."""
    return x if isinstance(x, float) else str(x)


def _evaluation_doc(ev) -> dict:
    return {"q": _num(ev.q_value), "satisfied": ev.satisfied,
            "zero_violations": [{"event": str(e), "probability": _num(p)} for e, p in ev.zero_violations]}


# --- commands ------------------------------------------------------------------

def cmd_optimize(args):
    res = optimize_success(_argument(args), args.arith)
    # exact runs must print identical bytes on every invocation, so timing goes to stderr
    exact = res.arithmetic == "exact"
    log.info("solved in %.1f ms", res.wall_ms)
    return certificate_to_doc(res, timing=not exact), EXIT_OK


def cmd_sweep(args):
    parties = args.parties or [3, 4]
    dims = args.outcomes or [2, 3, 4, 5]
    rows = conjecture_sweep(parties, dims, args.arith, args.family, args.max_cells, args.jobs, args.out)
    doc = {"format": "gnst-sweep/1", "family": HardyFamily.parse(args.family).value,
           "rows": [{"parties": r.parties, "outcomes": list(r.outcomes), "arithmetic": r.arithmetic,
                     "q_star": None if r.q_star is None else _num(r.q_star), "skipped": r.skipped}
                    for r in rows]}
    return doc, EXIT_OK


def cmd_check(args):
    b = parse_behavior(_read(args.behavior))
    rep = validate_behavior(b, args.tol)
    doc = {"format": "gnst-check/1", "arithmetic": b.arithmetic, "valid": rep.ok,
           "nonnegative": rep.nonneg_ok, "normalization_residual": float(rep.normalization_residual),
           "ns_residual": float(rep.ns_residual), "violations": [str(v) for v in rep.violations[:20]],
           "evaluation": None}
    arg = None
    if args.argument is not None:
        arg = parse_argument(_read(args.argument))
    elif args.family is not None:
        arg = _argument(args, b.scenario)
    if arg is not None:
        doc["argument"] = argument_to_doc(arg)
        doc["evaluation"] = _evaluation_doc(evaluate_argument(arg, b, args.tol))
    return doc, EXIT_OK if rep.ok else EXIT_INPUT


def cmd_witness(args):
    b = parse_behavior(_read(args.behavior))
    test = ns2_membership if args.notion == "ns2" else svetlichny_membership
    verdict = test(b, None, args.tol if b.arithmetic == "float" else 1e-8)
    return verdict_to_doc(verdict), EXIT_OK if verdict.is_local else EXIT_NONLOCAL


def cmd_quantum_build(args):
    return behavior_to_doc(born_behavior(parse_model(_read(args.model)))), EXIT_OK


def cmd_quantum_search(args):
    sc = _scenario(args)
    res = search_hardy_model(sc, _argument(args, sc), args.seed, args.budget, args.jobs, args.tol)
    return {"format": "gnst-quantum-search/1", "argument": argument_to_doc(_argument(args, sc)),
            "seed": args.seed, "restarts": res.restarts, "best_restart": res.best_restart,
            "evaluation": _evaluation_doc(res.evaluation), "model": model_to_doc(res.model)}, EXIT_OK


def cmd_argument_show(args):
    arg = _argument(args)
    doc = argument_to_doc(arg)
    doc["positive_event"] = str(arg.positive_event)
    doc["zero_events"] = [str(e) for e in arg.zero_events]
    return doc, EXIT_OK


# --- parser --------------------------------------------------------------------

def _common_flags(grid: bool = False) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--family", choices=FAMILY_CHOICES, default=None)
    if grid:
        common.add_argument("--parties", type=_outcomes, help="party counts, default 3,4")
        common.add_argument("--outcomes", type=_outcomes, help="outcome counts per party, default 2,3,4,5")
    else:
        common.add_argument("--parties", type=int)
        common.add_argument("--outcomes", type=_outcomes, help="comma-separated outcome counts, e.g. 2,2,2")
    common.add_argument("--fixed-j", type=int, help="1-based fixed party (default: last)")
    common.add_argument("--arith", choices=("auto", "exact", "float"), default="auto")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="also write the output document here (sweep: certificate directory)")
    common.add_argument("-v", "--verbose", action="store_true")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    p = argparse.ArgumentParser(prog="gnsthardy", description="Hardy arguments in no-signaling theories.")
    sub = p.add_subparsers(dest="command", required=True)

    opt = sub.add_parser("optimize", parents=[common], help="maximize the Hardy success probability")
    opt.set_defaults(func=cmd_optimize)

    sw = sub.add_parser("sweep", parents=[_common_flags(grid=True)], help="optimize a grid of (N, d)")
    sw.add_argument("--max-cells", type=int, default=DEFAULT_MAX_CELLS)
    sw.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    sw.set_defaults(func=cmd_sweep)

    ch = sub.add_parser("check", parents=[common], help="validate a behavior, optionally evaluate an argument")
    ch.add_argument("behavior")
    ch.add_argument("--argument", help="argument file (alternative to --family)")
    ch.set_defaults(func=cmd_check)

    wi = sub.add_parser("witness", parents=[common], help="hybrid-locality membership test")
    wi.add_argument("notion", choices=("ns2", "svetlichny"))
    wi.add_argument("behavior")
    wi.set_defaults(func=cmd_witness)

    qu = sub.add_parser("quantum", help="Born-rule behaviors")
    qsub = qu.add_subparsers(dest="action", required=True)
    qb = qsub.add_parser("build", parents=[common], help="behavior of a model file")
    qb.add_argument("model")
    qb.set_defaults(func=cmd_quantum_build)
    qs = qsub.add_parser("search", parents=[common], help="search for a Hardy-satisfying model")
    qs.add_argument("--budget", type=int, default=8, help="random restarts")
    qs.add_argument("--jobs", type=int, default=1)
    qs.set_defaults(func=cmd_quantum_search)

    ar = sub.add_parser("argument", help="Hardy argument tools")
    asub = ar.add_subparsers(dest="action", required=True)
    ash = asub.add_parser("show", parents=[common], help="list the events of an argument")
    ash.set_defaults(func=cmd_argument_show)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    if args.func is not cmd_check and args.family is None:
        args.family = "general"
    try:
        doc, code = args.func(args)
    except UnsupportedScopeError as exc:
        doc, code = {"format": "gnst-error/1", "error": "unsupported_scope", "message": str(exc)}, EXIT_SCOPE
    except InputError as exc:
        doc, code = {"format": "gnst-error/1", "error": "invalid_input", "message": str(exc)}, EXIT_INPUT
    except GnstError as exc:
        doc, code = {"format": "gnst-error/1", "error": "internal", "message": str(exc)}, EXIT_INTERNAL
    if code not in (EXIT_OK, EXIT_NONLOCAL) and doc.get("format") == "gnst-error/1":
        print(f"error: {doc['message']}", file=sys.stderr)
    text = json.dumps(doc, indent=2)
    if args.out and args.func is not cmd_sweep and code != EXIT_INTERNAL:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
