"""Command-line front end: ``fcif eval | check | classify | theorems | list``.

Exit codes: 0 success, 1 a check was falsified (or a scenario did not
reproduce), 2 usage or parse error, 3 evaluation error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import dsl, theorems
from .aggregators import BUILTIN_NAMES, make_fcif, registered_names
from .axioms import (
    AXIOM_DESCRIPTIONS,
    AxiomId,
    Exhaustive,
    Random,
    certify,
    check_axiom_suite,
    classify,
    parse_axioms,
)
from .core import (
    FSTARSTAR_READING,
    HALF,
    FcifError,
    RangeClass,
    fixture_path,
    format_value,
    load_fixture,
    load_profile,
    parse_domain_class,
    parse_range_class,
    parse_value,
)

EXIT_OK, EXIT_FALSIFIED, EXIT_USAGE, EXIT_EVAL = 0, 1, 2, 3

EXAMPLE5_WARNING = (
    "warning: this is the bundled example5 profile; its reference value for agent 2 "
    "is 0.35 but the six-branch formula gives 0.25 (reported as a known discrepancy)"
)


class UsageError(Exception):
    pass


def _value_arg(text: str) -> Fraction:
    try:
        return parse_value(text)
    except FcifError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _default_theta() -> Fraction:
    env = os.environ.get("FCIF_DEFAULT_THETA")
    if env is None:
        return HALF
    try:
        return parse_value(env)
    except FcifError as exc:
        raise UsageError(f"FCIF_DEFAULT_THETA: {exc}") from None


def _read_profile(path: str):
    """Load a profile file, falling back to a bundled fixture of the same name."""
    p = Path(path)
    if not p.exists():
        try:
            p = fixture_path(p.stem)
        except FcifError:
            raise UsageError(f"no such profile file: {path}") from None
    return load_profile(p)


def _strategy(args):
    if args.random is not None:
        return Random(args.random, args.seed)
    step = args.exhaustive
    if step is None:
        step = Fraction(1, 4) if args.n <= 2 else Fraction(1, 2)
    try:
        return Exhaustive(step)
    except FcifError as exc:
        raise UsageError(str(exc)) from None


def _dump(doc) -> str:
    return json.dumps(doc, separators=(",", ":"))


def _verdict_rows(verdicts) -> str:
    head = f"{'check':<12} {'status':<20} {'checked':>9}  counterexample"
    lines = [head]
    for v in verdicts:
        label = v.axiom.value if v.axiom is not None else v.check
        status = "Falsified" if v.falsified else "NoViolationFound"
        cex = ""
        if v.counterexample is not None:
            cex = _dump(v.counterexample.to_json(v.fcif))
        lines.append(f"{label:<12} {status:<20} {v.checked:>9}  {cex}")
    return "\n".join(lines)


def _emit_verdicts(args, verdicts, extra: dict) -> int:
    for v in verdicts:
        if v.falsified and not certify(v):
            raise AssertionError(f"uncertified counterexample for {v.check}")
    if args.format == "json":
        doc = {**extra, "seed": args.seed, "verdicts": [v.to_json() for v in verdicts]}
        print(json.dumps(doc, indent=2))
    else:
        print(_verdict_rows(verdicts))
    return EXIT_FALSIFIED if any(v.falsified for v in verdicts) else EXIT_OK


def cmd_eval(args) -> int:
    profile, file_theta = _read_profile(args.profile)
    theta = args.theta if args.theta is not None else (file_theta if file_theta is not None else _default_theta())
    fcif = make_fcif(args.fcif, theta=theta)
    out = fcif(profile)
    if fcif.name == "witness" and profile == load_fixture("example5"):
        print(EXAMPLE5_WARNING, file=sys.stderr)
    print(_dump(out.to_json()))
    return EXIT_OK


def cmd_check(args) -> int:
    theta = args.theta if args.theta is not None else _default_theta()
    fcif = make_fcif(args.fcif, theta=theta)
    axioms = parse_axioms(args.axioms)
    strategy = _strategy(args)
    verdicts = check_axiom_suite(fcif, axioms, args.n, strategy, theta, args.jobs)
    return _emit_verdicts(args, verdicts, {"fcif": fcif.name, "n": args.n, "theta": format_value(theta)})


def cmd_classify(args) -> int:
    theta = args.theta if args.theta is not None else _default_theta()
    fcif = make_fcif(args.fcif, theta=theta)
    domain = parse_domain_class(args.domain)
    range_ = parse_range_class(args.range)
    verdict = classify(fcif, domain, range_, args.n, _strategy(args), theta, args.jobs)
    extra = {"fcif": fcif.name, "n": args.n, "theta": format_value(theta)}
    if range_ is RangeClass.FSTARSTAR:
        extra["note"] = FSTARSTAR_READING
        if args.format != "json":
            print(f"note: {FSTARSTAR_READING}")
    return _emit_verdicts(args, [verdict], extra)


def cmd_theorems(args) -> int:
    ids = None if args.run == "all" else [s.strip() for s in args.run.split(",") if s.strip()]
    if ids is not None:
        for i in ids:
            theorems.get_scenario(i)
    reports = theorems.run_all(args.n, args.exhaustive, args.seed, args.jobs, ids)
    if args.format == "json":
        print(theorems.report_json(reports, args.seed))
    else:
        print(f"seed {args.seed}")
        print(theorems.report_table(reports))
    bad = [r for r in reports if r.status == theorems.COUNTEREXAMPLE]
    return EXIT_FALSIFIED if bad else EXIT_OK


def cmd_list(args) -> int:
    what = args.what
    doc = {}
    if what in ("fcifs", "all"):
        doc["fcifs"] = list(BUILTIN_NAMES) + [f"dsl-name:{k}" for k in sorted(dsl.definitions())] + registered_names()
    if what in ("axioms", "all"):
        doc["axioms"] = {a.value: AXIOM_DESCRIPTIONS[a] for a in AxiomId}
    if what in ("scenarios", "all"):
        doc["scenarios"] = [
            {"id": i, "description": d, "claim": c, "evidence_kind": k}
            for i, d, c, k in theorems.list_scenarios()
        ]
    if args.format == "json":
        print(json.dumps(doc, indent=2))
        return EXIT_OK
    for section, body in doc.items():
        print(f"{section}:")
        if isinstance(body, dict):
            for k, v in body.items():
                print(f"  {k:<6} {v}")
        else:
            for item in body:
                if isinstance(item, dict):
                    print(f"  {item['id']:<5} {item['evidence_kind']:<11} {item['description']}")
                else:
                    print(f"  {item}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fcif", description="Fuzzy collective identity functions.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--theta", type=_value_arg, default=None,
                        help="High/Low threshold (default 1/2, or $FCIF_DEFAULT_THETA)")
    common.add_argument("--format", choices=("table", "json"), default="table")

    search = argparse.ArgumentParser(add_help=False)
    search.add_argument("--fcif", required=True, help="registry name, dictatorial:<d>, dsl:<path> or dsl-name:<id>")
    search.add_argument("--n", type=_positive_int, default=3)
    mode = search.add_mutually_exclusive_group()
    mode.add_argument("--exhaustive", type=_value_arg, metavar="STEP",
                      help="grid step 1/m (default 1/4 for n<=2, else 1/2)")
    mode.add_argument("--random", type=_positive_int, metavar="SAMPLES")
    search.add_argument("--seed", type=int, default=42)
    search.add_argument("--jobs", type=_positive_int, default=1)

    p = sub.add_parser("eval", parents=[common], help="evaluate an FCIF on a profile file")
    p.add_argument("--fcif", required=True)
    p.add_argument("--profile", required=True, help="JSON or CSV profile file")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("check", parents=[common, search], help="search for axiom violations")
    p.add_argument("--axioms", default="all", help="comma list or 'all'")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("classify", parents=[common, search], help="check a domain -> range mapping")
    p.add_argument("--domain", default="all")
    p.add_argument("--range", default="all")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("theorems", help="run the replication scenarios")
    p.add_argument("--run", default="all", help="comma list of scenario ids or 'all'")
    p.add_argument("--n", type=_positive_int, default=None, help="override every scenario's n")
    p.add_argument("--exhaustive", type=_value_arg, default=None, metavar="STEP",
                   help="override every scenario's grid step")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_theorems)

    p = sub.add_parser("list", help="list rules, axioms and scenarios")
    p.add_argument("what", nargs="?", choices=("fcifs", "axioms", "scenarios", "all"), default="all")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_list)
    return parser


def _message(exc: Exception) -> str:
    # KeyError subclasses would otherwise print their message quoted
    return str(exc.args[0]) if isinstance(exc, KeyError) and exc.args else str(exc)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except dsl.EvaluationError as exc:
        print(f"error: {_message(exc)}", file=sys.stderr)
        return EXIT_EVAL
    except (UsageError, FcifError, OSError) as exc:
        print(f"error: {_message(exc)}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
