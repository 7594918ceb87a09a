"""Command-line front end: model checking, diagnosis, a REPL, network dumps.

Exit codes: 0 success, 1 parse or usage errors, 2 observation contradiction,
3 oracle disagreement under --brute-force-verify.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from .engine import BruteForceCapError, brute_force_map
from .model import ModelSyntaxError, parse_model, validate_model
from .session import (
    ContradictionError,
    ObservationConflictError,
    RootCauseReport,
    UnknownComponentError,
    new_session,
    parse_observations,
)

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_CONTRADICTION = 2
EXIT_ORACLE_MISMATCH = 3


class _ExitError(Exception):
    def __init__(self, code: int):
        self.code = code


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_model(path: str):
    try:
        return parse_model(_read(path))
    except FileNotFoundError:
        print(f"error: no such file: {path}", file=sys.stderr)
        raise _ExitError(EXIT_PARSE)
    except ModelSyntaxError as exc:
        for d in exc.diagnostics:
            print(f"{path}:{d}", file=sys.stderr)
        raise _ExitError(EXIT_PARSE)


def _load_observations(path: str | None):
    if path is None:
        return []
    try:
        return parse_observations(_read(path))
    except FileNotFoundError:
        print(f"error: no such file: {path}", file=sys.stderr)
        raise _ExitError(EXIT_PARSE)
    except ModelSyntaxError as exc:
        for d in exc.diagnostics:
            print(f"{path}:{d}", file=sys.stderr)
        raise _ExitError(EXIT_PARSE)


def _format_report(report: RootCauseReport) -> str:
    lines = []
    if report.causes:
        lines.append("root cause" + ("s" if len(report.causes) > 1 else "") + ":")
        for c, r in report.causes:
            lines.append(f"  {c}: {r}")
    else:
        lines.append("no causes required; all components available")
    lines.append(f"score: {report.score:g}")
    lines.append("unavailable: " + (", ".join(report.derived_unavailable) or "none"))
    lines.append("available: " + (", ".join(report.derived_available) or "none"))
    if report.alternatives is not None:
        lines.append("ranked explanations:")
        for causes, score in report.alternatives:
            named = ", ".join(f"{c}: {r}" for c, r in causes) or "none"
            lines.append(f"  [{score:g}] {named}")
    for e in report.explanations:
        for chain in e.chains:
            if chain.steps:
                hops = " -> ".join([chain.steps[0].source] + [s.target for s in chain.steps])
                lines.append(f"derived chain ({e.component}: {e.risk}) {hops}")
    return "\n".join(lines)


def _print_report(report: RootCauseReport, output: str) -> None:
    if output == "structured":
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(_format_report(report))


def cmd_check(args) -> int:
    model = _load_model(args.model)
    report = validate_model(model)
    for issue in report.issues:
        print(str(issue))
    if report.ok:
        print(f"ok: {len(model.components)} components, {len(model.risks)} risks")
        return EXIT_OK
    return EXIT_PARSE


def cmd_diagnose(args) -> int:
    model = _load_model(args.model)
    observations = _load_observations(args.observations)
    rng = random.Random(args.seed) if args.seed is not None else None
    try:
        session = new_session(model, rng=rng)
        session.add_observations(observations)
        report = session.diagnose(k=args.k)
    except UnknownComponentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ObservationConflictError, ContradictionError) as exc:
        print(f"contradiction: {exc}", file=sys.stderr)
        return EXIT_CONTRADICTION
    _print_report(report, args.output)
    if args.brute_force_verify:
        try:
            oracle = brute_force_map(session.network())
        except BruteForceCapError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_PARSE
        if oracle.score == report.score:
            print(f"oracle agreement: score {oracle.score:g}")
        else:
            print(f"oracle mismatch: solver {report.score!r} vs brute force {oracle.score!r}",
                  file=sys.stderr)
            return EXIT_ORACLE_MISMATCH
    return EXIT_OK


def cmd_dump(args) -> int:
    model = _load_model(args.model)
    observations = _load_observations(args.observations)
    try:
        session = new_session(model)
        session.add_observations(observations)
    except (UnknownComponentError, ObservationConflictError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    sys.stdout.write(session.network().dump())
    return EXIT_OK


def cmd_repl(args) -> int:
    model = _load_model(args.model)
    session = new_session(model)
    print(f"loaded {args.model}; commands: observe <status> <component> | diagnose [k] | reset | quit")
    for raw in sys.stdin:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        command = tokens[0]
        try:
            if command == "quit":
                break
            elif command == "reset":
                session.reset()
                print("observations cleared")
            elif command == "observe":
                session.add_observations(parse_observations(" ".join(["observe"] + tokens[1:])))
                print(f"recorded; {len(session.observations)} observations")
            elif command == "diagnose":
                k = int(tokens[1]) if len(tokens) > 1 else 1
                _print_report(session.diagnose(k=k), args.output)
            else:
                print(f"unknown command {command!r}")
        except (ModelSyntaxError, UnknownComponentError, ObservationConflictError, ValueError) as exc:
            print(f"error: {exc}")
        except ContradictionError as exc:
            print(f"contradiction: {exc}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    app = create_app(journal_path=args.journal, model_paths=args.model or [])
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mlnrca",
                                     description="Root cause analysis over dependency models")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="validate a model file")
    p_check.add_argument("model")
    p_check.set_defaults(func=cmd_check)

    p_diag = sub.add_parser("diagnose", help="one-shot diagnosis from a model and observations")
    p_diag.add_argument("model")
    p_diag.add_argument("observations", nargs="?")
    p_diag.add_argument("-k", type=int, default=1, help="number of ranked explanations")
    p_diag.add_argument("--brute-force-verify", action="store_true",
                        help="cross-check the result with the exhaustive oracle")
    p_diag.add_argument("--output", choices=["text", "structured"], default="text")
    p_diag.add_argument("--seed", type=int, default=None,
                        help="break score ties at random with this seed instead of deterministically")
    p_diag.set_defaults(func=cmd_diagnose)

    p_repl = sub.add_parser("repl", help="interactive diagnosis loop")
    p_repl.add_argument("model")
    p_repl.add_argument("--output", choices=["text", "structured"], default="text")
    p_repl.set_defaults(func=cmd_repl)

    p_dump = sub.add_parser("dump", help="print the ground network")
    p_dump.add_argument("model")
    p_dump.add_argument("observations", nargs="?")
    p_dump.set_defaults(func=cmd_dump)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--journal", default=None, help="journal file for persistence")
    p_serve.add_argument("--model", action="append", help="model file to load at startup (repeatable)")
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _ExitError as exc:
        return exc.code


if __name__ == "__main__":
    raise SystemExit(main())
