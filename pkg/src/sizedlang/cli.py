"""`sizedlang check | run | oracle`.

Exit codes: 0 success, 1 type or scope errors (or failed identities), 2 parse,
usage or I/O errors, 3 evaluation ran out of fuel.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Optional, Sequence, TextIO

from sizedlang.driver import Diagnostic, Session, find_prelude
from sizedlang.errors import EvalError, FuelExhausted
from sizedlang.eval import ERASED, TOKENS, default_fuel, default_main, evaluate, main_candidates

EXIT_OK = 0
EXIT_ERRORS = 1
EXIT_PARSE = 2
EXIT_FUEL = 3

_PARSE_KINDS = ("lexical", "parse")


def _exit_for(diagnostics: list[Diagnostic]) -> int:
    if any(d.error.kind in _PARSE_KINDS for d in diagnostics):
        return EXIT_PARSE
    return EXIT_ERRORS if diagnostics else EXIT_OK


@dataclasses.dataclass
class FileResult:
    path: str
    session: Optional[Session]
    diagnostics: list[Diagnostic]
    log_start: int = 0
    io_error: Optional[str] = None

    @property
    def exit_code(self) -> int:
        return EXIT_PARSE if self.io_error else _exit_for(self.diagnostics)


def load(path: str, use_prelude: bool = True, explain: bool = False) -> FileResult:
    """Check one file after its prelude, keeping the session for later stages."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as err:
        return FileResult(path, None, [], io_error=f"{path}: cannot read file: {err.strerror or err}")
    session = Session(explain=explain)
    prelude = find_prelude(p) if use_prelude else None
    if prelude is not None:
        found = session.add_file(prelude)
        if found:
            return FileResult(path, session, found)
    start = len(session.checker.size_log)
    return FileResult(path, session, session.add_source(text, path), start)


def _file_decls(result: FileResult):
    s = result.session
    return [s.checked[n] for n in s.order if s.checked[n].decl.origin == result.path]


def _print_core(result: FileResult, out: TextIO) -> None:
    from sizedlang.scope import unscope_decl
    from sizedlang.syntax.printer import print_decl

    for cd in _file_decls(result):
        elaborated = dataclasses.replace(cd.decl, clauses=cd.clauses or cd.decl.clauses, body=cd.body or cd.decl.body)
        out.write(print_decl(unscope_decl(elaborated)) + "\n\n")


# ------------------------------------------------------------------ commands


def cmd_check(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    results = [load(f, not args.no_prelude, args.explain_size) for f in args.files]
    if args.json:
        json.dump({"files": [_json_result(r, args.explain_size) for r in results]}, out, indent=2)
        out.write("\n")
        return max((r.exit_code for r in results), default=EXIT_OK)
    for r in results:
        if r.io_error:
            err.write(r.io_error + "\n")
            continue
        for d in r.diagnostics:
            err.write(d.render() + "\n")
        for w in r.session.warnings:
            err.write(f"{r.path}: warning: {w}\n")
        if args.explain_size:
            for line in r.session.checker.size_log[r.log_start:]:
                out.write(line + "\n")
        if args.print_core and not r.diagnostics:
            _print_core(r, out)
        status = "ok" if not r.diagnostics else f"{len(r.diagnostics)} error(s)"
        out.write(f"{r.path}: {status}\n")
    return max((r.exit_code for r in results), default=EXIT_OK)


def _json_result(r: FileResult, explain: bool) -> dict:
    if r.io_error:
        return {"file": r.path, "ok": False, "io_error": r.io_error, "errors": []}
    out = {
        "file": r.path,
        "ok": not r.diagnostics,
        "errors": [d.as_json() for d in r.diagnostics],
        "warnings": r.session.warnings,
    }
    if explain:
        out["size_log"] = r.session.checker.size_log[r.log_start:]
    return out


def cmd_run(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    r = load(args.file, not args.no_prelude)
    if r.io_error:
        err.write(r.io_error + "\n")
        return EXIT_PARSE
    if r.diagnostics:
        for d in r.diagnostics:
            err.write(d.render() + "\n")
        return r.exit_code
    decls = [r.session.checked[n] for n in r.session.order]
    main = args.main or default_main(main_candidates(decls, r.path))
    if main is None:
        err.write(f"{r.path}: no closed definition to run; pass --main\n")
        return EXIT_PARSE
    if main not in r.session.checked:
        err.write(f"{r.path}: no definition named {main}\n")
        return EXIT_PARSE
    mode = TOKENS if args.keep_sizes else ERASED
    fuel = args.fuel if args.fuel is not None else default_fuel()
    try:
        outcome = evaluate(r.session.signature, decls, main, args.depth, mode, fuel)
    except FuelExhausted as e:
        err.write(f"SOUNDNESS BUG: {main} did not finish within fuel {fuel}: {e.message}\n")
        return EXIT_FUEL
    except EvalError as e:
        err.write(f"evaluation error in {main}: {e.message}\n")
        return EXIT_ERRORS
    for line in outcome.lines:
        out.write(line + "\n")
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    from sizedlang.oracle.lattice import run_oracle

    if not 1 <= args.universe <= 10:
        err.write("--universe must be between 1 and 10\n")
        return EXIT_PARSE
    run = run_oracle(range(1, args.universe + 1), args.trials, args.seed)
    out.write(f"universe sizes 1..{args.universe}, {args.trials} random operators per size, seed {args.seed}\n")
    out.write(run.summary() + "\n")
    return EXIT_OK if run.ok else EXIT_ERRORS


# --------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sizedlang", description="Check, run and test sized-type programs.")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="type-check source files")
    check.add_argument("files", nargs="*")
    check.add_argument("--no-prelude", action="store_true", help="do not load the nearest prelude.ma")
    check.add_argument("--print-core", action="store_true", help="print elaborated declarations")
    check.add_argument("--explain-size", action="store_true", help="print every size comparison and its derivation")
    check.add_argument("--json", action="store_true", help="machine-readable output")
    check.set_defaults(handler=cmd_check)

    run = sub.add_parser("run", help="evaluate a definition and print its observation")
    run.add_argument("file")
    run.add_argument("--main", help="definition to evaluate (default: the file's *Main, else its last closed let)")
    run.add_argument("--depth", type=int, default=10, help="number of delayed computations to force")
    run.add_argument("--fuel", type=int, default=None, help="evaluation step budget (default: $SIZEDLANG_FUEL or 10^7)")
    run.add_argument("--keep-sizes", action="store_true", help="pass sizes as unit tokens instead of erasing them")
    run.add_argument("--no-prelude", action="store_true")
    run.set_defaults(handler=cmd_run)

    oracle = sub.add_parser("oracle", help="brute-force the fixed-point identities on finite lattices")
    oracle.add_argument("--universe", type=int, default=6, help="largest universe size")
    oracle.add_argument("--trials", type=int, default=200, help="random operators per universe size")
    oracle.add_argument("--seed", type=int, default=0)
    oracle.set_defaults(handler=cmd_oracle)
    return parser


def main(argv: Optional[Sequence[str]] = None, out: TextIO = None, err: TextIO = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return args.handler(args, out, err)


if __name__ == "__main__":
    sys.exit(main())
