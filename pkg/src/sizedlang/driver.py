"""Run the front end and checker over source text, collecting every error."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from sizedlang import core as c
from sizedlang.check.checker import CheckedDecl, Checker
from sizedlang.check.signature import DEFAULT_UNFOLD_FUEL
from sizedlang.errors import ScopeError, SizedLangError, format_error
from sizedlang.scope import ScopeChecker
from sizedlang.syntax import parse_source

PRELUDE_NAME = "prelude.ma"


@dataclass
class Diagnostic:
    error: SizedLangError
    filename: str
    source: str

    def render(self) -> str:
        return format_error(self.error, self.source, self.filename)

    def as_json(self) -> dict:
        from sizedlang.errors import line_col

        out = {"file": self.filename, "code": self.error.code, "kind": self.error.kind, "message": self.error.message}
        if self.error.span is not None:
            line, col = line_col(self.source, self.error.span[0])
            out.update(line=line, col=col, span=list(self.error.span))
        return out


@dataclass
class Session:
    """Accumulated state of checking a prelude followed by one or more files."""

    explain: bool = False
    unfold_fuel: int = DEFAULT_UNFOLD_FUEL
    scope: ScopeChecker = field(default_factory=ScopeChecker)
    checker: Optional[Checker] = None
    checked: dict[str, CheckedDecl] = field(default_factory=dict)
    order: list[str] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.checker is None:
            self.checker = Checker(unfold_fuel=self.unfold_fuel, explain=self.explain)

    def add_source(self, text: str, filename: str) -> list[Diagnostic]:
        """Parse, scope-check and type-check `text`; returns the diagnostics for it."""
        found: list[Diagnostic] = []
        try:
            surface = parse_source(text)
        except SizedLangError as err:
            found.append(Diagnostic(err, filename, text))
            self.diagnostics.extend(found)
            return found
        core: list[c.Declaration] = []
        for sd in surface:
            try:
                d = self.scope.declaration(sd)
                d.origin = filename
                core.append(d)
            except ScopeError as err:
                found.append(Diagnostic(err, filename, text))
        result = self.checker.check_program(core)
        for err in result.errors:
            found.append(Diagnostic(err, filename, text))
        for cd in result.checked:
            self.checked[cd.decl.name] = cd
            self.order.append(cd.decl.name)
        found.sort(key=lambda d: (d.error.span or (0, 0))[0])
        self.diagnostics.extend(found)
        return found

    def add_file(self, path: Path) -> list[Diagnostic]:
        return self.add_source(Path(path).read_text(encoding="utf-8"), str(path))

    @property
    def signature(self):
        return self.checker.sig

    @property
    def warnings(self) -> list[str]:
        return list(self.checker.polarity_report.warnings)


def find_prelude(path: Path) -> Optional[Path]:
    """The nearest `prelude.ma` in the file's directory or any parent directory."""
    path = Path(path).resolve()
    for d in [path.parent, *path.parent.parents]:
        candidate = d / PRELUDE_NAME
        if candidate.is_file():
            return None if candidate == path else candidate
    return None


def check_source(
    text: str,
    filename: str = "<input>",
    prelude: Optional[Path] = None,
    explain: bool = False,
) -> Session:
    """Check `text` after an optional prelude file."""
    session = Session(explain=explain)
    if prelude is not None:
        session.add_file(prelude)
    session.add_source(text, filename)
    return session


def check_path(path: Path, use_prelude: bool = True, explain: bool = False) -> Session:
    prelude = find_prelude(path) if use_prelude else None
    return check_source(Path(path).read_text(encoding="utf-8"), str(path), prelude, explain)

