"""Error types shared by every stage, with stable E-codes."""

from __future__ import annotations

from typing import Optional

Span = tuple[int, int]

# Stable machine codes; negative-corpus files name these.
CODES = {
    "mismatch": "E001",
    "notASubtype": "E002",
    "boundViolation": "E003",
    "measureNotDecreasing": "E004",
    "nonExhaustive": "E005",
    "unboundSizeInMeasure": "E006",
    "polarityViolation": "E007",
    "unboundIdentifier": "E101",
    "duplicateDefinition": "E102",
    "patternArity": "E103",
    "misplacedMeasure": "E104",
    "lexical": "E201",
    "parse": "E202",
}


class SizedLangError(Exception):
    kind = "error"

    def __init__(self, message: str, span: Optional[Span] = None, kind: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.span = span
        if kind is not None:
            self.kind = kind

    @property
    def code(self) -> str:
        return CODES.get(self.kind, "E000")

    def __str__(self) -> str:
        return f"[{self.code}] {self.kind}: {self.message}"


class LexError(SizedLangError):
    kind = "lexical"


class ParseError(SizedLangError):
    kind = "parse"


class ScopeError(SizedLangError):
    """Raised by the scope checker; `kind` is one of the E1xx kinds."""

    kind = "unboundIdentifier"


class TypeCheckError(SizedLangError):
    """A typing failure. `kind` is one of the E0xx kinds."""

    kind = "mismatch"


class FuelExhausted(SizedLangError):
    kind = "fuelExhausted"


class EvalError(SizedLangError):
    kind = "eval"


def line_col(source: str, offset: int) -> tuple[int, int]:
    """1-based line and column of `offset`."""
    line = source.count("\n", 0, offset) + 1
    col = offset - (source.rfind("\n", 0, offset) + 1) + 1
    return line, col


def format_error(err: SizedLangError, source: Optional[str], filename: str) -> str:
    """`file:line:col: [Ecode] message` followed by a source line and caret line."""
    if err.span is None or source is None:
        return f"{filename}: [{err.code}] {err.kind}: {err.message}"
    start, end = err.span
    start = min(start, len(source))
    line, col = line_col(source, start)
    line_start = source.rfind("\n", 0, start) + 1
    line_end = source.find("\n", start)
    if line_end < 0:
        line_end = len(source)
    text = source[line_start:line_end]
    width = max(1, min(end, line_end) - start)
    caret = " " * (col - 1) + "^" * width
    return f"{filename}:{line}:{col}: [{err.code}] {err.kind}: {err.message}\n  {text}\n  {caret}"
