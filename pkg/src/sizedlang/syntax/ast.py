"""Surface AST. Spans never take part in equality, so re-parsed trees compare equal."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

Span = Optional[tuple[int, int]]


def _span() -> Span:
    return field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------- expressions


@dataclass(frozen=True)
class SVar:
    name: str
    span: Span = _span()


@dataclass(frozen=True)
class SApp:
    fn: "SExpr"
    arg: "SExpr"
    span: Span = _span()


@dataclass(frozen=True)
class SLam:
    names: tuple[str, ...]
    body: "SExpr"
    span: Span = _span()


@dataclass(frozen=True)
class Binder:
    """`(x y : T)`, `[x : T]`, `+(x : T)`, or the anonymous domain of `A -> B`."""

    erased: bool
    names: tuple[str, ...]
    type: "SExpr"
    polarity: Optional[str] = None  # "+" | "-" | None
    span: Span = _span()


@dataclass(frozen=True)
class SPi:
    binder: Binder
    body: "SExpr"
    span: Span = _span()


@dataclass(frozen=True)
class SBoundedAll:
    var: str
    bound: "SExpr"
    body: "SExpr"
    span: Span = _span()


@dataclass(frozen=True)
class SBoundedEx:
    var: str
    bound: "SExpr"
    body: "SExpr"
    span: Span = _span()


@dataclass(frozen=True)
class SProd:
    left: "SExpr"
    right: "SExpr"
    span: Span = _span()


@dataclass(frozen=True)
class SPair:
    left: "SExpr"
    right: "SExpr"
    span: Span = _span()


@dataclass(frozen=True)
class SCase:
    scrutinee: "SExpr"
    ascription: Optional["SExpr"]
    branches: tuple[tuple["SPattern", "SExpr"], ...]
    span: Span = _span()


@dataclass(frozen=True)
class SSucc:
    arg: "SExpr"
    span: Span = _span()


@dataclass(frozen=True)
class SInfty:
    span: Span = _span()


@dataclass(frozen=True)
class SMeasure:
    measures: tuple["SExpr", ...]
    body: "SExpr"
    span: Span = _span()


@dataclass(frozen=True)
class SSet:
    span: Span = _span()


@dataclass(frozen=True)
class SSize:
    span: Span = _span()


SExpr = Union[SVar, SApp, SLam, SPi, SBoundedAll, SBoundedEx, SProd, SPair, SCase, SSucc, SInfty, SMeasure, SSet, SSize]


# ------------------------------------------------------------------- patterns


@dataclass(frozen=True)
class PVar:
    name: str
    span: Span = _span()


@dataclass(frozen=True)
class PPair:
    left: "SPattern"
    right: "SPattern"
    span: Span = _span()


@dataclass(frozen=True)
class PCon:
    name: str
    args: tuple["SPattern", ...]
    span: Span = _span()


SPattern = Union[PVar, PPair, PCon]


# --------------------------------------------------------------- declarations


@dataclass(frozen=True)
class SConstructor:
    name: str
    type: SExpr
    span: Span = _span()


@dataclass(frozen=True)
class SData:
    name: str
    params: tuple[Binder, ...]
    type: SExpr
    constructors: tuple[SConstructor, ...]
    span: Span = _span()
    kind = "data"


@dataclass(frozen=True)
class SClause:
    name: str
    patterns: tuple[SPattern, ...]
    body: SExpr
    span: Span = _span()


@dataclass(frozen=True)
class SFun:
    keyword: str  # "fun" | "cofun"
    name: str
    type: SExpr
    clauses: tuple[SClause, ...]
    span: Span = _span()

    @property
    def kind(self) -> str:
        return self.keyword


@dataclass(frozen=True)
class SLet:
    name: str
    params: tuple[Binder, ...]
    type: Optional[SExpr]
    body: SExpr
    span: Span = _span()
    kind = "let"


@dataclass(frozen=True)
class SPatternSyn:
    name: str
    params: tuple[str, ...]
    pattern: SPattern
    span: Span = _span()
    kind = "pattern"


SDecl = Union[SData, SFun, SLet, SPatternSyn]


def iter_children(e: SExpr):
    """Direct sub-expressions of `e` in source order."""
    match e:
        case SApp(fn, arg):
            yield fn
            yield arg
        case SLam(_, body):
            yield body
        case SPi(binder, body):
            yield binder.type
            yield body
        case SBoundedAll(_, bound, body) | SBoundedEx(_, bound, body):
            yield bound
            yield body
        case SProd(l, r) | SPair(l, r):
            yield l
            yield r
        case SCase(scrut, asc, branches):
            yield scrut
            if asc is not None:
                yield asc
            for _, b in branches:
                yield b
        case SSucc(arg):
            yield arg
        case SMeasure(ms, body):
            yield from ms
            yield body
