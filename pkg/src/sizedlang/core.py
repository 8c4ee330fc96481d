"""Core terms, sizes, polarities, declarations and typing contexts.

Terms and types share one representation. Variables are named; substitution
is capture-avoiding and renames binders with `fresh` when needed.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union

Span = Optional[tuple[int, int]]


def _span() -> Span:
    return field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------------- sizes


@dataclass(frozen=True)
class SizeVar:
    name: str


@dataclass(frozen=True)
class SizeSucc:
    arg: "SizeExpr"


@dataclass(frozen=True)
class Infty:
    pass


SizeExpr = Union[SizeVar, SizeSucc, Infty]
INFTY = Infty()


def normalize_size(s: SizeExpr) -> tuple[Optional[str], int]:
    """(base, offset) with base None standing for the closure ordinal.

    Successors of the closure ordinal collapse: `$ #` is `#`.
    """
    offset = 0
    while isinstance(s, SizeSucc):
        offset += 1
        s = s.arg
    if isinstance(s, Infty):
        return None, 0
    return s.name, offset


def make_size(base: Optional[str], offset: int) -> SizeExpr:
    if base is None:
        return INFTY
    s: SizeExpr = SizeVar(base)
    for _ in range(offset):
        s = SizeSucc(s)
    return s


def size_succ(s: SizeExpr) -> SizeExpr:
    base, off = normalize_size(s)
    return make_size(base, off + 1) if base is not None else INFTY


def size_vars(s: SizeExpr) -> set[str]:
    base, _ = normalize_size(s)
    return set() if base is None else {base}


def show_size(s: SizeExpr) -> str:
    base, off = normalize_size(s)
    if base is None:
        return "#"
    return "$ " * off + base


# ----------------------------------------------------------------- polarity


class Polarity(enum.Enum):
    POS = "+"
    NEG = "-"
    MIXED = "*"

    def compose(self, other: "Polarity") -> "Polarity":
        """Polarity of an occurrence at `other` inside a context of polarity `self`."""
        if Polarity.MIXED in (self, other):
            return Polarity.MIXED
        return Polarity.POS if self is other else Polarity.NEG

    def join(self, other: Optional["Polarity"]) -> "Polarity":
        if other is None or other is self:
            return self
        return Polarity.MIXED

    def flip(self) -> "Polarity":
        return Polarity.NEG.compose(self)

    @classmethod
    def from_mark(cls, mark: Optional[str]) -> "Polarity":
        return {"+": cls.POS, "-": cls.NEG}.get(mark or "", cls.MIXED)


def join_opt(a: Optional[Polarity], b: Optional[Polarity]) -> Optional[Polarity]:
    if a is None:
        return b
    return a.join(b)


# ---------------------------------------------------------------------- terms


@dataclass(frozen=True)
class SetSort:
    span: Span = _span()


@dataclass(frozen=True)
class SizeSort:
    span: Span = _span()


@dataclass(frozen=True)
class Var:
    name: str
    span: Span = _span()


@dataclass(frozen=True)
class Def:
    name: str
    span: Span = _span()


@dataclass(frozen=True)
class Con:
    name: str
    span: Span = _span()


# Argument/binder kinds filled in by the checker:
#   "explicit" relevant value, "erased" bracket binder, "size" size argument
#   of an ordinary Pi, "bounded" size argument of a bounded universal.
@dataclass(frozen=True)
class App:
    fn: "CoreExpr"
    arg: "CoreExpr"
    kind: Optional[str] = field(default=None, compare=False)
    span: Span = _span()


@dataclass(frozen=True)
class Lam:
    name: str
    body: "CoreExpr"
    kind: Optional[str] = field(default=None, compare=False)
    span: Span = _span()


@dataclass(frozen=True)
class Pi:
    name: str  # "_" when the codomain does not depend on it
    domain: "CoreExpr"
    codomain: "CoreExpr"
    erased: bool = False
    polarity: Optional[str] = None
    span: Span = _span()


@dataclass(frozen=True)
class BoundedAll:
    var: str
    bound: SizeExpr
    body: "CoreExpr"
    span: Span = _span()


@dataclass(frozen=True)
class BoundedEx:
    var: str
    bound: SizeExpr
    body: "CoreExpr"
    span: Span = _span()


@dataclass(frozen=True)
class Prod:
    left: "CoreExpr"
    right: "CoreExpr"
    span: Span = _span()


@dataclass(frozen=True)
class Pair:
    left: "CoreExpr"
    right: "CoreExpr"
    existential: Optional[bool] = field(default=None, compare=False)
    span: Span = _span()


@dataclass(frozen=True)
class Case:
    scrutinee: "CoreExpr"
    ascription: Optional["CoreExpr"]
    branches: tuple[tuple["Pattern", "CoreExpr"], ...]
    span: Span = _span()


@dataclass(frozen=True)
class SizeVal:
    size: SizeExpr
    span: Span = _span()


CoreExpr = Union[SetSort, SizeSort, Var, Def, Con, App, Lam, Pi, BoundedAll, BoundedEx, Prod, Pair, Case, SizeVal]


# ------------------------------------------------------------------- patterns


@dataclass(frozen=True)
class PVar:
    name: str
    span: Span = _span()


@dataclass(frozen=True)
class PCon:
    name: str
    args: tuple["Pattern", ...]
    span: Span = _span()


@dataclass(frozen=True)
class PPair:
    left: "Pattern"
    right: "Pattern"
    existential: Optional[bool] = field(default=None, compare=False)
    span: Span = _span()


Pattern = Union[PVar, PCon, PPair]


def pattern_vars(p: Pattern) -> list[str]:
    match p:
        case PVar(name):
            return [name]
        case PCon(_, args):
            return [v for a in args for v in pattern_vars(a)]
        case PPair(l, r):
            return pattern_vars(l) + pattern_vars(r)
    raise TypeError(p)


def rename_pattern(p: Pattern, ren: dict[str, str]) -> Pattern:
    match p:
        case PVar(name, span=sp):
            return PVar(ren.get(name, name), span=sp)
        case PCon(name, args, span=sp):
            return PCon(name, tuple(rename_pattern(a, ren) for a in args), span=sp)
        case PPair(l, r, ex, span=sp):
            return PPair(rename_pattern(l, ren), rename_pattern(r, ren), ex, span=sp)
    raise TypeError(p)


# ------------------------------------------------------------ names and scope

_counter = itertools.count(1)
_SUFFIX = re.compile(r"_[0-9]+$")


def fresh(base: str, avoid: Iterable[str] = ()) -> str:
    """A name not in `avoid`, derived from `base`; every call yields a new one."""
    stem = _SUFFIX.sub("", base) or "x"
    avoid = set(avoid)
    while True:
        name = f"{stem}_{next(_counter)}"
        if name not in avoid:
            return name


def to_size(e: "CoreExpr") -> Optional[SizeExpr]:
    if isinstance(e, Var):
        return SizeVar(e.name)
    if isinstance(e, SizeVal):
        return e.size
    return None


def from_size(s: SizeExpr, span: Span = None) -> "CoreExpr":
    base, off = normalize_size(s)
    if base is not None and off == 0:
        return Var(base, span=span)
    return SizeVal(make_size(base, off), span=span)


def free_vars(e: CoreExpr) -> set[str]:
    match e:
        case Var(name):
            return {name}
        case SizeVal(s):
            return size_vars(s)
        case App(fn, arg):
            return free_vars(fn) | free_vars(arg)
        case Lam(name, body):
            return free_vars(body) - {name}
        case Pi(name, dom, cod):
            return free_vars(dom) | (free_vars(cod) - {name})
        case BoundedAll(v, bound, body) | BoundedEx(v, bound, body):
            return size_vars(bound) | (free_vars(body) - {v})
        case Prod(l, r) | Pair(l, r):
            return free_vars(l) | free_vars(r)
        case Case(scrut, asc, branches):
            out = free_vars(scrut)
            if asc is not None:
                out |= free_vars(asc)
            for pat, body in branches:
                out |= free_vars(body) - set(pattern_vars(pat))
            return out
    return set()


def subst_size(s: SizeExpr, sub: dict[str, "CoreExpr"]) -> SizeExpr:
    base, off = normalize_size(s)
    if base is None or base not in sub:
        return s
    repl = to_size(sub[base])
    if repl is None:
        return s
    rb, ro = normalize_size(repl)
    return make_size(rb, ro + off) if rb is not None else INFTY


def _range_fv(sub: dict[str, CoreExpr]) -> set[str]:
    out: set[str] = set()
    for v in sub.values():
        out |= free_vars(v)
    return out


def _under(name: str, sub: dict[str, CoreExpr], body_fv_hint: Optional[set[str]] = None):
    """Prepare substitution for going under binder `name`; returns (new_name, inner_sub)."""
    inner = {k: v for k, v in sub.items() if k != name}
    if not inner:
        return name, inner
    if name in _range_fv(inner):
        new = fresh(name, _range_fv(inner) | set(inner))
        inner[name] = Var(new)
        return new, inner
    return name, inner


def subst(e: CoreExpr, sub: dict[str, CoreExpr]) -> CoreExpr:
    """Capture-avoiding simultaneous substitution."""
    if not sub:
        return e
    match e:
        case Var(name, span=sp):
            if name in sub:
                return sub[name]
            return e
        case SizeVal(s, span=sp):
            return from_size(subst_size(s, sub), sp)
        case App(fn, arg, kind, span=sp):
            return App(subst(fn, sub), subst(arg, sub), kind, span=sp)
        case Lam(name, body, kind, span=sp):
            n, inner = _under(name, sub)
            return Lam(n, subst(body, inner), kind, span=sp)
        case Pi(name, dom, cod, erased, pol, span=sp):
            n, inner = _under(name, sub)
            return Pi(n, subst(dom, sub), subst(cod, inner), erased, pol, span=sp)
        case BoundedAll(v, bound, body, span=sp):
            n, inner = _under(v, sub)
            return BoundedAll(n, subst_size(bound, sub), subst(body, inner), span=sp)
        case BoundedEx(v, bound, body, span=sp):
            n, inner = _under(v, sub)
            return BoundedEx(n, subst_size(bound, sub), subst(body, inner), span=sp)
        case Prod(l, r, span=sp):
            return Prod(subst(l, sub), subst(r, sub), span=sp)
        case Pair(l, r, ex, span=sp):
            return Pair(subst(l, sub), subst(r, sub), ex, span=sp)
        case Case(scrut, asc, branches, span=sp):
            new_branches = []
            for pat, body in branches:
                inner = {k: v for k, v in sub.items() if k not in pattern_vars(pat)}
                clash = set(pattern_vars(pat)) & _range_fv(inner)
                if clash:
                    avoid = _range_fv(inner) | set(inner) | free_vars(body)
                    ren = {v: fresh(v, avoid) for v in clash}
                    pat = rename_pattern(pat, ren)
                    inner.update({old: Var(new) for old, new in ren.items()})
                new_branches.append((pat, subst(body, inner)))
            return Case(
                subst(scrut, sub),
                None if asc is None else subst(asc, sub),
                tuple(new_branches),
                span=sp,
            )
    return e


def subst1(e: CoreExpr, name: str, value: CoreExpr) -> CoreExpr:
    if name == "_":
        return e
    return subst(e, {name: value})


def spine(e: CoreExpr) -> tuple[CoreExpr, list[CoreExpr]]:
    """Split nested applications into head and argument list."""
    args = []
    while isinstance(e, App):
        args.append(e.arg)
        e = e.fn
    args.reverse()
    return e, args


def apply(head: CoreExpr, args: Iterable[CoreExpr]) -> CoreExpr:
    for a in args:
        head = App(head, a)
    return head


def iter_subterms(e: CoreExpr) -> Iterator[CoreExpr]:
    yield e
    match e:
        case App(fn, arg):
            yield from iter_subterms(fn)
            yield from iter_subterms(arg)
        case Lam(_, body) | BoundedAll(_, _, body) | BoundedEx(_, _, body):
            yield from iter_subterms(body)
        case Pi(_, dom, cod):
            yield from iter_subterms(dom)
            yield from iter_subterms(cod)
        case Prod(l, r) | Pair(l, r):
            yield from iter_subterms(l)
            yield from iter_subterms(r)
        case Case(scrut, asc, branches):
            yield from iter_subterms(scrut)
            if asc is not None:
                yield from iter_subterms(asc)
            for _, b in branches:
                yield from iter_subterms(b)


def alpha_equal(a: CoreExpr, b: CoreExpr) -> bool:
    """Syntactic equality up to bound-variable names and size normalization."""
    return _aeq(a, b, {}, {})


def _size_eq(s: SizeExpr, t: SizeExpr, ra: dict, rb: dict) -> bool:
    sb, so = normalize_size(s)
    tb, to = normalize_size(t)
    if sb is None or tb is None:
        return sb is None and tb is None
    return so == to and ra.get(sb, sb) == rb.get(tb, tb)


def _aeq(a: CoreExpr, b: CoreExpr, ra: dict, rb: dict) -> bool:
    sa, sb = to_size(a), to_size(b)
    if sa is not None and sb is not None:
        return _size_eq(sa, sb, ra, rb)

    def bind(x, y):
        tag = object()
        return {**ra, x: tag}, {**rb, y: tag}

    match a, b:
        case SetSort(), SetSort():
            return True
        case SizeSort(), SizeSort():
            return True
        case Def(x), Def(y):
            return x == y
        case Con(x), Con(y):
            return x == y
        case App(f, x), App(g, y):
            return _aeq(f, g, ra, rb) and _aeq(x, y, ra, rb)
        case Lam(x, bx), Lam(y, by):
            return _aeq(bx, by, *bind(x, y))
        case Pi(x, dx, cx, ex), Pi(y, dy, cy, ey):
            return ex == ey and _aeq(dx, dy, ra, rb) and _aeq(cx, cy, *bind(x, y))
        case BoundedAll(x, bx, tx), BoundedAll(y, by, ty):
            return _size_eq(bx, by, ra, rb) and _aeq(tx, ty, *bind(x, y))
        case BoundedEx(x, bx, tx), BoundedEx(y, by, ty):
            return _size_eq(bx, by, ra, rb) and _aeq(tx, ty, *bind(x, y))
        case Prod(l1, r1), Prod(l2, r2):
            return _aeq(l1, l2, ra, rb) and _aeq(r1, r2, ra, rb)
        case Pair(l1, r1), Pair(l2, r2):
            return _aeq(l1, l2, ra, rb) and _aeq(r1, r2, ra, rb)
        case Case(s1, _, br1), Case(s2, _, br2):
            if len(br1) != len(br2) or not _aeq(s1, s2, ra, rb):
                return False
            for (p1, e1), (p2, e2) in zip(br1, br2):
                v1, v2 = pattern_vars(p1), pattern_vars(p2)
                if len(v1) != len(v2) or rename_pattern(p1, dict(zip(v1, v2))) != p2:
                    return False
                ra2, rb2 = ra, rb
                for x, y in zip(v1, v2):
                    ra2, rb2 = _bind_pair(ra2, rb2, x, y)
                if not _aeq(e1, e2, ra2, rb2):
                    return False
            return True
    return False


def _bind_pair(ra, rb, x, y):
    tag = object()
    return {**ra, x: tag}, {**rb, y: tag}


# --------------------------------------------------------------- declarations


@dataclass
class Param:
    name: str
    type: CoreExpr
    erased: bool = False
    polarity: Optional[str] = None


@dataclass
class Constructor:
    name: str
    data: str
    type: CoreExpr  # full declared type, including the size binder
    size_var: Optional[str]  # the constructor's own size parameter, if the data is sized
    fields: list[tuple[str, CoreExpr]]  # argument telescope after the size binder
    span: Span = None

    @property
    def pattern_arity(self) -> int:
        return len(self.fields) + (1 if self.size_var else 0)


@dataclass
class Clause:
    patterns: tuple[Pattern, ...]
    body: CoreExpr
    span: Span = None


@dataclass
class Declaration:
    """A scope-checked global definition.

    `kind` is one of "data", "fun", "cofun", "let", "pattern".
    """

    kind: str
    name: str
    type: Optional[CoreExpr]
    span: Span = None
    params: list[Param] = field(default_factory=list)
    sized: bool = False
    constructors: list[Constructor] = field(default_factory=list)
    clauses: list[Clause] = field(default_factory=list)
    measure: Optional[tuple[SizeExpr, ...]] = None
    measure_arity: int = 0
    measure_span: Span = None
    body: Optional[CoreExpr] = None
    syn_params: tuple[str, ...] = ()
    syn_pattern: Optional[Pattern] = None
    origin: Optional[str] = None

    @property
    def parameter_polarities(self) -> list[Polarity]:
        if self.kind == "data":
            pols = [Polarity.from_mark(p.polarity) for p in self.params]
            return pols + ([Polarity.POS] if self.sized else [])
        return [Polarity.from_mark(b.polarity) for b in telescope(self.type)[0]] if self.type else []

    @property
    def is_recursive(self) -> bool:
        return any(
            isinstance(t, Def) and t.name == self.name
            for c in self.clauses
            for t in iter_subterms(c.body)
        )


def telescope(t: CoreExpr) -> tuple[list[Pi], CoreExpr]:
    """Leading Pi binders of `t` and the remaining codomain."""
    out = []
    while isinstance(t, Pi):
        out.append(t)
        t = t.codomain
    return out, t


def leading_binders(t: CoreExpr) -> list[tuple[str, str, Optional[CoreExpr]]]:
    """Leading Pi and BoundedAll binders as (kind, name, domain-or-None)."""
    out = []
    while True:
        if isinstance(t, Pi):
            out.append(("pi", t.name, t.domain))
            t = t.codomain
        elif isinstance(t, BoundedAll):
            out.append(("bounded", t.var, None))
            t = t.body
        else:
            return out


# --------------------------------------------------------------------- context


@dataclass(frozen=True)
class ConstraintCtx:
    """Typed bindings plus size hypotheses `j < s`."""

    bindings: tuple[tuple[str, CoreExpr], ...] = ()
    hypotheses: tuple[tuple[str, SizeExpr], ...] = ()

    def bind(self, name: str, typ: CoreExpr) -> "ConstraintCtx":
        return ConstraintCtx(self.bindings + ((name, typ),), self.hypotheses)

    def assume(self, var: str, bound: SizeExpr) -> "ConstraintCtx":
        """Bind a fresh size variable `var` with hypothesis `var < bound`."""
        return ConstraintCtx(self.bindings + ((var, SizeSort()),), self.hypotheses + ((var, bound),))

    def lookup(self, name: str) -> Optional[CoreExpr]:
        for n, t in reversed(self.bindings):
            if n == name:
                return t
        return None

    def names(self) -> set[str]:
        return {n for n, _ in self.bindings}

    def size_variables(self) -> list[str]:
        return [n for n, t in self.bindings if isinstance(t, SizeSort)]
