"""The global signature and weak-head normalization of types."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from sizedlang import core as c
from sizedlang.core import INFTY, Polarity
from sizedlang.errors import TypeCheckError

DEFAULT_UNFOLD_FUEL = 1000


@dataclass
class ParamInfo:
    polarity: Polarity
    is_size: bool


@dataclass
class Signature:
    decls: dict[str, c.Declaration] = field(default_factory=dict)
    constructors: dict[str, c.Constructor] = field(default_factory=dict)

    def add(self, decl: c.Declaration) -> None:
        self.decls[decl.name] = decl
        for con in decl.constructors:
            self.constructors[con.name] = con

    def get(self, name: str) -> Optional[c.Declaration]:
        return self.decls.get(name)

    def data_of(self, con: str) -> c.Declaration:
        return self.decls[self.constructors[con].data]

    def param_info(self, name: str) -> list[ParamInfo]:
        """Variance and sort of each argument position of a global type former."""
        d = self.decls[name]
        if d.kind == "data":
            out = [ParamInfo(Polarity.from_mark(p.polarity), isinstance(p.type, c.SizeSort)) for p in d.params]
            if d.sized:
                out.append(ParamInfo(Polarity.POS, True))
            return out
        binders, _ = c.telescope(d.type) if d.type is not None else ([], None)
        return [ParamInfo(Polarity.from_mark(b.polarity), isinstance(b.domain, c.SizeSort)) for b in binders]

    def is_type_former(self, name: str) -> bool:
        d = self.decls.get(name)
        if d is None or d.type is None:
            return False
        t = d.type
        while isinstance(t, (c.Pi, c.BoundedAll)):
            t = t.codomain if isinstance(t, c.Pi) else t.body
        return isinstance(t, c.SetSort)


class Fuel:
    """Budget for unfolding type-level definitions."""

    def __init__(self, amount: int = DEFAULT_UNFOLD_FUEL):
        self.amount = amount
        self.remaining = amount

    def reset(self) -> None:
        self.remaining = self.amount

    def spend(self, what: str, span=None) -> None:
        self.remaining -= 1
        if self.remaining < 0:
            raise TypeCheckError(f"gave up unfolding {what}: unfolding fuel exhausted", span, kind="mismatch")


def complete_data(sig: Signature, e: c.CoreExpr) -> c.CoreExpr:
    """Give a sized data type applied only to its parameters the index `#`."""
    head, args = c.spine(e)
    if isinstance(head, c.Def):
        d = sig.get(head.name)
        if d is not None and d.kind == "data" and d.sized and len(args) == len(d.params):
            return c.App(e, c.SizeVal(INFTY))
    return e


class Stuck(Exception):
    """Matching needs the value of a term that is not yet a constructor."""


def match_pattern(p: c.Pattern, v: c.CoreExpr, sig: Signature, fuel: Fuel) -> Optional[dict[str, c.CoreExpr]]:
    """Match a pattern against a term; None on mismatch, Stuck when undecided."""
    if isinstance(p, c.PVar):
        return {p.name: v}
    v = whnf(sig, v, fuel)
    if isinstance(p, c.PPair):
        if not isinstance(v, c.Pair):
            raise Stuck()
        left = match_pattern(p.left, v.left, sig, fuel)
        right = match_pattern(p.right, v.right, sig, fuel)
        if left is None or right is None:
            return None
        return {**left, **right}
    head, args = c.spine(v)
    if not isinstance(head, c.Con):
        raise Stuck()
    if head.name != p.name or len(args) != len(p.args):
        return None
    out: dict[str, c.CoreExpr] = {}
    for sub, arg in zip(p.args, args):
        m = match_pattern(sub, arg, sig, fuel)
        if m is None:
            return None
        out.update(m)
    return out


def whnf(sig: Signature, e: c.CoreExpr, fuel: Fuel) -> c.CoreExpr:
    """Weak-head normal form: beta, let unfolding and type-level clause unfolding."""
    while True:
        head, args = c.spine(e)
        if isinstance(head, c.Lam) and args:
            e = c.apply(c.subst1(head.body, head.name, args[0]), args[1:])
            continue
        if isinstance(head, c.Case):
            try:
                reduced = _reduce_case(sig, head, fuel)
            except Stuck:
                reduced = None
            if reduced is None:
                return e
            e = c.apply(reduced, args)
            continue
        if not isinstance(head, c.Def):
            return e
        d = sig.get(head.name)
        if d is None:
            return e
        if d.kind == "data":
            return complete_data(sig, e)
        if d.kind == "let" and d.body is not None:
            fuel.spend(head.name, head.span)
            e = c.apply(d.body, args)
            continue
        if d.kind in ("fun", "cofun") and d.clauses and sig.is_type_former(d.name):
            n = len(d.clauses[0].patterns)
            if len(args) < n:
                return e
            try:
                unfolded = _unfold_clauses(sig, d, args[:n], fuel)
            except Stuck:
                unfolded = None
            if unfolded is None:
                return e
            fuel.spend(head.name, head.span)
            e = c.apply(unfolded, args[n:])
            continue
        return e


def _unfold_clauses(sig: Signature, d: c.Declaration, args: list[c.CoreExpr], fuel: Fuel) -> Optional[c.CoreExpr]:
    for clause in d.clauses:
        sub: dict[str, c.CoreExpr] = {}
        for p, a in zip(clause.patterns, args):
            m = match_pattern(p, a, sig, fuel)
            if m is None:
                break
            sub.update(m)
        else:
            return c.subst(clause.body, sub)
    return None


def _reduce_case(sig: Signature, e: c.Case, fuel: Fuel) -> Optional[c.CoreExpr]:
    for pat, body in e.branches:
        m = match_pattern(pat, e.scrutinee, sig, fuel)
        if m is not None:
            return c.subst(body, m)
    return None
