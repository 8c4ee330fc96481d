"""Occurrence polarities and the variance check for type-level definitions.

A parameter marked `+` may only occur positively (the definition is monotone
in it), one marked `-` only negatively. Unmarked parameters are unrestricted
and count as Mixed when used as the head's argument polarity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from sizedlang import core as c
from sizedlang.core import Polarity, join_opt
from sizedlang.errors import TypeCheckError


@dataclass
class PolarityReport:
    warnings: list[str] = field(default_factory=list)


def head_polarities(head: c.CoreExpr, sig: Mapping[str, c.Declaration]) -> Optional[list[Polarity]]:
    """Declared argument polarities of a global head, or None if it has none."""
    if isinstance(head, c.Def) and head.name in sig:
        return sig[head.name].parameter_polarities
    return None


def occurrence_polarity(
    target: str,
    body: c.CoreExpr,
    ambient: Polarity,
    sig: Mapping[str, c.Declaration],
    report: Optional[PolarityReport] = None,
) -> Optional[Polarity]:
    """Join of the polarities of all occurrences of `target` in `body`; None if it does not occur."""
    rep = report if report is not None else PolarityReport()

    def size_occ(s: c.SizeExpr, amb: Polarity) -> Optional[Polarity]:
        return amb if target in c.size_vars(s) else None

    def go(e: c.CoreExpr, amb: Polarity) -> Optional[Polarity]:
        match e:
            case c.Var(name):
                return amb if name == target else None
            case c.SizeVal(s):
                return size_occ(s, amb)
            case c.App():
                head, args = c.spine(e)
                out = go(head, amb) if not isinstance(head, c.Def) else None
                declared = head_polarities(head, sig)
                for n, arg in enumerate(args):
                    if declared is not None and n < len(declared):
                        pol = declared[n]
                    else:
                        pol = Polarity.MIXED
                    found = go(arg, amb.compose(pol))
                    if found is not None and declared is None:
                        rep.warnings.append(
                            f"{target} occurs under {_show_head(head)}, which has no declared polarities"
                        )
                    out = join_opt(out, found)
                return out
            case c.Pi(name, dom, cod):
                out = go(dom, amb.flip())
                if name != target:
                    out = join_opt(out, go(cod, amb))
                return out
            case c.BoundedAll(v, bound, b):
                out = size_occ(bound, amb.flip())
                return out if v == target else join_opt(out, go(b, amb))
            case c.BoundedEx(v, bound, b):
                out = size_occ(bound, amb)
                return out if v == target else join_opt(out, go(b, amb))
            case c.Prod(l, r) | c.Pair(l, r):
                return join_opt(go(l, amb), go(r, amb))
            case c.Lam(name, b):
                return None if name == target else go(b, amb)
            case c.Case(scrut, asc, branches):
                out = go(scrut, Polarity.MIXED)
                if asc is not None:
                    out = join_opt(out, go(asc, Polarity.MIXED))
                for pat, b in branches:
                    if target not in c.pattern_vars(pat):
                        out = join_opt(out, go(b, amb))
                return out
        return None

    return go(body, ambient)


def _show_head(head: c.CoreExpr) -> str:
    return getattr(head, "name", type(head).__name__)


def _returns_set(t: Optional[c.CoreExpr]) -> bool:
    if t is None:
        return False
    while isinstance(t, (c.Pi, c.BoundedAll)):
        t = t.codomain if isinstance(t, c.Pi) else t.body
    return isinstance(t, c.SetSort)


def _violation(decl: c.Declaration, pname: str, declared: Polarity, got: Polarity) -> TypeCheckError:
    return TypeCheckError(
        f"parameter {pname} of {decl.name} is declared {_word(declared)}, but its occurrences are {_word(got)}",
        decl.span,
        kind="polarityViolation",
    )


def _word(p: Polarity) -> str:
    return {Polarity.POS: "positive", Polarity.NEG: "negative", Polarity.MIXED: "mixed"}[p]


def check_type_def_polarities(
    decl: c.Declaration, sig: Mapping[str, c.Declaration], report: Optional[PolarityReport] = None
) -> list[TypeCheckError]:
    """Violations of declared polarities in a type-level definition or data declaration."""
    errors: list[TypeCheckError] = []
    if decl.kind == "data":
        for p in decl.params:
            declared = Polarity.from_mark(p.polarity)
            if declared is Polarity.MIXED:
                continue
            got = None
            for con in decl.constructors:
                for _, ftype in con.fields:
                    got = join_opt(got, occurrence_polarity(p.name, ftype, Polarity.POS, sig, report))
            if got is not None and got is not declared:
                errors.append(_violation(decl, p.name, declared, got))
        return errors
    if decl.kind not in ("fun", "cofun") or not _returns_set(decl.type):
        return errors
    binders, _ = c.telescope(decl.type)
    reported: set[int] = set()
    for clause in decl.clauses:
        for n, (binder, pat) in enumerate(zip(binders, clause.patterns)):
            declared = Polarity.from_mark(binder.polarity)
            if declared is Polarity.MIXED or n in reported or not isinstance(pat, c.PVar):
                continue
            got = occurrence_polarity(pat.name, clause.body, Polarity.POS, sig, report)
            if got is not None and got is not declared:
                errors.append(_violation(decl, binder.name, declared, got))
                reported.add(n)
    return errors
