"""Resolve names and turn the surface AST into core declarations.

Pattern synonyms are macro-expanded at every use site, both in patterns and
in expressions. Locals shadow globals; declarations may only refer to earlier
ones, except that fun/cofun bodies may call themselves.
"""

from __future__ import annotations

from typing import Optional

from sizedlang import core as c
from sizedlang.errors import ScopeError
from sizedlang.syntax import ast as s

class ScopeChecker:
    def __init__(self) -> None:
        self.globals: dict[str, str] = {}  # name -> "data" | "fun" | "cofun" | "let" | "con"
        self.constructors: dict[str, c.Constructor] = {}
        self.data: dict[str, c.Declaration] = {}
        self.synonyms: dict[str, s.SPatternSyn] = {}
        self.current: Optional[str] = None
        self.origin: Optional[str] = None

    # ---------------------------------------------------------------- driver

    def check(self, decls: list[s.SDecl], origin: Optional[str] = None) -> list[c.Declaration]:
        self.origin = origin
        return [self.declaration(d) for d in decls]

    def _define(self, name: str, kind: str, span) -> None:
        if name in self.globals or name in self.synonyms:
            raise ScopeError(f"duplicate definition of {name!r}", span, kind="duplicateDefinition")
        self.globals[name] = kind

    def declaration(self, d: s.SDecl) -> c.Declaration:
        self.current = None
        if isinstance(d, s.SData):
            out = self.data_decl(d)
        elif isinstance(d, s.SFun):
            out = self.fun_decl(d)
        elif isinstance(d, s.SLet):
            out = self.let_decl(d)
        else:
            out = self.synonym_decl(d)
        out.origin = self.origin
        return out

    def data_decl(self, d: s.SData) -> c.Declaration:
        locals_: list[str] = []
        params = []
        for b in d.params:
            dom = self.expr(b.type, locals_)
            for n in b.names:
                params.append(c.Param(n, dom, b.erased, b.polarity))
                locals_.append(n)
        kind = self.expr(d.type, locals_)
        if isinstance(kind, c.SetSort):
            sized = False
        elif isinstance(kind, c.Pi) and isinstance(kind.domain, c.SizeSort) and isinstance(kind.codomain, c.SetSort):
            sized = True
        else:
            raise ScopeError("data types must have kind Set or Size -> Set", d.type.span, kind="mismatch")
        self._define(d.name, "data", d.span)
        full = kind
        for p in reversed(params):
            full = c.Pi(p.name, p.type, full, p.erased, p.polarity)
        decl = c.Declaration("data", d.name, full, span=d.span, params=params, sized=sized)
        self.data[d.name] = decl
        for ctor in d.constructors:
            con = self.constructor(decl, ctor, locals_)
            decl.constructors.append(con)
            self._define(ctor.name, "con", ctor.span)
            self.constructors[ctor.name] = con
        return decl

    def constructor(self, decl: c.Declaration, ctor: s.SConstructor, locals_: list[str]) -> c.Constructor:
        typ = self.expr(ctor.type, locals_, self_name=decl.name)
        t = typ
        size_var = None
        if decl.sized:
            if not (isinstance(t, c.Pi) and isinstance(t.domain, c.SizeSort)):
                raise ScopeError(
                    f"constructor {ctor.name} of sized type {decl.name} must start with [i : Size]",
                    ctor.span,
                    kind="mismatch",
                )
            size_var = t.name
            t = t.codomain
        fields = []
        while isinstance(t, c.Pi):
            fields.append((t.name, t.domain))
            t = t.codomain
        head, args = c.spine(t)
        expected = [c.Var(p.name) for p in decl.params]
        ok = isinstance(head, c.Def) and head.name == decl.name and len(args) == len(expected) + (1 if decl.sized else 0)
        if ok:
            ok = all(c.alpha_equal(a, e) for a, e in zip(args, expected))
        if ok and decl.sized:
            ok = c.normalize_size(c.to_size(args[-1]) or c.INFTY) == (size_var, 1)
        if not ok:
            want = " ".join([decl.name, *(p.name for p in decl.params)] + ([f"($ {size_var})"] if decl.sized else []))
            raise ScopeError(f"constructor {ctor.name} must target {want}", ctor.span, kind="mismatch")
        return c.Constructor(ctor.name, decl.name, typ, size_var, fields, span=ctor.span)

    def fun_decl(self, d: s.SFun) -> c.Declaration:
        # Peel leading binders looking for a measure marker.
        binders: list[tuple[str, object]] = []
        t = d.type
        measure_node = None
        while True:
            if isinstance(t, s.SPi) and t.binder.names:
                binders.extend((n, t) for n in t.binder.names)
                t = t.body
            elif isinstance(t, s.SBoundedAll):
                binders.append((t.var, t))
                t = t.body
            elif isinstance(t, s.SMeasure):
                measure_node = t
                break
            else:
                break
        measure = None
        if measure_node is not None:
            names = [n for n, _ in binders]
            measure = tuple(self.measure_size(m, names) for m in measure_node.measures)
            typ = self.expr(_strip_measure(d.type), [])
        else:
            typ = self.expr(d.type, [])
        self.current = d.name
        self._define(d.name, d.keyword, d.span)
        clauses = []
        for cl in d.clauses:
            pats = []
            bound: list[str] = []
            for p in cl.patterns:
                cp = self.pattern(p)
                pats.append(cp)
                bound.extend(c.pattern_vars(cp))
            _check_linear(bound, cl.span)
            body = self.expr(cl.body, bound)
            clauses.append(c.Clause(tuple(pats), body, span=cl.span))
        if len({len(cl.patterns) for cl in clauses}) > 1:
            raise ScopeError(f"clauses of {d.name} have different numbers of patterns", d.span, kind="patternArity")
        self.current = None
        return c.Declaration(
            d.keyword,
            d.name,
            typ,
            span=d.span,
            clauses=clauses,
            measure=measure,
            measure_arity=len(binders) if measure_node is not None else 0,
            measure_span=measure_node.span if measure_node is not None else None,
        )

    def measure_size(self, e: s.SExpr, names: list[str]) -> c.SizeExpr:
        match e:
            case s.SVar(n):
                if n not in names:
                    raise ScopeError(
                        f"measure mentions {n!r}, which is not bound before the measure",
                        e.span,
                        kind="unboundSizeInMeasure",
                    )
                return c.SizeVar(n)
            case s.SSucc(arg):
                return c.SizeSucc(self.measure_size(arg, names))
            case s.SInfty():
                return c.INFTY
        raise ScopeError("measure components must be size expressions", e.span, kind="unboundSizeInMeasure")

    def let_decl(self, d: s.SLet) -> c.Declaration:
        locals_: list[str] = []
        params = []
        for b in d.params:
            dom = self.expr(b.type, locals_)
            for n in b.names:
                params.append(c.Param(n, dom, b.erased, b.polarity))
                locals_.append(n)
        typ = None
        if d.type is not None:
            typ = self.expr(d.type, locals_)
            for p in reversed(params):
                typ = c.Pi(p.name, p.type, typ, p.erased, p.polarity)
        elif params:
            raise ScopeError(f"let {d.name} with parameters needs a result type", d.span, kind="mismatch")
        body = self.expr(d.body, locals_)
        for p in reversed(params):
            body = c.Lam(p.name, body)
        self._define(d.name, "let", d.span)
        return c.Declaration("let", d.name, typ, span=d.span, body=body)

    def synonym_decl(self, d: s.SPatternSyn) -> c.Declaration:
        _check_linear(list(d.params), d.span)
        if d.name in self.globals or d.name in self.synonyms:
            raise ScopeError(f"duplicate definition of {d.name!r}", d.span, kind="duplicateDefinition")
        pat = self.pattern(d.pattern, synonym_params=set(d.params))
        extra = set(c.pattern_vars(pat)) - set(d.params)
        if extra:
            raise ScopeError(f"pattern synonym {d.name} binds unknown variables {sorted(extra)}", d.span)
        _check_linear(c.pattern_vars(pat), d.span)
        self.synonyms[d.name] = d
        return c.Declaration("pattern", d.name, None, span=d.span, syn_params=d.params, syn_pattern=pat)

    # ------------------------------------------------------------- patterns

    def pattern(self, p: s.SPattern, synonym_params: frozenset = frozenset()) -> c.Pattern:
        match p:
            case s.PVar(name):
                if name in synonym_params:
                    return c.PVar(name, span=p.span)
                if name in self.synonyms:
                    return self.expand_synonym_pattern(name, (), p.span)
                con = self.constructors.get(name)
                if con is not None and con.pattern_arity == 0:
                    return c.PCon(name, (), span=p.span)
                return c.PVar(name, span=p.span)
            case s.PPair(l, r):
                return c.PPair(self.pattern(l, synonym_params), self.pattern(r, synonym_params), span=p.span)
            case s.PCon(name, args):
                cargs = tuple(self.pattern(a, synonym_params) for a in args)
                if name in self.synonyms:
                    return self.expand_synonym_pattern(name, cargs, p.span)
                con = self.constructors.get(name)
                if con is None:
                    raise ScopeError(f"unknown constructor {name!r} in pattern", p.span)
                if len(cargs) != con.pattern_arity:
                    hint = " (the first argument binds the size)" if con.size_var else ""
                    raise ScopeError(
                        f"constructor {name} expects {con.pattern_arity} pattern arguments, got {len(cargs)}{hint}",
                        p.span,
                        kind="patternArity",
                    )
                return c.PCon(name, cargs, span=p.span)
        raise TypeError(p)

    def expand_synonym_pattern(self, name: str, args: tuple, span) -> c.Pattern:
        syn = self.synonyms[name]
        if len(args) != len(syn.params):
            raise ScopeError(
                f"pattern synonym {name} expects {len(syn.params)} arguments, got {len(args)}",
                span,
                kind="patternArity",
            )
        template = self.pattern(syn.pattern, synonym_params=set(syn.params))
        return _instantiate_pattern(template, dict(zip(syn.params, args)), span)

    # ---------------------------------------------------------- expressions

    def expr(self, e: s.SExpr, locals_: list[str], self_name: Optional[str] = None) -> c.CoreExpr:
        sp = e.span
        match e:
            case s.SVar(name):
                if name in locals_:
                    return c.Var(name, span=sp)
                if name in self.synonyms:
                    return self.expand_synonym_expr(name, [], locals_, sp)
                kind = self.globals.get(name)
                if kind == "con":
                    return c.Con(name, span=sp)
                if kind is not None:
                    return c.Def(name, span=sp)
                if name == self.current or name == self_name:
                    return c.Def(name, span=sp)
                raise ScopeError(f"unbound identifier {name!r}", sp)
            case s.SApp():
                head, args = _surface_spine(e)
                if isinstance(head, s.SVar) and head.name not in locals_ and head.name in self.synonyms:
                    return self.expand_synonym_expr(head.name, args, locals_, sp)
                return c.App(self.expr(e.fn, locals_, self_name), self.expr(e.arg, locals_, self_name), span=sp)
            case s.SLam(names, body):
                out = self.expr(body, locals_ + list(names), self_name)
                for n in reversed(names):
                    out = c.Lam(n, out, span=sp)
                return out
            case s.SPi(binder, body):
                dom = self.expr(binder.type, locals_, self_name)
                if not binder.names:
                    return c.Pi("_", dom, self.expr(body, locals_, self_name), False, None, span=sp)
                out = self.expr(body, locals_ + list(binder.names), self_name)
                for n in reversed(binder.names):
                    out = c.Pi(n, dom, out, binder.erased, binder.polarity, span=sp)
                return out
            case s.SBoundedAll(v, bound, body):
                return c.BoundedAll(v, self.size(bound, locals_), self.expr(body, locals_ + [v], self_name), span=sp)
            case s.SBoundedEx(v, bound, body):
                return c.BoundedEx(v, self.size(bound, locals_), self.expr(body, locals_ + [v], self_name), span=sp)
            case s.SProd(l, r):
                return c.Prod(self.expr(l, locals_, self_name), self.expr(r, locals_, self_name), span=sp)
            case s.SPair(l, r):
                return c.Pair(self.expr(l, locals_, self_name), self.expr(r, locals_, self_name), span=sp)
            case s.SCase(scrut, asc, branches):
                cbranches = []
                for pat, body in branches:
                    cp = self.pattern(pat)
                    vs = c.pattern_vars(cp)
                    _check_linear(vs, pat.span)
                    cbranches.append((cp, self.expr(body, locals_ + vs, self_name)))
                return c.Case(
                    self.expr(scrut, locals_, self_name),
                    None if asc is None else self.expr(asc, locals_, self_name),
                    tuple(cbranches),
                    span=sp,
                )
            case s.SSucc() | s.SInfty():
                return c.SizeVal(self.size(e, locals_), span=sp)
            case s.SSet():
                return c.SetSort(span=sp)
            case s.SSize():
                return c.SizeSort(span=sp)
            case s.SMeasure():
                raise ScopeError(
                    "a measure |...| may only appear in the signature of a fun or cofun",
                    sp,
                    kind="misplacedMeasure",
                )
        raise TypeError(e)

    def size(self, e: s.SExpr, locals_: list[str]) -> c.SizeExpr:
        match e:
            case s.SVar(name):
                if name not in locals_:
                    raise ScopeError(f"unbound size variable {name!r}", e.span)
                return c.SizeVar(name)
            case s.SSucc(arg):
                return c.SizeSucc(self.size(arg, locals_))
            case s.SInfty():
                return c.INFTY
        raise ScopeError("expected a size expression (variable, $ s or #)", e.span, kind="mismatch")

    def expand_synonym_expr(self, name: str, args: list, locals_: list[str], span) -> c.CoreExpr:
        syn = self.synonyms[name]
        if len(args) != len(syn.params):
            raise ScopeError(
                f"pattern synonym {name} expects {len(syn.params)} arguments, got {len(args)}",
                span,
                kind="patternArity",
            )
        values = {p: self.expr(a, locals_) for p, a in zip(syn.params, args)}
        template = self.pattern(syn.pattern, synonym_params=set(syn.params))
        return _pattern_to_expr(template, values, self.constructors, span)


def _surface_spine(e: s.SExpr) -> tuple[s.SExpr, list[s.SExpr]]:
    args = []
    while isinstance(e, s.SApp):
        args.append(e.arg)
        e = e.fn
    return e, args[::-1]


def _strip_measure(t: s.SExpr) -> s.SExpr:
    match t:
        case s.SPi(binder, body):
            return s.SPi(binder, _strip_measure(body), span=t.span)
        case s.SBoundedAll(v, bound, body):
            return s.SBoundedAll(v, bound, _strip_measure(body), span=t.span)
        case s.SMeasure(_, body):
            return body
    return t


def _check_linear(names: list[str], span) -> None:
    seen = set()
    for n in names:
        if n in seen:
            raise ScopeError(f"variable {n!r} bound twice", span, kind="duplicateDefinition")
        seen.add(n)


def _instantiate_pattern(p: c.Pattern, sub: dict[str, c.Pattern], span) -> c.Pattern:
    match p:
        case c.PVar(name):
            return sub.get(name, p)
        case c.PCon(name, args):
            return c.PCon(name, tuple(_instantiate_pattern(a, sub, span) for a in args), span=span)
        case c.PPair(l, r):
            return c.PPair(_instantiate_pattern(l, sub, span), _instantiate_pattern(r, sub, span), span=span)
    raise TypeError(p)


def _pattern_to_expr(p: c.Pattern, values: dict[str, c.CoreExpr], ctors, span) -> c.CoreExpr:
    match p:
        case c.PVar(name):
            return values[name]
        case c.PPair(l, r):
            return c.Pair(_pattern_to_expr(l, values, ctors, span), _pattern_to_expr(r, values, ctors, span), span=span)
        case c.PCon(name, args):
            if ctors[name].size_var is not None:
                raise ScopeError(
                    f"pattern synonym over sized constructor {name} cannot be used as an expression",
                    span,
                    kind="patternArity",
                )
            out: c.CoreExpr = c.Con(name, span=span)
            for a in args:
                out = c.App(out, _pattern_to_expr(a, values, ctors, span), span=span)
            return out
    raise TypeError(p)


def scope_check(decls: list[s.SDecl], checker: Optional[ScopeChecker] = None, origin: Optional[str] = None) -> list[c.Declaration]:
    """Scope-check `decls`; pass `checker` to continue after an earlier unit (e.g. a prelude)."""
    return (checker or ScopeChecker()).check(decls, origin)


# ---------------------------------------------------------- core -> surface


def unscope_size(sz: c.SizeExpr) -> s.SExpr:
    base, off = c.normalize_size(sz)
    if base is None:
        return s.SInfty()
    out: s.SExpr = s.SVar(base)
    for _ in range(off):
        out = s.SSucc(out)
    return out


def unscope_pattern(p: c.Pattern) -> s.SPattern:
    match p:
        case c.PVar(name):
            return s.PVar(name)
        case c.PCon(name, args):
            return s.PCon(name, tuple(unscope_pattern(a) for a in args))
        case c.PPair(l, r):
            return s.PPair(unscope_pattern(l), unscope_pattern(r))
    raise TypeError(p)


def unscope(e: c.CoreExpr) -> s.SExpr:
    """Render a core term as surface syntax (used by --print-core)."""
    match e:
        case c.Var(n) | c.Def(n) | c.Con(n):
            return s.SVar(n)
        case c.SetSort():
            return s.SSet()
        case c.SizeSort():
            return s.SSize()
        case c.SizeVal(sz):
            return unscope_size(sz)
        case c.App(fn, arg):
            return s.SApp(unscope(fn), unscope(arg))
        case c.Lam(n, body):
            return s.SLam((n,), unscope(body))
        case c.Pi(n, dom, cod, erased, pol):
            if n == "_" and not erased and pol is None:
                return s.SPi(s.Binder(False, (), unscope(dom)), unscope(cod))
            return s.SPi(s.Binder(erased, (n,), unscope(dom), pol), unscope(cod))
        case c.BoundedAll(v, b, body):
            return s.SBoundedAll(v, unscope_size(b), unscope(body))
        case c.BoundedEx(v, b, body):
            return s.SBoundedEx(v, unscope_size(b), unscope(body))
        case c.Prod(l, r):
            return s.SProd(unscope(l), unscope(r))
        case c.Pair(l, r):
            return s.SPair(unscope(l), unscope(r))
        case c.Case(scrut, asc, branches):
            return s.SCase(
                unscope(scrut),
                None if asc is None else unscope(asc),
                tuple((unscope_pattern(p), unscope(b)) for p, b in branches),
            )
    raise TypeError(e)


def _insert_measure(t: s.SExpr, k: int, measure: tuple) -> s.SExpr:
    if k == 0:
        return s.SMeasure(tuple(unscope_size(m) for m in measure), t)
    if isinstance(t, s.SPi):
        return s.SPi(t.binder, _insert_measure(t.body, k - 1, measure))
    if isinstance(t, s.SBoundedAll):
        return s.SBoundedAll(t.var, t.bound, _insert_measure(t.body, k - 1, measure))
    raise ValueError("measure arity exceeds the telescope")


def unscope_decl(d: c.Declaration) -> s.SDecl:
    if d.kind == "data":
        params = tuple(s.Binder(p.erased, (p.name,), unscope(p.type), p.polarity) for p in d.params)
        kind = d.type
        for _ in d.params:
            kind = kind.codomain
        ctors = tuple(s.SConstructor(con.name, unscope(con.type)) for con in d.constructors)
        return s.SData(d.name, params, unscope(kind), ctors)
    if d.kind in ("fun", "cofun"):
        typ = unscope(d.type)
        if d.measure is not None:
            typ = _insert_measure(typ, d.measure_arity, d.measure)
        clauses = tuple(
            s.SClause(d.name, tuple(unscope_pattern(p) for p in cl.patterns), unscope(cl.body)) for cl in d.clauses
        )
        return s.SFun(d.kind, d.name, typ, clauses)
    if d.kind == "let":
        return s.SLet(d.name, (), None if d.type is None else unscope(d.type), unscope(d.body))
    return s.SPatternSyn(d.name, d.syn_params, unscope_pattern(d.syn_pattern))
