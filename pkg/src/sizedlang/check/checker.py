"""Bidirectional type checking with sized types and termination measures.

`check` and `infer` return elaborated terms: every application and lambda is
tagged with the kind of binder it eliminates or introduces ("explicit",
"erased", "size" or "bounded"), constructor applications carry their size as
an explicit first argument, and pairs record whether they are existential.
The evaluator relies on these tags to erase sizes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from sizedlang import core as c
from sizedlang.check.coverage import Coverage, show_patterns
from sizedlang.check.signature import DEFAULT_UNFOLD_FUEL, Fuel, Signature, complete_data, whnf
from sizedlang.check.subtype import Subtyper, show
from sizedlang.core import INFTY, ConstraintCtx
from sizedlang.errors import TypeCheckError
from sizedlang.polarity import PolarityReport, check_type_def_polarities
from sizedlang.sizes import AUDIT, explain_leq, leq, lt_inst, lt_measure


@dataclass
class CheckedDecl:
    decl: c.Declaration
    clauses: list[c.Clause] = field(default_factory=list)  # elaborated
    pattern_kinds: list[str] = field(default_factory=list)  # binder kind at each clause pattern position
    body: Optional[c.CoreExpr] = None  # elaborated let body


@dataclass
class CheckResult:
    signature: Signature
    checked: list[CheckedDecl]
    errors: list[TypeCheckError]
    warnings: list[str]
    size_log: list[str]

    @property
    def ok(self) -> bool:
        return not self.errors


@dataclass
class MeasureState:
    """The measure of the declaration under check, in terms of its binder names."""

    template: tuple[c.SizeExpr, ...]
    binder_names: list[str]
    needed_args: int
    entry: tuple[c.SizeExpr, ...] = ()


def _count(n: int, noun: str) -> str:
    return f"{n} {noun}" if n == 1 else f"{n} {noun}s"


def _err(kind: str, message: str, span=None) -> TypeCheckError:
    return TypeCheckError(message, span, kind=kind)


class Checker:
    def __init__(self, sig: Optional[Signature] = None, unfold_fuel: int = DEFAULT_UNFOLD_FUEL, explain: bool = False):
        self.sig = sig if sig is not None else Signature()
        self.fuel = Fuel(unfold_fuel)
        self.explain = explain
        self.size_log: list[str] = []
        self.subtyper = Subtyper(self.sig, self.fuel, self._log_leq if explain else None)
        self.coverage = Coverage(self.sig)
        self.current: Optional[c.Declaration] = None
        self.measure: Optional[MeasureState] = None
        self.polarity_report = PolarityReport()

    # ------------------------------------------------------------ logging

    def _log_leq(self, ctx: ConstraintCtx, a: c.SizeExpr, b: c.SizeExpr, ok: bool) -> None:
        self._log("leq", ctx, a, b, ok)

    def _log(self, rel: str, ctx: ConstraintCtx, a: c.SizeExpr, b: c.SizeExpr, ok: bool) -> None:
        if not self.explain:
            return
        where = self.current.name if self.current else "?"
        hyps = ", ".join(f"{v} < {c.show_size(s)}" for v, s in ctx.hypotheses) or "no hypotheses"
        head = f"[{where}] {rel}({c.show_size(a)}, {c.show_size(b)}) = {str(ok).lower()} under {hyps}"
        if rel == "leq":
            d = explain_leq(ctx, a, b)
        else:
            d = explain_leq(ctx, c.SizeSucc(a), b) if ok and c.normalize_size(b)[0] is not None else None
        if d is not None and d.steps:
            head += "\n" + "\n".join(f"    by {s}" for s in d.steps)
        self.size_log.append(head)

    def _lt_inst(self, ctx: ConstraintCtx, a: c.SizeExpr, b: c.SizeExpr) -> bool:
        ok = lt_inst(ctx, a, b)
        self._log("ltInst", ctx, a, b, ok)
        return ok

    def _leq(self, ctx: ConstraintCtx, a: c.SizeExpr, b: c.SizeExpr) -> bool:
        ok = leq(ctx, a, b)
        self._log("leq", ctx, a, b, ok)
        return ok

    # ----------------------------------------------------------- program

    def check_program(self, decls: list[c.Declaration]) -> CheckResult:
        checked, errors = [], []
        for d in decls:
            try:
                checked.append(self.check_decl(d))
            except TypeCheckError as err:
                if err.span is None:
                    err.span = d.span
                errors.append(err)
                if d.name not in self.sig.decls:
                    self.sig.add(d)
            finally:
                self.current = None
                self.measure = None
        return CheckResult(self.sig, checked, errors, list(self.polarity_report.warnings), self.size_log)

    def check_decl(self, d: c.Declaration) -> CheckedDecl:
        self.fuel.reset()
        self.current = d
        if d.kind == "pattern":
            self.sig.add(d)
            return CheckedDecl(d)
        if d.kind == "data":
            return self._data_decl(d)
        if d.kind == "let":
            return self._let_decl(d)
        return self._fun_decl(d)

    def _data_decl(self, d: c.Declaration) -> CheckedDecl:
        self.check_type(ConstraintCtx(), d.type)
        self.sig.add(d)
        ctx = ConstraintCtx()
        for p in d.params:
            ctx = ctx.bind(p.name, p.type)
        for con in d.constructors:
            self.check_type(ctx, con.type)
        errors = check_type_def_polarities(d, self.sig.decls, self.polarity_report)
        if errors:
            raise errors[0]
        return CheckedDecl(d)

    def _let_decl(self, d: c.Declaration) -> CheckedDecl:
        ctx = ConstraintCtx()
        if d.type is not None:
            self.check_type(ctx, d.type)
            body = self.check(ctx, d.body, d.type)
        else:
            body, d.type = self.infer(ctx, d.body)
        self.sig.add(d)
        return CheckedDecl(d, body=body)

    def _fun_decl(self, d: c.Declaration) -> CheckedDecl:
        self.check_type(ConstraintCtx(), d.type)
        self.sig.add(d)
        if self.sig.is_type_former(d.name):
            errors = check_type_def_polarities(d, self.sig.decls, self.polarity_report)
            if errors:
                raise errors[0]
        self.measure = self._measure_state(d)
        clauses, kinds = [], []
        for clause in d.clauses:
            elab, kinds = self._clause(d, clause)
            clauses.append(elab)
        rows = [list(cl.patterns) for cl in clauses]
        width = len(rows[0]) if rows else 0
        missing = self.coverage.missing(rows, width)
        if missing is not None:
            raise _err("nonExhaustive", f"clauses of {d.name} do not cover {d.name} {show_patterns(missing)}", d.span)
        return CheckedDecl(d, clauses, kinds)

    def _measure_state(self, d: c.Declaration) -> Optional[MeasureState]:
        binders = c.leading_binders(d.type)
        names = [n for _, n, _ in binders]
        if d.measure is not None:
            template = d.measure
        elif d.is_recursive:
            template = tuple(c.SizeVar(n) for k, n, dom in binders if k == "pi" and isinstance(dom, c.SizeSort))
        else:
            return None
        used = [names.index(v) for m in template for v in c.size_vars(m)]
        return MeasureState(template, names, max(used) + 1 if used else 0)

    def _clause(self, d: c.Declaration, clause: c.Clause) -> tuple[c.Clause, list[str]]:
        ctx = ConstraintCtx()
        t = d.type
        kinds: list[str] = []
        pats: list[c.Pattern] = []
        binder_values: dict[str, c.CoreExpr] = {}
        for n, p in enumerate(clause.patterns):
            if not isinstance(t, (c.Pi, c.BoundedAll)):
                t = whnf(self.sig, t, self.fuel)
            if isinstance(t, c.Pi):
                if isinstance(t.domain, c.SizeSort):
                    if not isinstance(p, c.PVar):
                        raise _err("mismatch", "a size argument can only be matched by a variable", p.span or clause.span)
                    ctx = ctx.bind(p.name, c.SizeSort())
                    pe, value, kind = p, c.Var(p.name), "size"
                else:
                    ctx, pe, value = self.check_pattern(ctx, p, t.domain)
                    kind = "erased" if t.erased else "explicit"
                binder_values[t.name] = value
                t = c.subst1(t.codomain, t.name, value)
            elif isinstance(t, c.BoundedAll):
                if not isinstance(p, c.PVar):
                    raise _err("mismatch", "a bounded size argument can only be matched by a variable", p.span or clause.span)
                ctx = ctx.assume(p.name, t.bound)
                pe, kind = p, "bounded"
                binder_values[t.var] = c.Var(p.name)
                t = c.subst1(t.body, t.var, c.Var(p.name))
            else:
                given = _count(len(clause.patterns), "pattern")
                raise _err("patternArity", f"{d.name} is given {given} but its type has {_count(n, 'argument')}", clause.span)
            pats.append(pe)
            kinds.append(kind)
        if self.measure is not None:
            missing = [n for n in self.measure.binder_names[: self.measure.needed_args] if n not in binder_values]
            if missing:
                raise _err(
                    "unboundSizeInMeasure",
                    f"measure variable {missing[0]} must be bound by a pattern in every clause of {d.name}",
                    clause.span,
                )
            self.measure.entry = tuple(c.subst_size(m, binder_values) for m in self.measure.template)
        body = self.check(ctx, clause.body, t)
        return c.Clause(tuple(pats), body, span=clause.span), kinds

    # ------------------------------------------------------------ types

    def check_type(self, ctx: ConstraintCtx, t: c.CoreExpr) -> c.CoreExpr:
        elab, k = self.infer(ctx, t)
        if not isinstance(whnf(self.sig, k, self.fuel), c.SetSort):
            raise _err("mismatch", f"{show(t)} is not a type", t.span)
        return elab

    def size_arg(self, ctx: ConstraintCtx, e: c.CoreExpr) -> c.SizeExpr:
        s = c.to_size(e)
        if s is None:
            raise _err("mismatch", f"expected a size, got {show(e)}", e.span)
        base, _ = c.normalize_size(s)
        if base is not None and not isinstance(ctx.lookup(base), c.SizeSort):
            raise _err("mismatch", f"{base} is not a size variable", e.span)
        return s

    def _bound_size(self, ctx: ConstraintCtx, s: c.SizeExpr, span) -> None:
        base, _ = c.normalize_size(s)
        if base is not None and not isinstance(ctx.lookup(base), c.SizeSort):
            raise _err("mismatch", f"{base} is not a size variable", span)

    # ------------------------------------------------------------ infer

    def infer(self, ctx: ConstraintCtx, e: c.CoreExpr) -> tuple[c.CoreExpr, c.CoreExpr]:
        try:
            return self._infer(ctx, e)
        except TypeCheckError as err:
            if err.span is None:
                err.span = e.span
            raise

    def _infer(self, ctx: ConstraintCtx, e: c.CoreExpr) -> tuple[c.CoreExpr, c.CoreExpr]:
        completed = complete_data(self.sig, e)
        if completed is not e:
            fn, ft = self._infer_head(ctx, e)
            return self._apply(ctx, fn, ft, [completed.arg], completed)
        return self._infer_head(ctx, e)

    def _infer_head(self, ctx: ConstraintCtx, e: c.CoreExpr) -> tuple[c.CoreExpr, c.CoreExpr]:
        """Infer without giving a bare sized data type its default index."""
        match e:
            case c.SetSort() | c.SizeSort():
                return e, c.SetSort()
            case c.SizeVal(s):
                self._bound_size(ctx, s, e.span)
                return e, c.SizeSort()
            case c.Var(name):
                t = ctx.lookup(name)
                if t is None:
                    raise _err("mismatch", f"variable {name} is not in scope", e.span)
                return e, t
            case c.Def(name):
                if self.current is not None and name == self.current.name and self.measure is not None:
                    self._recursive_call(ctx, e, [])
                d = self.sig.get(name)
                if d is None or d.type is None:
                    raise _err("mismatch", f"{name} has no known type", e.span)
                return e, d.type
            case c.Con():
                return self._infer_con(ctx, e)
            case c.App():
                head, args = c.spine(e)
                if isinstance(head, c.Con):
                    return self._infer_con(ctx, e)
                if isinstance(head, c.Def) and self.current is not None and head.name == self.current.name and self.measure is not None:
                    self._recursive_call(ctx, head, args)
                    fn, ft = head, self.current.type
                else:
                    fn, ft = self._infer_head(ctx, head)
                return self._apply(ctx, fn, ft, args, e)
            case c.Pi(x, dom, cod, erased, pol):
                dom_e = self.check_type(ctx, dom)
                cod_e = self.check_type(ctx.bind(x, dom_e), cod) if x != "_" else self.check_type(ctx, cod)
                return c.Pi(x, dom_e, cod_e, erased, pol, span=e.span), c.SetSort()
            case c.BoundedAll(v, bound, body) | c.BoundedEx(v, bound, body):
                self._bound_size(ctx, bound, e.span)
                v2, body2 = self._fresh_binder(ctx, v, body)
                body_e = self.check_type(ctx.assume(v2, bound), body2)
                return type(e)(v2, bound, body_e, span=e.span), c.SetSort()
            case c.Prod(l, r):
                return c.Prod(self.check_type(ctx, l), self.check_type(ctx, r), span=e.span), c.SetSort()
            case c.Pair(l, r):
                le, lt = self.infer(ctx, l)
                re_, rt = self.infer(ctx, r)
                return c.Pair(le, re_, False, span=e.span), c.Prod(lt, rt)
            case c.Case():
                return self._case(ctx, e, None)
            case c.Lam():
                raise _err("mismatch", "cannot infer the type of a lambda; it needs a known function type", e.span)
        raise _err("mismatch", f"cannot infer a type for {show(e)}", getattr(e, "span", None))

    def _apply(self, ctx: ConstraintCtx, fn: c.CoreExpr, ft: c.CoreExpr, args: list[c.CoreExpr], whole: c.CoreExpr):
        for arg in args:
            t = ft if isinstance(ft, (c.Pi, c.BoundedAll)) else whnf(self.sig, ft, self.fuel)
            if isinstance(t, c.Pi):
                if isinstance(t.domain, c.SizeSort):
                    s = self.size_arg(ctx, arg)
                    arg_e, kind = c.from_size(s, arg.span), "size"
                else:
                    arg_e = self.check(ctx, arg, t.domain)
                    kind = "erased" if t.erased else "explicit"
                fn = c.App(fn, arg_e, kind, span=whole.span)
                ft = c.subst1(t.codomain, t.name, arg_e)
            elif isinstance(t, c.BoundedAll):
                s = self.size_arg(ctx, arg)
                if not self._lt_inst(ctx, s, t.bound):
                    raise _err(
                        "boundViolation",
                        f"size {c.show_size(s)} is not provably below {c.show_size(t.bound)} "
                        f"(forcing {show(fn)} beyond its guaranteed depth)",
                        arg.span or whole.span,
                    )
                fn = c.App(fn, c.from_size(s, arg.span), "bounded", span=whole.span)
                ft = c.subst1(t.body, t.var, c.from_size(s))
            else:
                raise _err("mismatch", f"{show(fn)} has type {show(ft)} and cannot be applied to {show(arg)}", arg.span or whole.span)
        return fn, ft

    # ------------------------------------------------------ termination

    def _recursive_call(self, ctx: ConstraintCtx, head: c.Def, args: list[c.CoreExpr]) -> None:
        m = self.measure
        name = self.current.name
        if len(args) < m.needed_args:
            raise _err(
                "measureNotDecreasing",
                f"recursive call to {name} must be applied to at least {_count(m.needed_args, 'argument')} "
                "so that its measure is determined",
                head.span,
            )
        sub = {}
        for n, a in zip(m.binder_names[: m.needed_args], args):
            sub[n] = a
        call = []
        for comp in m.template:
            base, _ = c.normalize_size(comp)
            if base is not None and c.to_size(sub.get(base, c.Var(base))) is None:
                raise _err("mismatch", f"argument for size {base} of {name} is not a size", head.span)
            call.append(c.subst_size(comp, sub))
        trace = self._lex_decrease(ctx, tuple(call), m.entry)
        if trace is not None:
            raise _err(
                "measureNotDecreasing",
                f"recursive call {name} has measure |{', '.join(map(c.show_size, call))}| which is not "
                f"smaller than |{', '.join(map(c.show_size, m.entry))}|: {trace}",
                head.span,
            )

    def _lex_decrease(self, ctx: ConstraintCtx, call: tuple, entry: tuple) -> Optional[str]:
        """None if `call` is lexicographically smaller than `entry`, else the reason it is not."""
        AUDIT.in_measure = True
        try:
            for p, (a, b) in enumerate(zip(call, entry)):
                ok = lt_measure(ctx, a, b)
                self._log("ltMeasure", ctx, a, b, ok)
                if ok:
                    return None
                if not (self._leq(ctx, a, b) and self._leq(ctx, b, a)):
                    return f"component {p + 1}: {c.show_size(a)} is neither smaller than nor equal to {c.show_size(b)}"
            if not entry:
                return "the declaration has no size parameters to measure"
            return "no component decreases"
        finally:
            AUDIT.in_measure = False

    # ------------------------------------------------------------ check

    def check(self, ctx: ConstraintCtx, e: c.CoreExpr, t: c.CoreExpr) -> c.CoreExpr:
        try:
            return self._check(ctx, e, t)
        except TypeCheckError as err:
            if err.span is None:
                err.span = e.span
            raise

    def _check(self, ctx: ConstraintCtx, e: c.CoreExpr, t: c.CoreExpr) -> c.CoreExpr:
        match e:
            case c.Lam(x, body):
                tw = whnf(self.sig, t, self.fuel)
                x2, body2 = self._fresh_binder(ctx, x, body)
                if isinstance(tw, c.Pi):
                    cod = c.subst1(tw.codomain, tw.name, c.Var(x2))
                    kind = "size" if isinstance(tw.domain, c.SizeSort) else ("erased" if tw.erased else "explicit")
                    return c.Lam(x2, self.check(ctx.bind(x2, tw.domain), body2, cod), kind, span=e.span)
                if isinstance(tw, c.BoundedAll):
                    inner = c.subst1(tw.body, tw.var, c.Var(x2))
                    return c.Lam(x2, self.check(ctx.assume(x2, tw.bound), body2, inner), "bounded", span=e.span)
                raise _err("mismatch", f"a function was given where {show(t)} is expected", e.span)
            case c.Pair(l, r):
                tw = whnf(self.sig, t, self.fuel)
                if isinstance(tw, c.Prod):
                    return c.Pair(self.check(ctx, l, tw.left), self.check(ctx, r, tw.right), False, span=e.span)
                if isinstance(tw, c.BoundedEx):
                    s = self.size_arg(ctx, l)
                    if not self._lt_inst(ctx, s, tw.bound):
                        raise _err(
                            "boundViolation",
                            f"size {c.show_size(s)} is not provably below {c.show_size(tw.bound)}",
                            l.span or e.span,
                        )
                    right = self.check(ctx, r, c.subst1(tw.body, tw.var, c.from_size(s)))
                    return c.Pair(c.from_size(s, l.span), right, True, span=e.span)
                raise _err("mismatch", f"a pair was given where {show(t)} is expected", e.span)
            case c.Case():
                elab, _ = self._case(ctx, e, t)
                return elab
            case c.Con() | c.App() if isinstance(c.spine(e)[0], c.Con):
                return self._check_con(ctx, e, t)
        elab, s = self.infer(ctx, e)
        self.subtyper.check(ctx, s, t, e.span)
        return elab

    def _fresh_binder(self, ctx: ConstraintCtx, x: str, body: c.CoreExpr) -> tuple[str, c.CoreExpr]:
        if x == "_" or x not in ctx.names():
            return x, body
        x2 = c.fresh(x, ctx.names() | c.free_vars(body))
        return x2, c.subst1(body, x, c.Var(x2))

    # ------------------------------------------------------ constructors

    def _check_con(self, ctx: ConstraintCtx, e: c.CoreExpr, t: c.CoreExpr) -> c.CoreExpr:
        head, args = c.spine(e)
        con = self.sig.constructors[head.name]
        data = self.sig.decls[con.data]
        tw = whnf(self.sig, t, self.fuel)
        if isinstance(tw, c.Pi) and len(args) < len(con.fields):
            z = c.fresh("x", ctx.names() | c.free_vars(e))
            return self.check(ctx, c.Lam(z, c.App(e, c.Var(z)), span=e.span), t)
        th, targs = c.spine(tw)
        arity = len(data.params) + (1 if data.sized else 0)
        if not (isinstance(th, c.Def) and th.name == data.name and len(targs) == arity):
            raise _err("mismatch", f"constructor {con.name} of {data.name} used where {show(t)} is expected", e.span)
        if len(args) != len(con.fields):
            raise _err("mismatch", f"constructor {con.name} expects {_count(len(con.fields), 'argument')}, got {len(args)}", e.span)
        sub = {p.name: a for p, a in zip(data.params, targs)}
        if not data.sized:
            return self._con_fields(ctx, con, args, sub, None, e)
        target = self.size_arg(ctx, targs[-1])
        first_error: Optional[TypeCheckError] = None
        for m in self._size_candidates(ctx, con, data, args, target):
            if not leq(ctx, c.SizeSucc(m), target):
                continue
            try:
                return self._con_fields(ctx, con, args, {**sub, con.size_var: c.from_size(m)}, m, e)
            except TypeCheckError as err:
                first_error = first_error or err
        if first_error is not None:
            raise first_error
        raise _err("boundViolation", f"no size fits constructor {con.name} below {c.show_size(target)}", e.span)

    def _con_fields(self, ctx, con: c.Constructor, args, sub: dict, size: Optional[c.SizeExpr], e) -> c.CoreExpr:
        out: c.CoreExpr = c.Con(con.name, span=c.spine(e)[0].span)
        if size is not None:
            out = c.App(out, c.SizeVal(size), "size")
        for (fname, ftype), arg in zip(con.fields, args):
            a = self.check(ctx, arg, c.subst(ftype, sub))
            sub = {**sub, fname: a}
            out = c.App(out, a, "explicit", span=e.span)
        return out

    def _size_candidates(self, ctx, con: c.Constructor, data: c.Declaration, args, target: c.SizeExpr) -> list[c.SizeExpr]:
        cands: list[c.SizeExpr] = []
        for (_, ftype), arg in zip(con.fields, args):
            if not any(isinstance(x, c.Def) and x.name == data.name for x in c.iter_subterms(ftype)):
                continue
            if isinstance(c.spine(arg)[0], (c.Con, c.Lam, c.Pair, c.Case)):
                continue
            try:
                _, at = self.infer(ctx, arg)
            except TypeCheckError:
                continue
            h, as_ = c.spine(whnf(self.sig, at, self.fuel))
            if isinstance(h, c.Def) and h.name == data.name and as_ and c.to_size(as_[-1]) is not None:
                cands.append(c.to_size(as_[-1]))
        base, off = c.normalize_size(target)
        if base is None:
            cands.append(INFTY)
        elif off > 0:
            cands.append(c.make_size(base, off - 1))
        cands.extend(c.SizeVar(v) for v in reversed(ctx.size_variables()))
        seen, out = set(), []
        for s in cands:
            key = c.normalize_size(s)
            if key not in seen:
                seen.add(key)
                out.append(s)
        return out

    def _infer_con(self, ctx: ConstraintCtx, e: c.CoreExpr) -> tuple[c.CoreExpr, c.CoreExpr]:
        head, args = c.spine(e)
        con = self.sig.constructors[head.name]
        data = self.sig.decls[con.data]
        names = [p.name for p in data.params]
        found: dict[str, c.CoreExpr] = {}
        for (_, ftype), arg in zip(con.fields, args):
            if all(n in found for n in names):
                break
            if isinstance(c.spine(arg)[0], (c.Con, c.Lam, c.Case)):
                continue
            try:
                _, at = self.infer(ctx, arg)
            except TypeCheckError:
                continue
            _bind_params(ftype, whnf(self.sig, at, self.fuel), names, found, self.sig, self.fuel)
        if not all(n in found for n in names):
            raise _err(
                "mismatch",
                f"cannot infer the parameters of {data.name} for constructor {con.name}; give it a type annotation",
                e.span,
            )
        expected = c.apply(c.Def(data.name), [found[n] for n in names] + ([c.SizeVal(INFTY)] if data.sized else []))
        return self._check_con(ctx, e, expected), expected

    # ------------------------------------------------------------ patterns

    def check_pattern(self, ctx: ConstraintCtx, p: c.Pattern, t: c.CoreExpr):
        """Extend `ctx` with the bindings of `p` at type `t`; returns (ctx, elaborated pattern, value)."""
        match p:
            case c.PVar(name):
                tw = whnf(self.sig, t, self.fuel)
                return ctx.bind(name, c.SizeSort() if isinstance(tw, c.SizeSort) else t), p, c.Var(name)
            case c.PPair(l, r):
                tw = whnf(self.sig, t, self.fuel)
                if isinstance(tw, c.Prod):
                    ctx, le, lv = self.check_pattern(ctx, l, tw.left)
                    ctx, re_, rv = self.check_pattern(ctx, r, tw.right)
                    return ctx, c.PPair(le, re_, False, span=p.span), c.Pair(lv, rv)
                if isinstance(tw, c.BoundedEx):
                    if not isinstance(l, c.PVar):
                        raise _err("mismatch", "the size of an existential pair can only be matched by a variable", p.span)
                    ctx = ctx.assume(l.name, tw.bound)
                    ctx, re_, rv = self.check_pattern(ctx, r, c.subst1(tw.body, tw.var, c.Var(l.name)))
                    return ctx, c.PPair(l, re_, True, span=p.span), c.Pair(c.Var(l.name), rv)
                raise _err("mismatch", f"pair pattern against {show(t)}", p.span)
            case c.PCon(name, args):
                con = self.sig.constructors[name]
                data = self.sig.decls[con.data]
                tw = whnf(self.sig, t, self.fuel)
                th, targs = c.spine(tw)
                if not (isinstance(th, c.Def) and th.name == data.name):
                    raise _err("mismatch", f"constructor {name} of {data.name} cannot match a value of type {show(t)}", p.span)
                if len(args) != con.pattern_arity:
                    raise _err(
                        "patternArity",
                        f"constructor pattern {name} takes {_count(con.pattern_arity, 'argument')}, got {len(args)}",
                        p.span,
                    )
                sub = {pp.name: a for pp, a in zip(data.params, targs)}
                value: c.CoreExpr = c.Con(name)
                rest = list(args)
                out_args: list[c.Pattern] = []
                if data.sized:
                    sp = rest.pop(0)
                    if not isinstance(sp, c.PVar):
                        raise _err("mismatch", "the size of a constructor pattern must be a variable", p.span)
                    bound = self.size_arg(ctx, targs[-1])
                    ctx = ctx.assume(sp.name, bound)
                    sub[con.size_var] = c.Var(sp.name)
                    value = c.App(value, c.Var(sp.name), "size")
                    out_args.append(sp)
                for (fname, ftype), sub_p in zip(con.fields, rest):
                    ctx, pe, v = self.check_pattern(ctx, sub_p, c.subst(ftype, sub))
                    sub[fname] = v
                    value = c.App(value, v, "explicit")
                    out_args.append(pe)
                return ctx, c.PCon(name, tuple(out_args), span=p.span), value
        raise TypeError(p)

    # ---------------------------------------------------------------- case

    def _case(self, ctx: ConstraintCtx, e: c.Case, t: Optional[c.CoreExpr]) -> tuple[c.CoreExpr, c.CoreExpr]:
        if e.ascription is not None:
            asc = self.check_type(ctx, e.ascription)
            scrut = self.check(ctx, e.scrutinee, asc)
            st = asc
        else:
            asc = None
            scrut, st = self.infer(ctx, e.scrutinee)
        branches = []
        result = t
        for pat, body in e.branches:
            pat, body = self._freshen_branch(ctx, pat, body)
            bctx, pe, _ = self.check_pattern(ctx, pat, st)
            if result is None:
                be, result = self.infer(bctx, body)
                if any(v in c.free_vars(result) for v in c.pattern_vars(pat)):
                    raise _err("mismatch", "the type of a case expression cannot mention pattern variables", body.span)
            else:
                be = self.check(bctx, body, result)
            branches.append((pe, be))
        missing = self.coverage.missing([[p] for p, _ in branches], 1)
        if missing is not None:
            raise _err("nonExhaustive", f"case does not cover {show_patterns(missing)}", e.span)
        if result is None:
            raise _err("mismatch", "a case with no branches needs a known type", e.span)
        return c.Case(scrut, asc, tuple(branches), span=e.span), result

    def _freshen_branch(self, ctx: ConstraintCtx, pat: c.Pattern, body: c.CoreExpr):
        clash = [v for v in c.pattern_vars(pat) if v in ctx.names()]
        if not clash:
            return pat, body
        avoid = ctx.names() | c.free_vars(body) | set(c.pattern_vars(pat))
        ren = {v: c.fresh(v, avoid) for v in clash}
        return c.rename_pattern(pat, ren), c.subst(body, {o: c.Var(n) for o, n in ren.items()})


def _bind_params(pattern: c.CoreExpr, actual: c.CoreExpr, names, found: dict, sig: Signature, fuel: Fuel) -> None:
    """First-order matching of a field type against an argument's type, binding data parameters."""
    if isinstance(pattern, c.Var) and pattern.name in names:
        found.setdefault(pattern.name, actual)
        return
    ph, pargs = c.spine(pattern)
    ah, aargs = c.spine(whnf(sig, actual, fuel))
    if isinstance(ph, c.Def) and isinstance(ah, c.Def) and ph.name == ah.name:
        for a, b in zip(pargs, aargs):
            _bind_params(a, b, names, found, sig, fuel)


def check_program(
    decls: list[c.Declaration], sig: Optional[Signature] = None, explain: bool = False, unfold_fuel: int = DEFAULT_UNFOLD_FUEL
) -> CheckResult:
    return Checker(sig, unfold_fuel, explain).check_program(decls)
