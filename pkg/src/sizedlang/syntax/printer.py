"""Pretty-printer for the surface AST; output always re-parses to an equal tree."""

from __future__ import annotations

from sizedlang.syntax.ast import (
    Binder,
    PCon,
    PPair,
    PVar,
    SApp,
    SBoundedAll,
    SBoundedEx,
    SCase,
    SData,
    SDecl,
    SExpr,
    SFun,
    SInfty,
    SLam,
    SLet,
    SMeasure,
    SPair,
    SPattern,
    SPatternSyn,
    SPi,
    SProd,
    SSet,
    SSize,
    SSucc,
    SVar,
)

EXPR, PROD, APP, ATOM = range(4)


def _paren(text: str, own: int, ctx: int) -> str:
    return f"({text})" if own < ctx else text


def print_binder(b: Binder) -> str:
    open_, close = ("[", "]") if b.erased else ("(", ")")
    return f"{b.polarity or ''}{open_}{', '.join(b.names)} : {print_expr(b.type)}{close}"


def print_expr(e: SExpr, ctx: int = EXPR) -> str:
    match e:
        case SVar(name):
            return name
        case SSet():
            return "Set"
        case SSize():
            return "Size"
        case SInfty():
            return "#"
        case SSucc(arg):
            return f"$ {print_expr(arg, ATOM)}"
        case SPair(l, r):
            return f"({print_expr(l)}, {print_expr(r)})"
        case SApp(fn, arg):
            return _paren(f"{print_expr(fn, APP)} {print_expr(arg, ATOM)}", APP, ctx)
        case SProd(l, r):
            return _paren(f"{print_expr(l, APP)} & {print_expr(r, PROD)}", PROD, ctx)
        case SBoundedEx(v, bound, body):
            return _paren(f"[{v} < {print_expr(bound, APP)}] & {print_expr(body, PROD)}", PROD, ctx)
        case SPi(binder, body):
            if binder.names:
                head = print_binder(binder)
            else:
                head = print_expr(binder.type, PROD)
            return _paren(f"{head} -> {print_expr(body)}", EXPR, ctx)
        case SBoundedAll(v, bound, body):
            return _paren(f"[{v} < {print_expr(bound, APP)}] -> {print_expr(body)}", EXPR, ctx)
        case SLam(names, body):
            return _paren(f"\\ {' '.join(names)} -> {print_expr(body)}", EXPR, ctx)
        case SMeasure(ms, body):
            inner = ", ".join(print_expr(m, APP) for m in ms)
            return _paren(f"|{inner}| -> {print_expr(body)}", EXPR, ctx)
        case SCase(scrut, asc, branches):
            text = f"case {print_expr(scrut, APP)}"
            if asc is not None:
                text += f" : {print_expr(asc)}"
            arms = " ; ".join(f"{print_pattern(p)} -> {print_expr(b)}" for p, b in branches)
            return _paren(f"{text} {{ {arms} }}", EXPR, ctx)
    raise TypeError(f"not a surface expression: {e!r}")


def print_pattern(p: SPattern, atomic: bool = False) -> str:
    match p:
        case PVar(name):
            return name
        case PPair(l, r):
            return f"({print_pattern(l)}, {print_pattern(r)})"
        case PCon(name, ()):
            return f"({name})"
        case PCon(name, args):
            text = " ".join([name, *(print_pattern(a, atomic=True) for a in args)])
            return f"({text})" if atomic else text
    raise TypeError(f"not a pattern: {p!r}")


def print_decl(d: SDecl) -> str:
    match d:
        case SData(name, params, typ, ctors):
            head = " ".join([f"data {name}", *(print_binder(b) for b in params)])
            body = "\n; ".join(f"{c.name} : {print_expr(c.type)}" for c in ctors)
            return f"{head} : {print_expr(typ)}\n{{ {body}\n}}" if ctors else f"{head} : {print_expr(typ)}\n{{}}"
        case SFun(keyword, name, typ, clauses):
            lines = []
            for c in clauses:
                lhs = " ".join([c.name, *(print_pattern(p, atomic=True) for p in c.patterns)])
                lines.append(f"{lhs} = {print_expr(c.body)}")
            return f"{keyword} {name} : {print_expr(typ)}\n{{ " + "\n; ".join(lines) + "\n}"
        case SLet(name, params, typ, body):
            head = " ".join([f"let {name}", *(print_binder(b) for b in params)])
            if typ is not None:
                head += f" : {print_expr(typ)}"
            return f"{head} = {print_expr(body)}"
        case SPatternSyn(name, params, pat):
            return " ".join(["pattern", name, *params]) + f" = {print_pattern(pat)}"
    raise TypeError(f"not a declaration: {d!r}")


def print_program(decls: list[SDecl]) -> str:
    return "\n\n".join(print_decl(d) for d in decls) + ("\n" if decls else "")
