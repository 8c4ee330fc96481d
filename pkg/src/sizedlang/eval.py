"""Size erasure and call-by-value evaluation with finite-depth observation.

Two runtime encodings are supported:

* ``erased``: size and type binders vanish, a bounded size lambda becomes a
  memoized thunk, and bounded size application forces it.
* ``tokens``: every size or type argument is passed as the unit value and a
  bounded size lambda is a closure over that unit, memoized since its argument
  carries no information.

Both encodings must give the same observation trees; the test suite checks it.
"""

from __future__ import annotations

import os
import sys
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional, Union

from sizedlang import core as c
from sizedlang.check.checker import CheckedDecl
from sizedlang.check.signature import Signature
from sizedlang.errors import EvalError, FuelExhausted

ERASED = "erased"
TOKENS = "tokens"
MODES = (ERASED, TOKENS)
DEFAULT_FUEL = 10**7
FUEL_ENV = "SIZEDLANG_FUEL"


def default_fuel() -> int:
    raw = os.environ.get(FUEL_ENV)
    return int(raw) if raw else DEFAULT_FUEL


# ---------------------------------------------------------------- runtime terms


@dataclass(frozen=True)
class RVar:
    name: str


@dataclass(frozen=True)
class RGlobal:
    name: str


@dataclass(frozen=True)
class RCon:
    name: str


@dataclass(frozen=True)
class RUnit:
    pass


@dataclass(frozen=True)
class RLam:
    name: str
    body: "RExpr"
    kind: str = "explicit"  # tokens mode keeps size/erased/bounded lambdas, marked


@dataclass(frozen=True)
class RDelay:
    body: "RExpr"


@dataclass(frozen=True)
class RForce:
    expr: "RExpr"


@dataclass(frozen=True)
class RApp:
    fn: "RExpr"
    arg: "RExpr"


@dataclass(frozen=True)
class RPair:
    left: "RExpr"
    right: "RExpr"
    existential: bool = False


@dataclass(frozen=True)
class RCase:
    scrutinee: "RExpr"
    branches: tuple[tuple[c.Pattern, "RExpr"], ...]


RExpr = Union[RVar, RGlobal, RCon, RUnit, RLam, RDelay, RForce, RApp, RPair, RCase]
R_UNIT = RUnit()

_TYPE_FORMS = (c.SetSort, c.SizeSort, c.Pi, c.BoundedAll, c.BoundedEx, c.Prod)
_SILENT_KINDS = ("size", "erased")


def _is_type_level(sig: Signature, name: str) -> bool:
    d = sig.get(name)
    return d is not None and (d.kind == "data" or sig.is_type_former(name))


def erase(e: c.CoreExpr, sig: Signature, mode: str = ERASED) -> RExpr:
    """Translate an elaborated term into a runtime term of the given encoding."""
    match e:
        case c.Var(name):
            return RVar(name)
        case c.Def(name):
            return R_UNIT if _is_type_level(sig, name) else RGlobal(name)
        case c.Con(name):
            return RCon(name)
        case c.SizeVal():
            return R_UNIT
        case c.App(fn, arg, kind):
            if kind in _SILENT_KINDS:
                f = erase(fn, sig, mode)
                return f if mode == ERASED else RApp(f, R_UNIT)
            if kind == "bounded":
                f = erase(fn, sig, mode)
                return RForce(f) if mode == ERASED else RApp(f, R_UNIT)
            return RApp(erase(fn, sig, mode), erase(arg, sig, mode))
        case c.Lam(name, body, kind):
            b = erase(body, sig, mode)
            if kind in _SILENT_KINDS:
                return b if mode == ERASED else RLam(name, b, kind)
            if kind == "bounded":
                return RDelay(b) if mode == ERASED else RLam(name, b, kind)
            return RLam(name, b)
        case c.Pair(left, right, existential):
            if existential:
                r = erase(right, sig, mode)
                return r if mode == ERASED else RPair(R_UNIT, r, True)
            return RPair(erase(left, sig, mode), erase(right, sig, mode))
        case c.Case(scrutinee, _, branches):
            return RCase(
                erase(scrutinee, sig, mode),
                tuple((erase_pattern(p, sig, mode), erase(b, sig, mode)) for p, b in branches),
            )
        case _ if isinstance(e, _TYPE_FORMS):
            return R_UNIT
    raise EvalError(f"cannot erase {type(e).__name__}", getattr(e, "span", None))


def erase_pattern(p: c.Pattern, sig: Signature, mode: str = ERASED) -> c.Pattern:
    """Drop size sub-patterns (erased mode only); they only ever bind sizes."""
    match p:
        case c.PVar():
            return p
        case c.PCon(name, args):
            args = tuple(erase_pattern(a, sig, mode) for a in args)
            if mode == ERASED and sig.constructors[name].size_var is not None:
                args = args[1:]
            return c.PCon(name, args)
        case c.PPair(left, right, existential):
            if existential and mode == ERASED:
                return erase_pattern(right, sig, mode)
            return c.PPair(erase_pattern(left, sig, mode), erase_pattern(right, sig, mode), existential)
    raise EvalError(f"cannot erase pattern {p!r}")


# ----------------------------------------------------------------------- values


class UnitV:
    _instance: Optional["UnitV"] = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UnitV"


UNIT = UnitV()
_UNSET = object()


@dataclass(eq=False)
class Closure:
    env: dict
    name: str
    body: RExpr
    kind: str = "explicit"
    cell: Any = _UNSET  # result cache for bounded closures, written once


@dataclass(eq=False)
class Thunk:
    env: dict
    body: RExpr
    cell: Any = _UNSET


@dataclass(eq=False)
class PairV:
    left: Any
    right: Any
    existential: bool = False


@dataclass(eq=False)
class ConV:
    name: str
    args: tuple
    sized: bool = False  # tokens mode: args[0] is the size token

    @property
    def fields(self) -> tuple:
        return self.args[1:] if self.sized else self.args


@dataclass(eq=False)
class ConPartial:
    name: str
    args: tuple


@dataclass(eq=False)
class PartialV:
    """A global function applied to fewer arguments than its clauses match."""

    fun: "RuntimeFun"
    args: tuple
    cell: Any = _UNSET  # cache when the next position takes no information

    @property
    def next_kind(self) -> str:
        return self.fun.positions[len(self.args)]


Value = Union[UnitV, Closure, Thunk, PairV, ConV, ConPartial, PartialV]


@dataclass
class RuntimeFun:
    name: str
    positions: list[str]  # per runtime argument: explicit, size, erased, bounded or force
    clauses: list[tuple[tuple[c.Pattern, ...], RExpr]]


_FORCE = "force"


def _runtime_fun(cd: CheckedDecl, sig: Signature, mode: str) -> RuntimeFun:
    kinds = cd.pattern_kinds
    positions: list[str] = []
    keep: list[int] = []
    for idx, k in enumerate(kinds):
        if mode == ERASED:
            if k in _SILENT_KINDS:
                continue
            if k == "bounded":
                positions.append(_FORCE)
                continue
        positions.append(k)
        keep.append(idx)
    clauses = []
    for cl in cd.clauses:
        pats = []
        for idx, p in enumerate(cl.patterns):
            if mode == ERASED and kinds[idx] != "explicit":
                if kinds[idx] == "bounded":
                    pats.append(c.PVar("_"))
                continue
            pats.append(erase_pattern(p, sig, mode))
        clauses.append((tuple(pats), erase(cl.body, sig, mode)))
    return RuntimeFun(cd.decl.name, positions, clauses)


# ---------------------------------------------------------------------- machine


class Budget:
    """Counts function applications and forcings; running out is an error."""

    def __init__(self, amount: Optional[int] = None):
        self.amount = default_fuel() if amount is None else amount
        self.used = 0

    def spend(self) -> None:
        self.used += 1
        if self.used > self.amount:
            raise FuelExhausted(f"evaluation used more than {self.amount} steps")


class Machine:
    def __init__(self, sig: Signature, checked: Iterable[CheckedDecl], mode: str = ERASED, fuel: Optional[int] = None):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        self.sig = sig
        self.mode = mode
        self.budget = Budget(fuel)
        self.funs: dict[str, RuntimeFun] = {}
        self.lets: dict[str, RExpr] = {}
        self.cafs: dict[str, Any] = {}
        self.memo: dict[tuple, Any] = {}
        for cd in checked:
            d = cd.decl
            if d.kind == "data" or sig.is_type_former(d.name):
                continue
            if d.kind == "let":
                self.lets[d.name] = erase(cd.body, sig, mode)
            else:
                self.funs[d.name] = _runtime_fun(cd, sig, mode)

    # -- entry points

    def global_value(self, name: str) -> Value:
        if name in self.lets:
            if name not in self.cafs:
                self.cafs[name] = self.eval({}, self.lets[name])
            return self.cafs[name]
        if name in self.funs:
            return self._saturate(PartialV(self.funs[name], ()))
        raise EvalError(f"{name} has no runtime value")

    # -- evaluation

    def eval(self, env: dict, e: RExpr) -> Value:
        match e:
            case RVar(name):
                return env[name]
            case RGlobal(name):
                return self.global_value(name)
            case RCon(name):
                return self._con(name, ())
            case RUnit():
                return UNIT
            case RLam(name, body, kind):
                return Closure(env, name, body, kind)
            case RDelay(body):
                return Thunk(env, body)
            case RForce(inner):
                return self.force(self.eval(env, inner))
            case RApp(fn, arg):
                f = self.eval(env, fn)
                return self.apply(f, self.eval(env, arg))
            case RPair(left, right, existential):
                return PairV(self.eval(env, left), self.eval(env, right), existential)
            case RCase(scrutinee, branches):
                v = self.eval(env, scrutinee)
                for pat, body in branches:
                    bound = match_value(pat, v)
                    if bound is not None:
                        return self.eval({**env, **bound}, body)
                raise EvalError("no case branch matches")
        raise EvalError(f"cannot evaluate {e!r}")

    def apply(self, f: Value, v: Value) -> Value:
        if isinstance(f, Closure):
            if f.kind == "bounded" and f.cell is not _UNSET:
                return f.cell
            self.budget.spend()
            out = self.eval({**f.env, f.name: v}, f.body)
            if f.kind == "bounded":
                f.cell = out
            return out
        if isinstance(f, PartialV):
            if f.next_kind == _FORCE:
                raise EvalError(f"{f.fun.name} expects to be forced, not applied")
            if f.next_kind == "bounded":
                if f.cell is _UNSET:
                    f.cell = self._saturate(PartialV(f.fun, f.args + (v,)))
                return f.cell
            return self._saturate(PartialV(f.fun, f.args + (v,)))
        if isinstance(f, ConPartial):
            return self._con(f.name, f.args + (v,))
        raise EvalError(f"cannot apply {type(f).__name__}")

    def force(self, f: Value) -> Value:
        if isinstance(f, Thunk):
            if f.cell is _UNSET:
                self.budget.spend()
                f.cell = self.eval(f.env, f.body)
            return f.cell
        if isinstance(f, PartialV) and f.next_kind == _FORCE:
            if f.cell is _UNSET:
                f.cell = self._saturate(PartialV(f.fun, f.args + (UNIT,)))
            return f.cell
        raise EvalError(f"cannot force {type(f).__name__}")

    def _con(self, name: str, args: tuple) -> Value:
        con = self.sig.constructors[name]
        sized = con.size_var is not None and self.mode == TOKENS
        arity = len(con.fields) + (1 if sized else 0)
        if len(args) < arity:
            return ConPartial(name, args)
        return ConV(name, args, sized)

    def _saturate(self, p: PartialV) -> Value:
        if len(p.args) < len(p.fun.positions):
            return p
        key = (p.fun.name, len(p.args))
        cacheable = all(a is UNIT for a in p.args)
        if cacheable and key in self.memo:
            return self.memo[key]
        out = self._call(p.fun, p.args)
        if cacheable:
            self.memo[key] = out
        return out

    def _call(self, fun: RuntimeFun, args: tuple) -> Value:
        self.budget.spend()
        for pats, body in fun.clauses:
            env: dict = {}
            for pat, arg in zip(pats, args):
                bound = match_value(pat, arg)
                if bound is None:
                    break
                env.update(bound)
            else:
                return self.eval(env, body)
        raise EvalError(f"no clause of {fun.name} matches")


def match_value(p: c.Pattern, v: Value) -> Optional[dict]:
    if isinstance(p, c.PVar):
        return {} if p.name == "_" else {p.name: v}
    if isinstance(p, c.PPair):
        if not isinstance(v, PairV):
            return None
        left = match_value(p.left, v.left)
        right = match_value(p.right, v.right) if left is not None else None
        return None if right is None else {**left, **right}
    if not isinstance(v, ConV) or v.name != p.name or len(v.args) != len(p.args):
        return None
    out: dict = {}
    for sub, arg in zip(p.args, v.args):
        m = match_value(sub, arg)
        if m is None:
            return None
        out.update(m)
    return out


# ------------------------------------------------------------------ observation


@dataclass(frozen=True)
class ONat:
    value: int


@dataclass(frozen=True)
class OCon:
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class OPair:
    left: Any
    right: Any


@dataclass(frozen=True)
class OUnit:
    pass


@dataclass(frozen=True)
class OFun:
    pass


@dataclass(frozen=True)
class OThunk:
    """A delayed computation left unforced because the depth ran out."""


Observation = Union[ONat, OCon, OPair, OUnit, OFun, OThunk]


def _nat_value(v: Value) -> Optional[int]:
    n = 0
    while isinstance(v, ConV):
        if v.name == "zero" and not v.fields:
            return n
        if v.name == "succ" and len(v.fields) == 1:
            n += 1
            v = v.fields[0]
            continue
        return None
    return None


def observe(m: Machine, v: Value, depth: int) -> Observation:
    """Force up to `depth` delayed computations along every path of `v`."""
    if isinstance(v, ConV):
        n = _nat_value(v)
        if n is not None:
            return ONat(n)
        return OCon(v.name, tuple(observe(m, a, depth) for a in v.fields))
    if isinstance(v, PairV):
        if v.existential:
            return observe(m, v.right, depth)
        return OPair(observe(m, v.left, depth), observe(m, v.right, depth))
    if isinstance(v, UnitV):
        return OUnit()
    if isinstance(v, Thunk) or (isinstance(v, PartialV) and v.next_kind in (_FORCE, "bounded")) or (
        isinstance(v, Closure) and v.kind == "bounded"
    ):
        if depth <= 0:
            return OThunk()
        forced = m.force(v) if m.mode == ERASED else m.apply(v, UNIT)
        return observe(m, forced, depth - 1)
    if isinstance(v, Closure) and v.kind in _SILENT_KINDS:
        return observe(m, m.apply(v, UNIT), depth)
    if isinstance(v, PartialV) and v.next_kind in _SILENT_KINDS:
        return observe(m, m.apply(v, UNIT), depth)
    return OFun()


def stream_elements(tree: Observation) -> Optional[list[Observation]]:
    """The heads of a pair chain ending in an unforced tail, if `tree` is one."""
    out = []
    while isinstance(tree, OPair):
        out.append(tree.left)
        tree = tree.right
    return out if isinstance(tree, OThunk) and out else None


def render(tree: Observation, atomic: bool = False) -> str:
    match tree:
        case ONat(n):
            return str(n)
        case OCon(name, args):
            if not args:
                return name
            text = " ".join([name] + [render(a, True) for a in args])
            return f"({text})" if atomic else text
        case OPair(left, right):
            return f"({render(left)}, {render(right)})"
        case OUnit():
            return "()"
        case OFun():
            return "<function>"
        case OThunk():
            return "<delayed>"
    raise TypeError(tree)


# ---------------------------------------------------------------------- helpers

_STACK_BYTES = 512 * 1024 * 1024


def run_deep(fn: Callable[[], Any]) -> Any:
    """Run `fn` on a thread with a large stack; unary arithmetic recurses deeply."""
    result: dict = {}

    def target() -> None:
        try:
            result["value"] = fn()
        except BaseException as err:  # re-raised on the calling thread
            result["error"] = err

    old_limit = sys.getrecursionlimit()
    old_size = threading.stack_size()
    sys.setrecursionlimit(max(old_limit, 1_000_000))
    threading.stack_size(_STACK_BYTES)
    try:
        t = threading.Thread(target=target)
        t.start()
        t.join()
    finally:
        threading.stack_size(old_size)
        sys.setrecursionlimit(old_limit)
    if "error" in result:
        raise result["error"]
    return result["value"]


@dataclass
class Outcome:
    tree: Observation
    steps: int

    @property
    def lines(self) -> list[str]:
        elems = stream_elements(self.tree)
        if elems is None:
            return [render(self.tree)]
        return [render(t) for t in elems]


def evaluate(
    sig: Signature,
    checked: Iterable[CheckedDecl],
    main: str,
    depth: int,
    mode: str = ERASED,
    fuel: Optional[int] = None,
) -> Outcome:
    """Evaluate global `main` and observe it to `depth` forcings."""
    m = Machine(sig, checked, mode, fuel)

    def go() -> Outcome:
        return Outcome(observe(m, m.global_value(main), depth), m.budget.used)

    return run_deep(go)


def main_candidates(checked: Iterable[CheckedDecl], origin: Optional[str] = None) -> list[str]:
    """Closed `let` definitions (no parameters) of a file, in declaration order."""
    out = []
    for cd in checked:
        d = cd.decl
        if d.kind != "let" or cd.body is None or isinstance(cd.body, c.Lam):
            continue
        if origin is not None and d.origin != origin:
            continue
        out.append(d.name)
    return out


def default_main(names: list[str]) -> Optional[str]:
    for n in names:
        if n.endswith("Main"):
            return n
    return names[-1] if names else None
