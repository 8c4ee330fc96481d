"""Subtyping driven by declared polarities and the size order."""

from __future__ import annotations

from typing import Callable, Optional

from sizedlang import core as c
from sizedlang.check.signature import Fuel, Signature, complete_data, whnf
from sizedlang.core import ConstraintCtx, Polarity
from sizedlang.errors import TypeCheckError
from sizedlang.sizes import leq


def show(e: c.CoreExpr) -> str:
    from sizedlang.scope import unscope
    from sizedlang.syntax.printer import print_expr

    return print_expr(unscope(e))


def _is_size(ctx: ConstraintCtx, e: c.CoreExpr) -> bool:
    if isinstance(e, c.SizeVal):
        return True
    return isinstance(e, c.Var) and isinstance(ctx.lookup(e.name), c.SizeSort)


class NotSubtype(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


SizeLogger = Callable[[ConstraintCtx, c.SizeExpr, c.SizeExpr, bool], None]


class Subtyper:
    def __init__(self, sig: Signature, fuel: Fuel, log_size: Optional[SizeLogger] = None):
        self.sig = sig
        self.fuel = fuel
        self.log_size = log_size

    def check(self, ctx: ConstraintCtx, s: c.CoreExpr, t: c.CoreExpr, span=None) -> None:
        """Raise notASubtype unless `s <= t`."""
        try:
            self.sub(ctx, s, t)
        except NotSubtype as err:
            raise TypeCheckError(
                f"{show(s)} is not a subtype of {show(t)}: {err.reason}", span, kind="notASubtype"
            ) from None

    def is_subtype(self, ctx: ConstraintCtx, s: c.CoreExpr, t: c.CoreExpr) -> bool:
        try:
            self.sub(ctx, s, t)
            return True
        except NotSubtype:
            return False

    def size_leq(self, ctx: ConstraintCtx, a: c.SizeExpr, b: c.SizeExpr) -> None:
        ok = leq(ctx, a, b)
        if self.log_size is not None:
            self.log_size(ctx, a, b, ok)
        if not ok:
            raise NotSubtype(f"size {c.show_size(a)} is not provably <= {c.show_size(b)}")

    # ----------------------------------------------------------------- rules

    def sub(self, ctx: ConstraintCtx, s: c.CoreExpr, t: c.CoreExpr) -> None:
        s, t = complete_data(self.sig, s), complete_data(self.sig, t)
        if c.alpha_equal(s, t):
            return
        if _is_size(ctx, s) and _is_size(ctx, t):
            self.size_leq(ctx, c.to_size(s), c.to_size(t))
            self.size_leq(ctx, c.to_size(t), c.to_size(s))
            return
        if self._same_head(ctx, s, t):
            return
        s2, t2 = whnf(self.sig, s, self.fuel), whnf(self.sig, t, self.fuel)
        if (s2, t2) != (s, t):
            self.sub(ctx, s2, t2)
            return
        self._structural(ctx, s, t)

    def _same_head(self, ctx: ConstraintCtx, s: c.CoreExpr, t: c.CoreExpr) -> bool:
        """Compare `D a..` with `D b..` argumentwise; False if not applicable or inconclusive."""
        hs, args_s = c.spine(s)
        ht, args_t = c.spine(t)
        if not (isinstance(hs, c.Def) and isinstance(ht, c.Def) and hs.name == ht.name):
            return False
        if len(args_s) != len(args_t):
            return False
        d = self.sig.get(hs.name)
        if d is None or not (d.kind == "data" or self.sig.is_type_former(d.name)):
            return False
        info = self.sig.param_info(hs.name)
        if len(info) < len(args_s):
            return False
        try:
            for p, a, b in zip(info, args_s, args_t):
                if p.is_size and c.to_size(a) is not None and c.to_size(b) is not None:
                    self._related_sizes(ctx, p.polarity, c.to_size(a), c.to_size(b))
                else:
                    self._related(ctx, p.polarity, a, b)
        except NotSubtype:
            if d.kind == "data":
                raise
            return False  # a type-level definition may still relate after unfolding
        return True

    def _related(self, ctx: ConstraintCtx, pol: Polarity, a: c.CoreExpr, b: c.CoreExpr) -> None:
        if pol is Polarity.POS:
            self.sub(ctx, a, b)
        elif pol is Polarity.NEG:
            self.sub(ctx, b, a)
        else:
            self.sub(ctx, a, b)
            self.sub(ctx, b, a)

    def _related_sizes(self, ctx: ConstraintCtx, pol: Polarity, a: c.SizeExpr, b: c.SizeExpr) -> None:
        if pol is not Polarity.NEG:
            self.size_leq(ctx, a, b)
        if pol is not Polarity.POS:
            self.size_leq(ctx, b, a)

    def _structural(self, ctx: ConstraintCtx, s: c.CoreExpr, t: c.CoreExpr) -> None:
        match s, t:
            case c.Pi(x, d1, c1, e1), c.Pi(y, d2, c2, e2):
                if e1 != e2 and not isinstance(d1, c.SizeSort):
                    raise NotSubtype("erased and explicit binders differ")
                self.sub(ctx, d2, d1)
                z = c.fresh(y if y != "_" else "x", ctx.names() | c.free_vars(c1) | c.free_vars(c2))
                self.sub(ctx.bind(z, d2), c.subst1(c1, x, c.Var(z)), c.subst1(c2, y, c.Var(z)))
            case c.BoundedAll(x, b1, body1), c.BoundedAll(y, b2, body2):
                self.size_leq(ctx, b2, b1)
                z = self._fresh_size(ctx, y, body1, body2)
                self.sub(ctx.assume(z, b2), c.subst1(body1, x, c.Var(z)), c.subst1(body2, y, c.Var(z)))
            case c.BoundedEx(x, b1, body1), c.BoundedEx(y, b2, body2):
                self.size_leq(ctx, b1, b2)
                z = self._fresh_size(ctx, y, body1, body2)
                self.sub(ctx.assume(z, b1), c.subst1(body1, x, c.Var(z)), c.subst1(body2, y, c.Var(z)))
            case c.Prod(l1, r1), c.Prod(l2, r2):
                self.sub(ctx, l1, l2)
                self.sub(ctx, r1, r2)
            case c.App(), c.App():
                hs, args_s = c.spine(s)
                ht, args_t = c.spine(t)
                if len(args_s) != len(args_t) or not c.alpha_equal(hs, ht):
                    raise NotSubtype(f"{show(s)} and {show(t)} have different heads")
                for a, b in zip(args_s, args_t):
                    self._related(ctx, Polarity.MIXED, a, b)
            case _:
                raise NotSubtype(f"{show(s)} does not match {show(t)}")

    @staticmethod
    def _fresh_size(ctx: ConstraintCtx, base: str, *bodies: c.CoreExpr) -> str:
        avoid = ctx.names()
        for b in bodies:
            avoid |= c.free_vars(b)
        return base if base not in avoid else c.fresh(base, avoid)
