"""Brute-force ordinal valuations for checking size entailments.

Ordinals below omega*2 are encoded as integers: n stands for n and BIG+n for
omega+n. The closure ordinal is INF, which absorbs successor. A valuation is
consistent with a context when every hypothesis `j < u` holds under it; a
judgment is valid when it holds in every consistent valuation.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

import numpy as np

from sizedlang.core import INFTY, ConstraintCtx, SizeExpr, SizeSort, make_size, normalize_size

BIG = 1_000
INF = 1_000_000


def ordinal_values(limit: int) -> np.ndarray:
    """The finite ordinals 0..limit and omega..omega+limit."""
    return np.array(list(range(limit + 1)) + [BIG + n for n in range(limit + 1)], dtype=np.int64)


class ValuationGrid:
    """All consistent valuations of a context's variables, as columns of an array."""

    def __init__(self, ctx: ConstraintCtx, limit: int = 3):
        names = sorted({v for v, _ in ctx.hypotheses} | {n for n in ctx.size_variables()} | _bound_vars(ctx))
        self.names = names
        self.index = {n: k for k, n in enumerate(names)}
        values = ordinal_values(limit)
        if names:
            grid = np.array(list(itertools.product(values, repeat=len(names))), dtype=np.int64)
        else:
            grid = np.zeros((1, 0), dtype=np.int64)
        keep = np.ones(len(grid), dtype=bool)
        for var, bound in ctx.hypotheses:
            keep &= grid[:, self.index[var]] < self._eval(grid, bound)
        self.rows = grid[keep]

    def _eval(self, grid: np.ndarray, s: SizeExpr) -> np.ndarray:
        base, off = normalize_size(s)
        if base is None:
            return np.full(len(grid), INF, dtype=np.int64)
        return grid[:, self.index[base]] + off

    def value(self, s: SizeExpr) -> np.ndarray:
        return self._eval(self.rows, s)

    def valid_leq(self, s: SizeExpr, t: SizeExpr) -> bool:
        return bool(np.all(self.value(s) <= self.value(t)))

    def valid_lt(self, s: SizeExpr, t: SizeExpr) -> bool:
        return bool(np.all(self.value(s) < self.value(t)))


def _bound_vars(ctx: ConstraintCtx) -> set[str]:
    out = set()
    for _, bound in ctx.hypotheses:
        base, _ = normalize_size(bound)
        if base is not None:
            out.add(base)
    return out


@dataclass
class Judgment:
    ctx: ConstraintCtx
    left: SizeExpr
    right: SizeExpr
    relation: str  # "leq" | "ltMeasure" | "ltInst"


def random_context(rng: random.Random, max_vars: int = 5, max_offset: int = 2) -> ConstraintCtx:
    """A hypothesis DAG: variable k may only be bounded by later variables or `#`."""
    n = rng.randint(1, max_vars)
    names = [f"v{k}" for k in range(n)]
    ctx = ConstraintCtx()
    for k in reversed(range(n)):
        ctx = ctx.bind(names[k], SizeSort())
    for k in range(n):
        for _ in range(rng.choice([0, 1, 1, 2])):
            later = names[k + 1 :]
            if later and rng.random() < 0.85:
                bound = make_size(rng.choice(later), rng.randint(0, max_offset))
            else:
                bound = INFTY
            ctx = ConstraintCtx(ctx.bindings, ctx.hypotheses + ((names[k], bound),))
    return ctx


def random_size(rng: random.Random, ctx: ConstraintCtx, max_offset: int = 4) -> SizeExpr:
    names = ctx.size_variables()
    if rng.random() < 0.12 or not names:
        return INFTY
    return make_size(rng.choice(names), rng.randint(0, max_offset))


def random_judgments(
    count: int, seed: int = 0, per_context: int = 50, relations: tuple[str, ...] = ("leq", "ltMeasure")
) -> list[Judgment]:
    rng = random.Random(seed)
    out: list[Judgment] = []
    while len(out) < count:
        ctx = random_context(rng)
        for _ in range(min(per_context, count - len(out))):
            out.append(Judgment(ctx, random_size(rng, ctx), random_size(rng, ctx), rng.choice(relations)))
    return out


@dataclass
class AuditResult:
    total: int = 0
    derivable: int = 0
    unsound: int = 0  # decided true, but some consistent valuation refutes it
    incomplete: int = 0  # valid in every valuation, yet not decided true


def audit_judgments(judgments: list[Judgment], limit: int = 3) -> AuditResult:
    """Compare the decision procedure with brute-force valuations."""
    from sizedlang.sizes import leq, lt_inst, lt_measure

    grids: dict[int, ValuationGrid] = {}
    out = AuditResult()
    for j in judgments:
        grid = grids.get(id(j.ctx))
        if grid is None:
            grid = grids[id(j.ctx)] = ValuationGrid(j.ctx, limit)
        right_inf = normalize_size(j.right)[0] is None
        left_inf = normalize_size(j.left)[0] is None
        if j.relation == "leq":
            got, valid = leq(j.ctx, j.left, j.right), grid.valid_leq(j.left, j.right)
        elif j.relation == "ltMeasure":
            got = lt_measure(j.ctx, j.left, j.right)
            valid = not right_inf and grid.valid_lt(j.left, j.right)
        else:
            got = lt_inst(j.ctx, j.left, j.right)
            valid = (left_inf and right_inf) or (not right_inf and grid.valid_lt(j.left, j.right))
        out.total += 1
        out.derivable += got
        out.unsound += got and not valid
        out.incomplete += valid and not got
    return out
