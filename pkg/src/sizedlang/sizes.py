"""Entailment of size inequalities under hypotheses `j < u`.

Sizes are normalized to (base, offset) pairs. A hypothesis `j < u+k` (u a
variable) is an edge j -> u of weight k-1, read as `j <= u + (k-1)`. Then
`leq(a+m, b+n)` holds when some path a ->* b has total weight w with
`m + w <= n`, i.e. when the minimum path weight is small enough. Successor is
injective and monotone on ordinals, so offsets cancel like integers.

The closure ordinal `#` sits above everything: `leq(s, #)` always holds and
`#` is never below a variable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from sizedlang.core import INFTY, ConstraintCtx, SizeExpr, SizeSucc, normalize_size, show_size


@dataclass
class Audit:
    """Counters used by tests to observe how the `# < #` admission is used."""

    in_measure: bool = False
    infty_admissions: int = 0
    measure_infty_admissions: int = 0

    def reset(self) -> None:
        self.in_measure = False
        self.infty_admissions = 0
        self.measure_infty_admissions = 0


AUDIT = Audit()


@dataclass
class Derivation:
    """A chain of hypotheses justifying `left <= right`."""

    left: SizeExpr
    right: SizeExpr
    steps: list[str] = field(default_factory=list)

    def render(self) -> str:
        head = f"{show_size(self.left)} <= {show_size(self.right)}"
        if not self.steps:
            return head
        return head + "\n" + "\n".join(f"  by {s}" for s in self.steps)


def _edges(ctx: ConstraintCtx) -> dict[str, list[tuple[str, int, str]]]:
    out: dict[str, list[tuple[str, int, str]]] = {}
    for var, bound in ctx.hypotheses:
        base, off = normalize_size(bound)
        if base is None:
            continue  # j < # carries no information beyond leq(_, #)
        out.setdefault(var, []).append((base, off - 1, f"{var} < {show_size(bound)}"))
    return out


def _shortest(ctx: ConstraintCtx, source: str) -> tuple[dict[str, int], dict[str, tuple[str, str]]]:
    """Minimum path weights from `source` (Bellman-Ford, |V| rounds at most)."""
    edges = _edges(ctx)
    nodes = {source} | set(edges) | {b for es in edges.values() for b, _, _ in es}
    dist = {source: 0}
    pred: dict[str, tuple[str, str]] = {}
    for _ in range(len(nodes)):
        changed = False
        for u, d in list(dist.items()):
            for v, w, why in edges.get(u, ()):
                if v not in dist or d + w < dist[v]:
                    dist[v] = d + w
                    pred[v] = (u, why)
                    changed = True
        if not changed:
            break
    return dist, pred


def explain_leq(ctx: ConstraintCtx, s: SizeExpr, t: SizeExpr) -> Optional[Derivation]:
    """A derivation of `s <= t` from the hypotheses, or None if not derivable."""
    sb, so = normalize_size(s)
    tb, to = normalize_size(t)
    if tb is None:
        return Derivation(s, t, ["everything is below #"] if sb is not None else [])
    if sb is None:
        return None
    dist, pred = _shortest(ctx, sb)
    if tb not in dist or so + dist[tb] > to:
        return None
    steps = []
    node = tb
    while node != sb and len(steps) <= len(pred):
        node, why = pred[node][0], pred[node][1]
        steps.append(why)
    steps.reverse()
    return Derivation(s, t, steps)


def leq(ctx: ConstraintCtx, s: SizeExpr, t: SizeExpr) -> bool:
    return explain_leq(ctx, s, t) is not None


def lt_inst(ctx: ConstraintCtx, s: SizeExpr, t: SizeExpr) -> bool:
    """Strict order for instantiating bounded quantifiers; admits `# < #`."""
    sb, _ = normalize_size(s)
    tb, _ = normalize_size(t)
    if tb is None:
        if sb is None:
            AUDIT.infty_admissions += 1
            if AUDIT.in_measure:
                AUDIT.measure_infty_admissions += 1
            return True
        return False
    return leq(ctx, SizeSucc(s), t)


def lt_measure(ctx: ConstraintCtx, s: SizeExpr, t: SizeExpr) -> bool:
    """Well-founded strict order for termination measures; never true against `#`."""
    tb, _ = normalize_size(t)
    if tb is None:
        return False
    return leq(ctx, SizeSucc(s), t)


def succ_of(s: SizeExpr) -> SizeExpr:
    return INFTY if normalize_size(s)[0] is None else SizeSucc(s)
