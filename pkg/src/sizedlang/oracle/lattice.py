"""Iteration schemes over finite powerset lattices, checked by brute force.

A subset of an `n`-element universe is an int bitmask; an operator is a numpy
table indexed by bitmask. Combinator trees compile to such tables, so random
operators of any shape can be generated and compared against the definitions
of least and greatest fixed points (intersection of pre-fixed points, union of
post-fixed points).
"""

from __future__ import annotations

import random
import typing
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

MAX_UNIVERSE = 16

CONVENTIONAL_MU = "conventionalMu"
CONVENTIONAL_NU = "conventionalNu"
INFLATIONARY_MU = "inflationaryMu"
DEFLATIONARY_NU = "deflationaryNu"
BAR_MU = "barMu"


@dataclass(frozen=True)
class FinUniverse:
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("universe labels must be distinct")
        if len(self.labels) > MAX_UNIVERSE:
            raise ValueError(f"universe larger than {MAX_UNIVERSE}")

    @classmethod
    def of_size(cls, n: int) -> "FinUniverse":
        return cls(tuple(f"e{k}" for k in range(n)))

    @classmethod
    def lists(cls, k: int) -> "FinUniverse":
        """List skeletons of length 0..k; element `i` is the list of length i."""
        return cls(tuple(f"len{i}" for i in range(k + 1)))

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    @property
    def count(self) -> int:
        return 1 << self.n

    def subset(self, labels: Sequence[str]) -> int:
        out = 0
        for name in labels:
            out |= 1 << self.labels.index(name)
        return out

    def members(self, s: int) -> list[str]:
        return [lab for k, lab in enumerate(self.labels) if s >> k & 1]

    def show(self, s: int) -> str:
        return "{" + ", ".join(self.members(s)) + "}"


# ------------------------------------------------------------------- operators


@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Id:
    pass


@dataclass(frozen=True)
class Union:
    left: "Op"
    right: "Op"


@dataclass(frozen=True)
class Inter:
    left: "Op"
    right: "Op"


@dataclass(frozen=True)
class Complement:
    arg: "Op"


@dataclass(frozen=True)
class Compose:
    outer: "Op"
    inner: "Op"


@dataclass(frozen=True)
class ListF:
    """X ↦ {nil} ∪ {cons a x | a ∈ head set, x ∈ X} on list skeletons.

    Elements are collapsed to one abstract value, so only emptiness of the head
    set matters. Lists longer than the universe allows are cut off.
    """

    nonempty_heads: bool = True


Op = typing.Union[Const, Id, Union, Inter, Complement, Compose, ListF]


def compile_op(op: Op, u: FinUniverse) -> np.ndarray:
    """The operator's table: entry `s` is the image of subset `s`."""
    ident = np.arange(u.count, dtype=np.int64)
    match op:
        case Const(value):
            return np.full(u.count, value & u.full, dtype=np.int64)
        case Id():
            return ident
        case Union(a, b):
            return compile_op(a, u) | compile_op(b, u)
        case Inter(a, b):
            return compile_op(a, u) & compile_op(b, u)
        case Complement(a):
            return u.full ^ compile_op(a, u)
        case Compose(outer, inner):
            return compile_op(outer, u)[compile_op(inner, u)]
        case ListF(nonempty):
            nil = np.ones(u.count, dtype=np.int64) if u.n else np.zeros(u.count, dtype=np.int64)
            return nil | ((ident << 1) & u.full) if nonempty else nil
    raise TypeError(op)


def show_op(op: Op, u: Optional[FinUniverse] = None) -> str:
    match op:
        case Const(v):
            return f"Const({u.show(v) if u else bin(v)})"
        case Id():
            return "Id"
        case Union(a, b):
            return f"({show_op(a, u)} ∪ {show_op(b, u)})"
        case Inter(a, b):
            return f"({show_op(a, u)} ∩ {show_op(b, u)})"
        case Complement(a):
            return f"¬{show_op(a, u)}"
        case Compose(a, b):
            return f"({show_op(a, u)} ∘ {show_op(b, u)})"
        case ListF(nonempty):
            return "ListF" if nonempty else "ListF(no heads)"
    raise TypeError(op)


@dataclass
class SetOperator:
    universe: FinUniverse
    table: np.ndarray
    label: str = "table"

    @classmethod
    def of(cls, op: Op, u: FinUniverse) -> "SetOperator":
        return cls(u, compile_op(op, u), show_op(op, u))

    def __call__(self, s: int) -> int:
        return int(self.table[s])

    @classmethod
    def random_table(cls, rng: random.Random, u: FinUniverse) -> "SetOperator":
        table = np.array([rng.randint(0, u.full) for _ in range(u.count)], dtype=np.int64)
        return cls(u, table, "random table")

    @cached_property
    def monotone(self) -> bool:
        return is_monotone(self)


def random_op(rng: random.Random, n: int, depth: int = 4, allow_complement: bool = True) -> Op:
    full = (1 << n) - 1
    if depth <= 0 or rng.random() < 0.25:
        return Const(rng.randint(0, full)) if rng.random() < 0.5 else Id()
    choices = ["union", "inter", "compose"] + (["complement"] if allow_complement else [])
    pick = rng.choice(choices)
    sub = lambda: random_op(rng, n, depth - 1, allow_complement)  # noqa: E731
    if pick == "union":
        return Union(sub(), sub())
    if pick == "inter":
        return Inter(sub(), sub())
    if pick == "compose":
        return Compose(sub(), sub())
    return Complement(sub())


# --------------------------------------------------------------------- chains


@dataclass
class Chain:
    scheme: str
    iterates: list[int]
    closure_index: Optional[int]

    @property
    def stationary(self) -> bool:
        return self.closure_index is not None

    @property
    def limit(self) -> int:
        if self.closure_index is None:
            raise ValueError(f"{self.scheme} chain has no fixed point")
        return self.iterates[self.closure_index]

    def at(self, a: int) -> int:
        """Iterate `a`, continuing with the stationary value past the list's end."""
        if a < len(self.iterates):
            return self.iterates[a]
        return self.limit


def _run(scheme: str, start: int, step, bound: int) -> Chain:
    xs = [start]
    for _ in range(bound + 1):
        nxt = step(xs)
        xs.append(nxt)
        if nxt == xs[-2]:
            return Chain(scheme, xs, len(xs) - 2)
    return Chain(scheme, xs, None)


def iterate_conventional(f: SetOperator, kind: str = "mu") -> Chain:
    u = f.universe
    if kind == "mu":
        return _run(CONVENTIONAL_MU, 0, lambda xs: f(xs[-1]), u.count)
    if kind == "nu":
        return _run(CONVENTIONAL_NU, u.full, lambda xs: f(xs[-1]), u.count)
    raise ValueError(kind)


def iterate_inflationary(f: SetOperator) -> Chain:
    return _run(INFLATIONARY_MU, 0, lambda xs: xs[-1] | f(xs[-1]), f.universe.count)


def iterate_deflationary(f: SetOperator) -> Chain:
    u = f.universe
    return _run(DEFLATIONARY_NU, u.full, lambda xs: xs[-1] & f(xs[-1]), u.count)


def iterate_bar_mu(f: SetOperator) -> Chain:
    def step(xs: list[int]) -> int:
        acc = 0
        for x in xs:
            acc |= x
        return f(acc)

    return _run(BAR_MU, f(0), step, f.universe.count)


# ----------------------------------------------------------------- properties


def is_monotone(f: SetOperator) -> bool:
    """S ⊆ T ⇒ F S ⊆ F T, checked on covering pairs S ⊂ S ∪ {x}."""
    t = f.table
    idx = np.arange(f.universe.count, dtype=np.int64)
    for k in range(f.universe.n):
        bit = 1 << k
        lower = idx[(idx & bit) == 0]
        if np.any(t[lower] & ~t[lower | bit]):
            return False
    return True


def is_monotone_bruteforce(f: SetOperator) -> bool:
    """The same property over every comparable pair."""
    for s in range(f.universe.count):
        t = s
        while True:  # t ranges over the supersets of s
            if f(s) & ~f(t):
                return False
            if t == f.universe.full:
                break
            t = (t + 1) | s
    return True


def least_fixed_point(f: SetOperator) -> int:
    """Intersection of all pre-fixed points F S ⊆ S."""
    t = f.table
    idx = np.arange(f.universe.count, dtype=np.int64)
    pre = idx[(t & ~idx) == 0]
    return int(np.bitwise_and.reduce(pre)) if len(pre) else f.universe.full


def greatest_fixed_point(f: SetOperator) -> int:
    """Union of all post-fixed points S ⊆ F S."""
    t = f.table
    idx = np.arange(f.universe.count, dtype=np.int64)
    post = idx[(idx & ~t) == 0]
    return int(np.bitwise_or.reduce(post)) if len(post) else 0


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class IdentityReport:
    label: str
    monotone: bool
    checks: list[Check] = field(default_factory=list)
    seed: Optional[int] = None

    @property
    def ok(self) -> bool:
        return all(ch.ok for ch in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [ch for ch in self.checks if not ch.ok]

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append(Check(name, ok, "" if ok else detail))


def _first_step(xs: list[int], related) -> Optional[int]:
    for a in range(len(xs) - 1):
        if not related(xs[a], xs[a + 1]):
            return a
    return None


def check_identities(f: SetOperator, seed: Optional[int] = None) -> IdentityReport:
    u = f.universe
    rep = IdentityReport(f.label, f.monotone, seed=seed)
    infl, defl = iterate_inflationary(f), iterate_deflationary(f)
    subset = lambda a, b: a & ~b == 0  # noqa: E731

    bad = _first_step(infl.iterates, subset)
    rep.add("inflationary ascending", bad is None and infl.stationary,
            f"{INFLATIONARY_MU} step {bad}: {u.show(infl.at(bad or 0))} ⊄ {u.show(infl.at((bad or 0) + 1))}")
    bad = _first_step(defl.iterates, lambda a, b: subset(b, a))
    rep.add("deflationary descending", bad is None and defl.stationary,
            f"{DEFLATIONARY_NU} step {bad}: {u.show(defl.at((bad or 0) + 1))} ⊄ {u.show(defl.at(bad or 0))}")
    if infl.stationary:
        lim = infl.limit
        rep.add("inflationary limit is pre-fixed", subset(f(lim), lim),
                f"{INFLATIONARY_MU} index {infl.closure_index}: F{u.show(lim)} = {u.show(f(lim))}")
    if defl.stationary:
        lim = defl.limit
        rep.add("deflationary limit is post-fixed", subset(lim, f(lim)),
                f"{DEFLATIONARY_NU} index {defl.closure_index}: F{u.show(lim)} = {u.show(f(lim))}")
    if not f.monotone:
        return rep

    mu, nu, bar = iterate_conventional(f, "mu"), iterate_conventional(f, "nu"), iterate_bar_mu(f)
    length = max(len(mu.iterates), len(infl.iterates), len(bar.iterates), len(nu.iterates), len(defl.iterates)) + 1
    rep.add("conventional chains stationary", mu.stationary and nu.stationary and bar.stationary,
            "a conventional chain of a monotone operator cycled")
    if not (mu.stationary and nu.stationary and bar.stationary):
        return rep
    diff = next((a for a in range(length) if infl.at(a) != mu.at(a)), None)
    rep.add("inflationary = conventional mu", diff is None,
            f"index {diff}: {u.show(infl.at(diff or 0))} vs {u.show(mu.at(diff or 0))}")
    diff = next((a for a in range(length) if defl.at(a) != nu.at(a)), None)
    rep.add("deflationary = conventional nu", diff is None,
            f"index {diff}: {u.show(defl.at(diff or 0))} vs {u.show(nu.at(diff or 0))}")
    diff = next((a for a in range(length) if bar.at(a) != mu.at(a + 1)), None)
    rep.add("bar mu a = mu (a+1)", diff is None,
            f"{BAR_MU} index {diff}: {u.show(bar.at(diff or 0))} vs {u.show(mu.at((diff or 0) + 1))}")
    lfp, gfp = least_fixed_point(f), greatest_fixed_point(f)
    rep.add("mu reaches least fixed point", mu.limit == lfp and f(lfp) == lfp,
            f"{CONVENTIONAL_MU} limit {u.show(mu.limit)}, least fixed point {u.show(lfp)}")
    rep.add("nu reaches greatest fixed point", nu.limit == gfp and f(gfp) == gfp,
            f"{CONVENTIONAL_NU} limit {u.show(nu.limit)}, greatest fixed point {u.show(gfp)}")
    return rep


# --------------------------------------------------------------------- drivers


def named_operators(u: FinUniverse) -> list[SetOperator]:
    half = sum(1 << k for k in range(0, u.n, 2))
    ops: list[Op] = [
        Id(),
        Const(0),
        Const(half),
        Complement(Id()),
        Union(Id(), Const(half)),
        Inter(Id(), Const(half)),
        Compose(Complement(Id()), Complement(Id())),
        ListF(),
        ListF(False),
        Compose(ListF(), ListF()),
    ]
    return [SetOperator.of(op, u) for op in ops]


@dataclass
class OracleRun:
    reports: list[IdentityReport]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.reports)

    @property
    def counterexamples(self) -> list[tuple[IdentityReport, Check]]:
        return [(r, ch) for r in self.reports for ch in r.failures]

    @property
    def monotone_count(self) -> int:
        return sum(r.monotone for r in self.reports)

    def summary(self) -> str:
        checks = sum(len(r.checks) for r in self.reports)
        lines = [
            f"operators: {len(self.reports)} ({self.monotone_count} monotone)",
            f"identity checks: {checks}",
            f"counterexamples: {len(self.counterexamples)}",
        ]
        for rep, ch in self.counterexamples[:20]:
            lines.append(f"  FAIL {ch.name} for {rep.label} (seed {rep.seed}): {ch.detail}")
        return "\n".join(lines)


def run_oracle(sizes: Sequence[int], trials: int, seed: int = 0, include_named: bool = True) -> OracleRun:
    """Check `trials` random operators per universe size.

    Trials rotate between arbitrary tables, combinator trees with complement
    and trees without it, so both monotone and non-monotone operators occur.
    """
    reports = []
    for n in sizes:
        u = FinUniverse.of_size(n)
        if include_named:
            reports.extend(check_identities(f) for f in named_operators(u))
            reports.append(check_identities(SetOperator.of(ListF(), FinUniverse.lists(max(n - 1, 0)))))
        for t in range(trials):
            op_seed = seed * 1_000_003 + n * 10_007 + t
            rng = random.Random(op_seed)
            if t % 3 == 0:
                f = SetOperator.random_table(rng, u)
            else:
                f = SetOperator.of(random_op(rng, n, allow_complement=t % 3 == 1), u)
            reports.append(check_identities(f, seed=op_seed))
    return OracleRun(reports)
