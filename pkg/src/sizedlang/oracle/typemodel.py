"""A finite step-indexed model of type formers, for checking variances.

An element of the model is a word of at most `depth` atoms drawn from a
universe `U`; it records the atoms a consumer sees along one interaction, one
letter per forcing or function application. A type denotes a set of words:

* a parameter `A ⊆ U` holds of the empty word and of words starting in `A`,
* products intersect, sums unite,
* `[j < i] -> F j` delays: it holds of the empty word, and of `a w` when `w`
  lies in every `F j` with `j < i`,
* `A -> F` holds of words outside `A` and of the delayed codomain,
* `[j < i] & F j` is the union of the `F j`,
* a sized data type is the union over constructors and indices below it of
  the intersection of the fields.

Sizes range over `0..top` and `#` denotes `top`. Keep `top` below `depth`:
an inductive chain that runs longer than the words are deep accepts every
word, which would hide the variance of the indices that depend on it.
Variance of a parameter is found by comparing denotations over all
assignments of the other parameters.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from sizedlang import core as c
from sizedlang.check.signature import Signature, complete_data
from sizedlang.core import Polarity

SET = "set"
SIZE = "size"


class Unsupported(Exception):
    """The type uses a construct the finite model does not interpret."""


@dataclass
class TypeModel:
    sig: Signature
    universe_size: int = 2
    depth: int = 4
    top: int = 2
    _memo: dict = field(default_factory=dict, repr=False)
    _at_memo: dict = field(default_factory=dict, repr=False)

    # ------------------------------------------------------------------ words

    @cached_property
    def words(self) -> list[tuple[int, ...]]:
        out: list[tuple[int, ...]] = []
        for n in range(self.depth + 1):
            out.extend(itertools.product(range(self.universe_size), repeat=n))
        return out

    @cached_property
    def _index(self) -> dict[tuple[int, ...], int]:
        return {w: k for k, w in enumerate(self.words)}

    @cached_property
    def _tail(self) -> np.ndarray:
        return np.array([self._index[w[1:]] if w else 0 for w in self.words], dtype=np.int64)

    @cached_property
    def _empty_word(self) -> np.ndarray:
        return np.array([len(w) == 0 for w in self.words])

    @cached_property
    def full(self) -> np.ndarray:
        return np.ones(len(self.words), dtype=bool)

    @cached_property
    def empty(self) -> np.ndarray:
        return np.zeros(len(self.words), dtype=bool)

    @cached_property
    def _atom_sets(self) -> list[np.ndarray]:
        first = np.array([w[0] if w else -1 for w in self.words])
        out = []
        for subset in range(1 << self.universe_size):
            members = [u for u in range(self.universe_size) if subset >> u & 1]
            out.append(self._empty_word | np.isin(first, members))
        return out

    def atoms(self, subset: int) -> np.ndarray:
        """The parameter meaning of a subset of `U` given as a bitmask."""
        return self._atom_sets[subset]

    def later(self, x: np.ndarray) -> np.ndarray:
        """Words that are empty or whose tail lies in `x`."""
        return self._empty_word | x[self._tail]

    # ------------------------------------------------------------- parameters

    def param_sorts(self, name: str) -> list[str]:
        return [SIZE if p.is_size else SET for p in self.sig.param_info(name)]

    def param_names(self, name: str) -> list[str]:
        d = self.sig.decls[name]
        if d.kind == "data":
            names = [p.name for p in d.params]
            return names + (["(index)"] if d.sized else [])
        return [b.name for b in c.telescope(d.type)[0]]

    def domain(self, sort: str) -> range:
        return range(1 << self.universe_size) if sort == SET else range(self.top + 1)

    def denote_at(self, name: str, assignment: tuple[int, ...]) -> np.ndarray:
        """Denotation with set parameters given as bitmasks over `U`."""
        key = (name, assignment)
        if key not in self._at_memo:
            sorts = self.param_sorts(name)
            args = tuple(self.atoms(a) if s == SET else a for s, a in zip(sorts, assignment))
            self._at_memo[key] = self.denote(name, args)
        return self._at_memo[key]

    # ---------------------------------------------------------------- meaning

    def denote(self, name: str, args: tuple) -> np.ndarray:
        key = (name, tuple(a.tobytes() if isinstance(a, np.ndarray) else a for a in args))
        if key not in self._memo:
            self._memo[key] = self._denote(name, args)
        return self._memo[key]

    def _denote(self, name: str, args: tuple) -> np.ndarray:
        d = self.sig.decls[name]
        if d.kind == "data":
            env = {p.name: a for p, a in zip(d.params, args)}
            out = self.empty
            for con in d.constructors:
                if d.sized:
                    for m in range(args[-1]):
                        out = out | self._fields(con, {**env, con.size_var: m})
                else:
                    out = out | self._fields(con, env)
            return out
        if not self.sig.is_type_former(name) or not d.clauses:
            raise Unsupported(f"{name} is not a type former with clauses")
        clause = d.clauses[0]
        if not all(isinstance(p, c.PVar) for p in clause.patterns):
            raise Unsupported(f"{name} matches on its parameters")
        env = {p.name: a for p, a in zip(clause.patterns, args)}
        return self.type(clause.body, env)

    def _fields(self, con: c.Constructor, env: dict) -> np.ndarray:
        out = self.full
        for fname, ftype in con.fields:
            out = out & self.type(ftype, env)
            env = {**env, fname: None}  # dependent fields are not interpreted
        return out

    def size(self, s: c.SizeExpr, env: dict) -> int:
        base, off = c.normalize_size(s)
        if base is None:
            return self.top
        return min(env[base] + off, self.top)

    def type(self, e: c.CoreExpr, env: dict) -> np.ndarray:
        e = complete_data(self.sig, e)
        match e:
            case c.Var(name):
                v = env.get(name)
                if not isinstance(v, np.ndarray):
                    raise Unsupported(f"{name} has no set meaning")
                return v
            case c.Prod(left, right):
                return self.type(left, env) & self.type(right, env)
            case c.Pi(x, dom, cod):
                if isinstance(dom, c.SizeSort):
                    out = self.full
                    for m in range(self.top + 1):
                        out = out & self.type(cod, {**env, x: m})
                    return out
                if isinstance(dom, c.SetSort):
                    raise Unsupported("quantification over types")
                return ~self.type(dom, env) | self.later(self.type(cod, {**env, x: None}))
            case c.BoundedAll(x, bound, body):
                out = self.full
                for m in range(self.size(bound, env)):
                    out = out & self.type(body, {**env, x: m})
                return self.later(out)
            case c.BoundedEx(x, bound, body):
                out = self.empty
                for m in range(self.size(bound, env)):
                    out = out | self.type(body, {**env, x: m})
                return out
        head, args = c.spine(e)
        if isinstance(head, c.Def) and head.name in self.sig.decls:
            sorts = self.param_sorts(head.name)
            if len(args) != len(sorts):
                raise Unsupported(f"{head.name} is not fully applied")
            vals = []
            for sort, a in zip(sorts, args):
                if sort == SIZE:
                    s = c.to_size(a)
                    if s is None:
                        raise Unsupported(f"size argument {a!r}")
                    vals.append(self.size(s, env))
                else:
                    vals.append(self.type(a, env))
            return self.denote(head.name, tuple(vals))
        raise Unsupported(f"no set meaning for {type(e).__name__}")


# -------------------------------------------------------------------- variance


def _covering_pairs(model: TypeModel, sort: str) -> list[tuple[int, int]]:
    if sort == SIZE:
        return [(m, m + 1) for m in range(model.top)]
    n = model.universe_size
    return [(s, s | 1 << k) for s in range(1 << n) for k in range(n) if not s >> k & 1]


def observed_polarity(model: TypeModel, name: str, position: int) -> Optional[Polarity]:
    """Variance of one parameter over every assignment; None if it never matters."""
    sorts = model.param_sorts(name)
    monotone = antitone = True
    others = [model.domain(s) if k != position else [0] for k, s in enumerate(sorts)]
    pairs = _covering_pairs(model, sorts[position])
    for combo in itertools.product(*others):
        for lo, hi in pairs:
            a, b = list(combo), list(combo)
            a[position], b[position] = lo, hi
            x, y = model.denote_at(name, tuple(a)), model.denote_at(name, tuple(b))
            monotone = monotone and not np.any(x & ~y)
            antitone = antitone and not np.any(y & ~x)
            if not (monotone or antitone):
                return Polarity.MIXED
    if monotone and antitone:
        return None
    return Polarity.POS if monotone else Polarity.NEG


@dataclass
class VarianceRow:
    param: str
    declared: Polarity
    observed: Optional[Polarity]

    @property
    def sound(self) -> bool:
        """The declaration promises no more than the model delivers."""
        if self.observed is None or self.declared is Polarity.MIXED:
            return True
        return self.declared is self.observed

    @property
    def exact(self) -> bool:
        return self.declared is self.observed


def variance_table(model: TypeModel, name: str) -> list[VarianceRow]:
    info = model.sig.param_info(name)
    names = model.param_names(name)
    return [VarianceRow(n, p.polarity, observed_polarity(model, name, k)) for k, (n, p) in enumerate(zip(names, info))]
