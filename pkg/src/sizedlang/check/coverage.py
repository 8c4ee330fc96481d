"""Exhaustiveness of pattern matrices by the usefulness algorithm.

A row vector of wildcards is useful for a matrix exactly when some value is
matched by no row; the search also builds such a value as a witness pattern.
Constructor sets come from the signature; pairs are a one-constructor type.
"""

from __future__ import annotations

from typing import Optional

from sizedlang import core as c
from sizedlang.check.signature import Signature

PAIR = "(,)"
WILD = c.PVar("_")


def _head(p: c.Pattern) -> Optional[str]:
    if isinstance(p, c.PCon):
        return p.name
    if isinstance(p, c.PPair):
        return PAIR
    return None


def _sub(p: c.Pattern) -> list[c.Pattern]:
    if isinstance(p, c.PCon):
        return list(p.args)
    if isinstance(p, c.PPair):
        return [p.left, p.right]
    return []


class Coverage:
    def __init__(self, sig: Signature):
        self.sig = sig

    def arity(self, head: str) -> int:
        return 2 if head == PAIR else self.sig.constructors[head].pattern_arity

    def signature_of(self, head: str) -> list[str]:
        if head == PAIR:
            return [PAIR]
        return [con.name for con in self.sig.data_of(head).constructors]

    def specialize(self, rows: list[list[c.Pattern]], head: str) -> list[list[c.Pattern]]:
        n = self.arity(head)
        out = []
        for row in rows:
            h = _head(row[0])
            if h is None:
                out.append([WILD] * n + row[1:])
            elif h == head:
                out.append(_sub(row[0]) + row[1:])
        return out

    @staticmethod
    def default(rows: list[list[c.Pattern]]) -> list[list[c.Pattern]]:
        return [row[1:] for row in rows if _head(row[0]) is None]

    def missing(self, rows: list[list[c.Pattern]], width: int) -> Optional[list[c.Pattern]]:
        """A vector of patterns matched by no row, or None if the rows are exhaustive."""
        if width == 0:
            return None if rows else []
        heads = [h for h in (_head(r[0]) for r in rows) if h is not None]
        if not heads:
            rest = self.missing(self.default(rows), width - 1)
            return None if rest is None else [WILD] + rest
        full = self.signature_of(heads[0])
        present = set(heads)
        if all(h in present for h in full):
            for h in full:
                n = self.arity(h)
                rest = self.missing(self.specialize(rows, h), n + width - 1)
                if rest is not None:
                    return [self._build(h, rest[:n])] + rest[n:]
            return None
        rest = self.missing(self.default(rows), width - 1)
        if rest is None:
            return None
        absent = next(h for h in full if h not in present)
        return [self._build(absent, [WILD] * self.arity(absent))] + rest

    @staticmethod
    def _build(head: str, args: list[c.Pattern]) -> c.Pattern:
        if head == PAIR:
            return c.PPair(args[0], args[1])
        return c.PCon(head, tuple(args))


def show_patterns(ps: list[c.Pattern]) -> str:
    from sizedlang.scope import unscope_pattern
    from sizedlang.syntax.printer import print_pattern

    return " ".join(print_pattern(unscope_pattern(p), atomic=True) for p in ps)
