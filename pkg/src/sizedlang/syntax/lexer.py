"""Tokenizer for `.ma` source files."""

from __future__ import annotations

import re
from dataclasses import dataclass

from sizedlang.errors import LexError

KEYWORDS = frozenset({"data", "fun", "cofun", "let", "pattern", "case", "Set", "Size", "in"})

# Longest symbols first so "->" wins over "-".
SYMBOLS = ("->", "=", ":", ";", ",", "{", "}", "(", ")", "[", "]", "<", "&", "$", "#", "|", "+", "-", "\\", ".")

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_NATURAL = re.compile(r"[0-9]+")


@dataclass(frozen=True)
class Token:
    kind: str  # "identifier" | "keyword" | "symbol" | "natural"
    text: str
    span: tuple[int, int]

    @property
    def start(self) -> int:
        return self.span[0]

    @property
    def end(self) -> int:
        return self.span[1]

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.text!r}, {self.span})"


def tokenize(source: str) -> list[Token]:
    """Split `source` into tokens, dropping whitespace and `--` line comments.

    Spans are offsets into `source`; the gaps between consecutive tokens hold
    only whitespace and comments, so the file can be rebuilt from the spans.
    """
    tokens: list[Token] = []
    pos = 0
    n = len(source)
    while pos < n:
        ch = source[pos]
        if ch in " \t\r\n\f":
            pos += 1
            continue
        if source.startswith("--", pos):
            nl = source.find("\n", pos)
            pos = n if nl < 0 else nl + 1
            continue
        m = _IDENT.match(source, pos)
        if m:
            text = m.group()
            kind = "keyword" if text in KEYWORDS else "identifier"
            tokens.append(Token(kind, text, (pos, m.end())))
            pos = m.end()
            continue
        m = _NATURAL.match(source, pos)
        if m:
            tokens.append(Token("natural", m.group(), (pos, m.end())))
            pos = m.end()
            continue
        for sym in SYMBOLS:
            if source.startswith(sym, pos):
                tokens.append(Token("symbol", sym, (pos, pos + len(sym))))
                pos += len(sym)
                break
        else:
            raise LexError(f"unexpected character {ch!r}", (pos, pos + 1))
    return tokens


def untokenize(source: str, tokens: list[Token]) -> str:
    """Rebuild the source from token texts plus the original inter-token gaps."""
    out = []
    prev = 0
    for tok in tokens:
        out.append(source[prev : tok.start])
        out.append(tok.text)
        prev = tok.end
    out.append(source[prev:])
    return "".join(out)
