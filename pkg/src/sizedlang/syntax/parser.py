"""Recursive-descent parser producing the surface AST.

Grammar (EBNF)::

    program  ::= decl*
    decl     ::= dataDecl | funDecl | letDecl | patDecl
    dataDecl ::= "data" ID params ":" expr "{" [ctor (";" ctor)*] "}"
    ctor     ::= ID ":" expr
    funDecl  ::= ("fun"|"cofun") ID ":" expr "{" clause (";" clause)* "}"
    letDecl  ::= "let" ID params [":" expr] "=" expr
    patDecl  ::= "pattern" ID ID* "=" pattern
    params   ::= ( ["+"|"-"] "(" ["+"|"-"] ids ":" expr ")" | "[" ids ":" expr "]" )*
    clause   ::= ID apat* "=" expr
    pattern  ::= ID apat* | apat
    apat     ::= ID | "(" pattern "," pattern ")" | "(" pattern ")"

    expr     ::= "\" ID+ "->" expr
               | "case" app [":" expr] "{" pattern "->" expr (";" pattern "->" expr)* "}"
               | "|" app ("," app)* "|" "->" expr
               | binder+ "->" expr
               | prod ["->" expr]
    binder   ::= ["+"|"-"] "(" ["+"|"-"] ids ":" expr ")" | "[" ids ":" expr "]" | "[" ID "<" app "]"
    prod     ::= "[" ID "<" app "]" "&" prod | app ["&" prod]
    app      ::= atom+ ["\" ... | "case" ...]
    atom     ::= ID | "Set" | "Size" | "#" | "$" atom | "(" expr ("," expr)* ")"
"""

from __future__ import annotations

from typing import Optional

from sizedlang.errors import ParseError
from sizedlang.syntax.ast import (
    Binder,
    PCon,
    PPair,
    PVar,
    SApp,
    SBoundedAll,
    SBoundedEx,
    SCase,
    SClause,
    SConstructor,
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
from sizedlang.syntax.lexer import Token, tokenize

DECL_KEYWORDS = ("data", "fun", "cofun", "let", "pattern")


class Parser:
    def __init__(self, tokens: list[Token], source_length: Optional[int] = None):
        self.tokens = tokens
        self.pos = 0
        if source_length is None:
            source_length = tokens[-1].end if tokens else 0
        self.eof = source_length

    # ------------------------------------------------------------ utilities

    def peek(self, offset: int = 0) -> Optional[Token]:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def at(self, text: str, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok is not None and tok.text == text and tok.kind in ("symbol", "keyword")

    def at_ident(self, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok is not None and tok.kind == "identifier"

    def _found(self) -> tuple[str, tuple[int, int]]:
        tok = self.peek()
        if tok is None:
            return "end of input", (self.eof, self.eof)
        return f"{tok.kind} {tok.text!r}", tok.span

    def error(self, expected: str) -> ParseError:
        found, span = self._found()
        return ParseError(f"expected {expected}, found {found}", span)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"symbol {text!r}" if not text.isalpha() else f"keyword {text!r}")
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def ident(self) -> Token:
        if not self.at_ident():
            raise self.error("identifier")
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def last_end(self) -> int:
        return self.tokens[self.pos - 1].end if self.pos else 0

    def start(self) -> int:
        tok = self.peek()
        return tok.start if tok else self.eof

    # --------------------------------------------------------- declarations

    def program(self) -> list[SDecl]:
        decls = []
        while self.peek() is not None:
            decls.append(self.decl())
        return decls

    def decl(self) -> SDecl:
        tok = self.peek()
        if self.at("data"):
            return self.data_decl()
        if self.at("fun") or self.at("cofun"):
            return self.fun_decl()
        if self.at("let"):
            return self.let_decl()
        if self.at("pattern"):
            return self.pattern_decl()
        raise self.error("declaration keyword (data, fun, cofun, let, pattern)")

    def data_decl(self) -> SData:
        s = self.start()
        self.expect("data")
        name = self.ident().text
        params = self.params()
        self.expect(":")
        typ = self.expr()
        self.expect("{")
        ctors = []
        if not self.at("}"):
            ctors.append(self.constructor())
            while self.at(";"):
                self.pos += 1
                ctors.append(self.constructor())
        self.expect("}")
        return SData(name, params, typ, tuple(ctors), span=(s, self.last_end()))

    def constructor(self) -> SConstructor:
        s = self.start()
        name = self.ident().text
        self.expect(":")
        typ = self.expr()
        return SConstructor(name, typ, span=(s, self.last_end()))

    def fun_decl(self) -> SFun:
        s = self.start()
        keyword = self.tokens[self.pos].text
        self.pos += 1
        name = self.ident().text
        self.expect(":")
        typ = self.expr()
        self.expect("{")
        clauses = [self.clause()]
        while self.at(";"):
            self.pos += 1
            clauses.append(self.clause())
        self.expect("}")
        for cl in clauses:
            if cl.name != name:
                raise ParseError(f"clause head {cl.name!r} does not match declaration {name!r}", cl.span)
        return SFun(keyword, name, typ, tuple(clauses), span=(s, self.last_end()))

    def clause(self) -> SClause:
        s = self.start()
        name = self.ident().text
        pats = []
        while not self.at("="):
            if self.peek() is None:
                raise self.error("symbol '='")
            pats.append(self.atomic_pattern())
        self.expect("=")
        body = self.expr()
        return SClause(name, tuple(pats), body, span=(s, self.last_end()))

    def let_decl(self) -> SLet:
        s = self.start()
        self.expect("let")
        name = self.ident().text
        params = self.params()
        typ = None
        if self.at(":"):
            self.pos += 1
            typ = self.expr()
        self.expect("=")
        body = self.expr()
        return SLet(name, params, typ, body, span=(s, self.last_end()))

    def pattern_decl(self) -> SPatternSyn:
        s = self.start()
        self.expect("pattern")
        name = self.ident().text
        params = []
        while self.at_ident():
            params.append(self.ident().text)
        self.expect("=")
        pat = self.pattern()
        return SPatternSyn(name, tuple(params), pat, span=(s, self.last_end()))

    def params(self) -> tuple[Binder, ...]:
        out = []
        while self.binder_kind() in ("explicit", "erased"):
            out.append(self.binder())
        return tuple(out)

    # ------------------------------------------------------------- binders

    def _ids_then_colon(self, offset: int) -> bool:
        """Tokens from `offset` look like `x, y, z :`."""
        if not self.at_ident(offset):
            return False
        offset += 1
        while self.at(",", offset):
            if not self.at_ident(offset + 1):
                return False
            offset += 2
        return self.at(":", offset)

    def binder_kind(self) -> Optional[str]:
        """Classify the binder group at the cursor, if any."""
        if (self.at("+") or self.at("-")) and self.at("(", 1):
            return "explicit" if self._ids_then_colon(2) else None
        if self.at("(") and (self._ids_then_colon(1) or ((self.at("+", 1) or self.at("-", 1)) and self._ids_then_colon(2))):
            return "explicit"
        if self.at("["):
            if self._ids_then_colon(1):
                return "erased"
            if self.at_ident(1) and self.at("<", 2):
                return "bounded"
        return None

    def _bounded_followed_by_amp(self) -> bool:
        depth = 0
        i = self.pos
        while i < len(self.tokens):
            t = self.tokens[i]
            if t.text == "[" and t.kind == "symbol":
                depth += 1
            elif t.text == "]" and t.kind == "symbol":
                depth -= 1
                if depth == 0:
                    nxt = self.tokens[i + 1] if i + 1 < len(self.tokens) else None
                    return nxt is not None and nxt.text == "&"
            i += 1
        return False

    def binder(self) -> Binder:
        s = self.start()
        polarity = None
        if self.at("+") or self.at("-"):
            polarity = self.tokens[self.pos].text
            self.pos += 1
        erased = self.at("[")
        self.expect("[" if erased else "(")
        if polarity is None and not erased and (self.at("+") or self.at("-")):
            polarity = self.tokens[self.pos].text
            self.pos += 1
        names = [self.ident().text]
        while self.at(","):
            self.pos += 1
            names.append(self.ident().text)
        self.expect(":")
        typ = self.expr()
        self.expect("]" if erased else ")")
        return Binder(erased, tuple(names), typ, polarity, span=(s, self.last_end()))

    def bounded_head(self) -> tuple[str, SExpr]:
        self.expect("[")
        var = self.ident().text
        self.expect("<")
        bound = self.app()
        self.expect("]")
        return var, bound

    # ---------------------------------------------------------- expressions

    def expr(self) -> SExpr:
        s = self.start()
        if self.at("\\"):
            self.pos += 1
            names = [self.ident().text]
            while self.at_ident():
                names.append(self.ident().text)
            self.expect("->")
            body = self.expr()
            return SLam(tuple(names), body, span=(s, self.last_end()))
        if self.at("case"):
            return self.case_expr()
        if self.at("|"):
            self.pos += 1
            measures = [self.app()]
            while self.at(","):
                self.pos += 1
                measures.append(self.app())
            self.expect("|")
            self.expect("->")
            body = self.expr()
            return SMeasure(tuple(measures), body, span=(s, self.last_end()))
        kind = self.binder_kind()
        if kind is not None and not (kind == "bounded" and self._bounded_followed_by_amp()):
            groups = []
            while True:
                kind = self.binder_kind()
                if kind == "bounded" and not self._bounded_followed_by_amp():
                    gs = self.start()
                    var, bound = self.bounded_head()
                    groups.append(("bounded", var, bound, gs))
                elif kind in ("explicit", "erased"):
                    gs = self.start()
                    groups.append(("binder", self.binder(), None, gs))
                else:
                    break
            self.expect("->")
            body = self.expr()
            end = self.last_end()
            for tag, a, b, gs in reversed(groups):
                if tag == "bounded":
                    body = SBoundedAll(a, b, body, span=(gs, end))
                else:
                    body = SPi(a, body, span=(gs, end))
            return body
        left = self.prod()
        if self.at("->"):
            self.pos += 1
            body = self.expr()
            dom = Binder(False, (), left, None, span=left.span)
            return SPi(dom, body, span=(s, self.last_end()))
        return left

    def case_expr(self) -> SCase:
        s = self.start()
        self.expect("case")
        scrut = self.app()
        asc = None
        if self.at(":"):
            self.pos += 1
            asc = self.expr()
        self.expect("{")
        branches = [self.branch()]
        while self.at(";"):
            self.pos += 1
            branches.append(self.branch())
        self.expect("}")
        return SCase(scrut, asc, tuple(branches), span=(s, self.last_end()))

    def branch(self) -> tuple[SPattern, SExpr]:
        pat = self.pattern()
        self.expect("->")
        return pat, self.expr()

    def prod(self) -> SExpr:
        s = self.start()
        if self.binder_kind() == "bounded":
            var, bound = self.bounded_head()
            self.expect("&")
            body = self.prod()
            return SBoundedEx(var, bound, body, span=(s, self.last_end()))
        left = self.app()
        if self.at("&"):
            self.pos += 1
            right = self.prod()
            return SProd(left, right, span=(s, self.last_end()))
        return left

    def starts_atom(self) -> bool:
        tok = self.peek()
        if tok is None:
            return False
        if tok.kind == "identifier":
            return True
        return tok.text in ("Set", "Size", "#", "$", "(")

    def app(self) -> SExpr:
        s = self.start()
        head = self.atom()
        while True:
            if self.starts_atom():
                arg = self.atom()
            elif self.at("\\") or self.at("case"):
                arg = self.expr()
            else:
                break
            head = SApp(head, arg, span=(s, self.last_end()))
        return head

    def atom(self) -> SExpr:
        s = self.start()
        tok = self.peek()
        if tok is None:
            raise self.error("expression")
        if tok.kind == "identifier":
            self.pos += 1
            return SVar(tok.text, span=tok.span)
        if self.at("Set"):
            self.pos += 1
            return SSet(span=tok.span)
        if self.at("Size"):
            self.pos += 1
            return SSize(span=tok.span)
        if self.at("#"):
            self.pos += 1
            return SInfty(span=tok.span)
        if self.at("$"):
            self.pos += 1
            arg = self.atom()
            return SSucc(arg, span=(s, self.last_end()))
        if self.at("("):
            self.pos += 1
            items = [self.expr()]
            while self.at(","):
                self.pos += 1
                items.append(self.expr())
            self.expect(")")
            span = (s, self.last_end())
            if len(items) == 1:
                return items[0]
            out = items[-1]
            for item in reversed(items[:-1]):
                out = SPair(item, out, span=span)
            return out
        raise self.error("expression")

    # ------------------------------------------------------------- patterns

    def pattern(self) -> SPattern:
        s = self.start()
        if self.at_ident():
            name = self.ident().text
            args = []
            while self.at_ident() or self.at("("):
                args.append(self.atomic_pattern())
            if args:
                return PCon(name, tuple(args), span=(s, self.last_end()))
            return PVar(name, span=(s, self.last_end()))
        return self.atomic_pattern()

    def atomic_pattern(self) -> SPattern:
        s = self.start()
        if self.at_ident():
            tok = self.ident()
            return PVar(tok.text, span=tok.span)
        if self.at("("):
            self.pos += 1
            first = self.pattern()
            if self.at(","):
                self.pos += 1
                second = self.pattern()
                self.expect(")")
                return PPair(first, second, span=(s, self.last_end()))
            self.expect(")")
            if isinstance(first, PVar):
                return PCon(first.name, (), span=(s, self.last_end()))
            return first
        raise self.error("pattern")


def parse(tokens: list[Token], source_length: Optional[int] = None) -> list[SDecl]:
    """Parse a token list into surface declarations."""
    return Parser(tokens, source_length).program()


def parse_source(source: str) -> list[SDecl]:
    return parse(tokenize(source), len(source))


def parse_expr(source: str) -> SExpr:
    p = Parser(tokenize(source), len(source))
    e = p.expr()
    if p.peek() is not None:
        raise p.error("end of input")
    return e
