from sizedlang.syntax.lexer import Token, tokenize, untokenize
from sizedlang.syntax.parser import parse, parse_expr, parse_source
from sizedlang.syntax.printer import print_decl, print_expr, print_program

__all__ = [
    "Token",
    "tokenize",
    "untokenize",
    "parse",
    "parse_expr",
    "parse_source",
    "print_decl",
    "print_expr",
    "print_program",
]
