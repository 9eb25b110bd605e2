"""Preprocessing, lexing, parsing and canonical printing of Cg source."""
from .lexer import Token, tokenize
from .parser import parse, parse_expression
from .preprocess import SourceUnit, preprocess
from .pretty import pretty
from . import ast


def parse_source(text: str, name: str = "<input>", includes=None, predefines=None):
    """Preprocess, tokenize and parse in one step. Returns (SourceUnit, SyntaxTree)."""
    unit = preprocess(SourceUnit(text, name), includes, predefines)
    return unit, parse(tokenize(unit))


__all__ = ["SourceUnit", "Token", "ast", "parse", "parse_expression", "parse_source",
           "preprocess", "pretty", "tokenize"]
