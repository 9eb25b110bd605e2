"""Maximal-munch tokenizer for preprocessed Cg source."""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..diagnostics import CompileError, Location, error
from .preprocess import SourceUnit

IDENTIFIER = "identifier"
KEYWORD = "keyword"
RESERVED = "reserved-keyword"
INT_LIT = "integer-literal"
FLOAT_LIT = "float-literal"
OPERATOR = "operator"
PUNCT = "punctuation"
EOF = "eof"

KEYWORDS = frozenset({
    "if", "else", "for", "while", "do", "break", "continue", "return", "discard",
    "struct", "uniform", "in", "out", "inout", "const", "static", "inline",
    "true", "false",
})

# C and C++ words the language reserves but does not implement.
RESERVED_WORDS = frozenset({
    "asm", "auto", "case", "catch", "char", "class", "const_cast", "default",
    "delete", "dynamic_cast", "enum", "explicit", "export", "extern", "friend",
    "goto", "long", "mutable", "namespace", "new", "operator", "private",
    "protected", "public", "register", "reinterpret_cast", "short", "signed",
    "sizeof", "static_cast", "switch", "template", "this", "throw", "try",
    "typedef", "typeid", "typename", "union", "unsigned", "using", "virtual",
    "volatile", "wchar_t",
})

OPERATORS = sorted([
    "<<=", ">>=", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
    "&&", "||", "==", "!=", "<=", ">=", "<<", ">>", "->", "::",
    "+", "-", "*", "/", "%", "<", ">", "=", "!", "~", "&", "|", "^", "?", ":", ".",
], key=len, reverse=True)
PUNCTUATION = frozenset(";,()[]{}")

_NUMBER = re.compile(
    r"(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?"
)
_IDENT = re.compile(r"[A-Za-z_]\w*")


@dataclass(frozen=True)
class Token:
    kind: str
    lexeme: str
    location: Location = field(compare=False)
    suffix: str = ""  # numeric literal suffix: "", "f", "h" or "x"

    def __repr__(self) -> str:
        return f"[{self.kind} {self.lexeme}]"


def tokenize(source: SourceUnit) -> list:
    text = source.text
    tokens = []
    line, col = 1, 1
    i, n = 0, len(text)

    def loc():
        return source.remap(Location(line, col))

    def fail(code, message):
        raise CompileError([error(code, message, loc())])

    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\f\v":
            i += 1
            col += 1
            continue
        start = i
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            m = _NUMBER.match(text, i)
            lexeme = m.group(0)
            j = m.end()
            suffix = ""
            if j < n and text[j] in "fFhHxX":
                suffix = text[j].lower()
                j += 1
            # a literal must not run straight into letters, digits or a second '.digit'
            if j < n and (text[j].isalnum() or text[j] == "_" or
                          (text[j] == "." and j + 1 < n and text[j + 1].isdigit())):
                fail("E_BAD_LITERAL", f"malformed numeric literal {text[start:j + 1]!r}")
            is_float = bool(suffix) or any(ch in lexeme for ch in ".eE")
            if suffix == "" and not is_float and len(lexeme) > 1 and lexeme[0] == "0":
                fail("E_BAD_LITERAL", f"octal literal {lexeme!r} not supported")
            tokens.append(Token(FLOAT_LIT if is_float else INT_LIT, lexeme, loc(), suffix))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            m = _IDENT.match(text, i)
            word = m.group(0)
            if word in KEYWORDS:
                kind = KEYWORD
            elif word in RESERVED_WORDS:
                kind = RESERVED
            else:
                kind = IDENTIFIER
            tokens.append(Token(kind, word, loc()))
            col += len(word)
            i = m.end()
            continue
        if c in PUNCTUATION:
            tokens.append(Token(PUNCT, c, loc()))
            i += 1
            col += 1
            continue
        for op in OPERATORS:
            if text.startswith(op, i):
                tokens.append(Token(OPERATOR, op, loc()))
                i += len(op)
                col += len(op)
                break
        else:
            fail("E_LEX", f"illegal character {c!r}")
    tokens.append(Token(EOF, "", loc()))
    return tokens
