"""Diagnostics shared by every compiler stage.

Every diagnostic carries a stable code from ``CODES`` so tools and tests can
match on the code instead of the message text.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

ERROR = "error"
WARNING = "warning"

CODES = {
    # preprocessor / lexer / parser
    "E_PP_UNTERMINATED_IF": "conditional directive without matching #endif",
    "E_PP_UNKNOWN_INCLUDE": "#include names a file that was not supplied",
    "E_PP_UNTERMINATED_COMMENT": "block comment runs to end of input",
    "E_PP_DIRECTIVE": "malformed or unknown preprocessor directive",
    "E_PP_ERROR": "#error directive reached",
    "E_LEX": "illegal character",
    "E_BAD_LITERAL": "malformed numeric literal",
    "E_SYNTAX": "syntax error",
    "E_RESERVED": "reserved keyword or operator used as a construct",
    # semantic analysis
    "E_UNDECLARED": "undeclared identifier",
    "E_REDEFINITION": "name declared twice in the same scope",
    "E_TYPE_MISMATCH": "operand or initializer type mismatch",
    "E_NOT_ASSIGNABLE": "left side of assignment is not an lvalue",
    "E_ASSIGN_UNIFORM": "uniform parameter written",
    "E_BAD_QUALIFIER": "invalid parameter qualifier combination",
    "E_SWIZZLE": "invalid swizzle",
    "E_WRITE_MASK": "invalid write mask",
    "E_NO_OVERLOAD": "no viable overload",
    "E_AMBIGUOUS": "ambiguous call",
    "E_RECURSION": "recursive call cycle",
    "E_MISSING_RETURN": "non-void function can finish without returning",
    "E_OUT_UNASSIGNED": "out parameter not assigned on some return path",
    "E_UNINITIALIZED": "read of a variable that is not definitely assigned",
    "E_NO_ENTRY": "entry function not found",
    "E_BAD_CONTROL": "break or continue outside a loop",
    "E_UNSUPPORTED": "construct outside the implemented language subset",
    # profiles
    "E_UNKNOWN_PROFILE": "profile name not recognized",
    "E_UNIMPLEMENTED_PROFILE": "profile recognized but not implemented",
    "E_TEX_IN_VERTEX": "texture access in a vertex profile",
    "E_FRAG_TEXCOORD_OUT": "fragment program outputs a TEXCOORD semantic",
    "E_DISCARD_IN_VERTEX": "discard in a vertex profile",
    "E_TEXUNITS": "more samplers than texture units",
    "E_NEEDS_BRANCHING": "data-dependent control flow",
    "E_VARIABLE_INDEX": "data-dependent array or vector index",
    "E_BAD_SEMANTIC": "semantic unknown to the profile",
    "E_DUPLICATE_SEMANTIC": "semantic bound twice",
    "E_MISSING_SEMANTIC": "varying parameter without a semantic",
    "E_CAPACITY": "profile capacity limit exceeded",
    "E_BAD_LIMIT": "malformed profile limit override",
}


@dataclass(frozen=True)
class Location:
    line: int
    column: int
    file: Optional[str] = None

    def __str__(self) -> str:
        prefix = f"{self.file}:" if self.file else ""
        return f"{prefix}{self.line}:{self.column}"


NOWHERE = Location(0, 0)


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    code: str
    message: str
    location: Location = NOWHERE

    def __post_init__(self):
        if self.code not in CODES and not self.code.startswith("W_"):
            raise ValueError(f"unregistered diagnostic code {self.code}")

    @property
    def is_error(self) -> bool:
        return self.severity == ERROR

    def format(self) -> str:
        return f"{self.location}: {self.severity} {self.code}: {self.message}"

    def as_json(self) -> dict:
        return {
            "code": self.code,
            "severity": self.severity,
            "line": self.location.line,
            "column": self.location.column,
            "message": self.message,
            "file": self.location.file,
        }


def error(code: str, message: str, location: Location = NOWHERE) -> Diagnostic:
    return Diagnostic(ERROR, code, message, location)


def warning(code: str, message: str, location: Location = NOWHERE) -> Diagnostic:
    return Diagnostic(WARNING, code, message, location)


class CompileError(Exception):
    """Raised by any stage that cannot continue; carries every error found."""

    def __init__(self, diagnostics: Iterable[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(d.format() for d in self.diagnostics))

    @property
    def codes(self) -> list[str]:
        return [d.code for d in self.diagnostics]

    @classmethod
    def single(cls, code: str, message: str, location: Location = NOWHERE) -> "CompileError":
        return cls([error(code, message, location)])


@dataclass
class DiagnosticSink:
    diagnostics: list = field(default_factory=list)

    def error(self, code: str, message: str, location: Location = NOWHERE) -> None:
        self.diagnostics.append(error(code, message, location))

    def warn(self, code: str, message: str, location: Location = NOWHERE) -> None:
        self.diagnostics.append(warning(code, message, location))

    @property
    def has_errors(self) -> bool:
        return any(d.is_error for d in self.diagnostics)

    def raise_if_errors(self) -> None:
        if self.has_errors:
            raise CompileError(self.diagnostics)
