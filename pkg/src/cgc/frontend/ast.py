"""Syntax tree nodes.

Nodes are frozen dataclasses; the ``loc`` field is excluded from equality so
two trees compare structurally regardless of where they came from.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..diagnostics import NOWHERE, Location


def _loc():
    return field(default=NOWHERE, compare=False, repr=False)


class Node:
    loc: Location


# -- expressions -----------------------------------------------------------

class Expr(Node):
    pass


@dataclass(frozen=True)
class IntLit(Expr):
    value: int
    loc: Location = _loc()


@dataclass(frozen=True)
class FloatLit(Expr):
    value: float
    suffix: str = ""
    loc: Location = _loc()


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool
    loc: Location = _loc()


@dataclass(frozen=True)
class Name(Expr):
    ident: str
    loc: Location = _loc()


@dataclass(frozen=True)
class Constructor(Expr):
    type_name: str
    args: tuple
    loc: Location = _loc()


@dataclass(frozen=True)
class Call(Expr):
    callee: str
    args: tuple
    loc: Location = _loc()


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr
    loc: Location = _loc()


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # "-", "+", "!", "~", "++", "--" (prefix)
    operand: Expr
    loc: Location = _loc()


@dataclass(frozen=True)
class Postfix(Expr):
    op: str  # "++" or "--"
    operand: Expr
    loc: Location = _loc()


@dataclass(frozen=True)
class Conditional(Expr):
    cond: Expr
    then: Expr
    other: Expr
    loc: Location = _loc()


@dataclass(frozen=True)
class Comma(Expr):
    left: Expr
    right: Expr
    loc: Location = _loc()


@dataclass(frozen=True)
class Assign(Expr):
    op: str  # "=", "+=", ...
    target: Expr
    value: Expr
    loc: Location = _loc()


@dataclass(frozen=True)
class Member(Expr):
    """``obj.name``: swizzle, write mask, matrix element or record field."""
    obj: Expr
    name: str
    loc: Location = _loc()


@dataclass(frozen=True)
class Index(Expr):
    obj: Expr
    index: Expr
    loc: Location = _loc()


@dataclass(frozen=True)
class Cast(Expr):
    type_name: str
    operand: Expr
    loc: Location = _loc()


# -- statements ------------------------------------------------------------

class Stmt(Node):
    pass


@dataclass(frozen=True)
class VarDecl(Node):
    name: str
    dims: tuple = ()  # array extents
    init: Optional[Expr] = None
    semantic: Optional[str] = None
    loc: Location = _loc()


@dataclass(frozen=True)
class DeclStmt(Stmt):
    qualifiers: tuple
    type_name: str
    vars: tuple  # VarDecl
    loc: Location = _loc()


@dataclass(frozen=True)
class ExprStmt(Stmt):
    expr: Expr
    loc: Location = _loc()


@dataclass(frozen=True)
class Block(Stmt):
    stmts: tuple
    loc: Location = _loc()


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then: Stmt
    other: Optional[Stmt] = None
    loc: Location = _loc()


@dataclass(frozen=True)
class For(Stmt):
    init: Optional[Stmt]  # DeclStmt or ExprStmt
    cond: Optional[Expr]
    step: Optional[Expr]
    body: Stmt
    loc: Location = _loc()


@dataclass(frozen=True)
class While(Stmt):
    cond: Expr
    body: Stmt
    loc: Location = _loc()


@dataclass(frozen=True)
class DoWhile(Stmt):
    body: Stmt
    cond: Expr
    loc: Location = _loc()


@dataclass(frozen=True)
class Break(Stmt):
    loc: Location = _loc()


@dataclass(frozen=True)
class Continue(Stmt):
    loc: Location = _loc()


@dataclass(frozen=True)
class Return(Stmt):
    value: Optional[Expr] = None
    loc: Location = _loc()


@dataclass(frozen=True)
class Discard(Stmt):
    loc: Location = _loc()


# -- declarations ----------------------------------------------------------

@dataclass(frozen=True)
class Param(Node):
    qualifiers: tuple  # subset of ("uniform", "in", "out", "inout", "const")
    type_name: str
    name: str
    dims: tuple = ()
    semantic: Optional[str] = None
    loc: Location = _loc()


@dataclass(frozen=True)
class FunctionDecl(Node):
    return_type: str
    name: str
    params: tuple
    return_semantic: Optional[str] = None
    body: Optional[Block] = None  # None for a prototype
    loc: Location = _loc()


@dataclass(frozen=True)
class FieldDecl(Node):
    type_name: str
    name: str
    dims: tuple = ()
    semantic: Optional[str] = None
    loc: Location = _loc()


@dataclass(frozen=True)
class StructDecl(Node):
    name: str
    fields: tuple
    loc: Location = _loc()


@dataclass(frozen=True)
class SyntaxTree:
    declarations: tuple  # FunctionDecl | StructDecl | DeclStmt

    def function(self, name: str) -> Optional[FunctionDecl]:
        for d in self.declarations:
            if isinstance(d, FunctionDecl) and d.name == name and d.body is not None:
                return d
        return None

    @property
    def functions(self) -> list:
        return [d for d in self.declarations if isinstance(d, FunctionDecl)]


def walk(node):
    """Yield ``node`` and every node below it, depth first."""
    yield node
    if isinstance(node, SyntaxTree):
        children = node.declarations
    else:
        children = []
        for name in getattr(node, "__dataclass_fields__", {}):
            if name == "loc":
                continue
            val = getattr(node, name)
            if isinstance(val, Node):
                children.append(val)
            elif isinstance(val, tuple):
                children.extend(v for v in val if isinstance(v, Node))
    for child in children:
        yield from walk(child)
