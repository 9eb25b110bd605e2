"""Typed tree produced by semantic analysis.

Every expression carries its :class:`Type`; implicit conversions and scalar
smears appear as explicit ``TConvert`` / ``TSmear`` nodes, and every call is
bound to one :class:`FunctionSignature`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..diagnostics import NOWHERE, Location
from ..types import FunctionSignature, Type

_uid = itertools.count()


@dataclass(eq=False)
class Symbol:
    name: str
    type: Type
    kind: str  # "param", "local", "global"
    qualifier: str = ""  # "", "uniform", "out", "inout", "const"
    semantic: Optional[str] = None
    loc: Location = NOWHERE
    uid: int = field(default_factory=lambda: next(_uid))

    @property
    def is_uniform(self) -> bool:
        return self.qualifier == "uniform"

    @property
    def is_output(self) -> bool:
        return self.qualifier in ("out", "inout")

    def __repr__(self) -> str:
        return f"Symbol({self.name}:{self.type})"


# -- expressions -------------------------------------------------------------

@dataclass(eq=False)
class TExpr:
    type: Type


@dataclass(eq=False)
class TConst(TExpr):
    value: np.ndarray
    loc: Location = NOWHERE


@dataclass(eq=False)
class TVar(TExpr):
    sym: Symbol
    loc: Location = NOWHERE


@dataclass(eq=False)
class TConvert(TExpr):
    """Change of base type (same shape), or scalar <-> length-1 vector."""
    operand: TExpr
    loc: Location = NOWHERE


@dataclass(eq=False)
class TSmear(TExpr):
    """Replicate a scalar across every component of a vector or matrix."""
    operand: TExpr
    loc: Location = NOWHERE


@dataclass(eq=False)
class TBinary(TExpr):
    op: str
    left: TExpr
    right: TExpr
    loc: Location = NOWHERE


@dataclass(eq=False)
class TUnary(TExpr):
    op: str  # "-", "+", "!"
    operand: TExpr
    loc: Location = NOWHERE


@dataclass(eq=False)
class TSelect(TExpr):
    cond: TExpr
    then: TExpr
    other: TExpr
    loc: Location = NOWHERE


@dataclass(eq=False)
class TComma(TExpr):
    left: TExpr
    right: TExpr
    loc: Location = NOWHERE


@dataclass(eq=False)
class TAssign(TExpr):
    """``target op= value``; ``value`` is already converted to the target type."""
    op: str
    target: TExpr
    value: TExpr
    loc: Location = NOWHERE


@dataclass(eq=False)
class TIncDec(TExpr):
    op: str  # "++" or "--"
    target: TExpr
    prefix: bool
    loc: Location = NOWHERE


@dataclass(eq=False)
class TSwizzle(TExpr):
    operand: TExpr
    comps: tuple
    loc: Location = NOWHERE


@dataclass(eq=False)
class TMatElem(TExpr):
    operand: TExpr
    row: int
    col: int
    loc: Location = NOWHERE


@dataclass(eq=False)
class TIndex(TExpr):
    operand: TExpr
    index: TExpr
    loc: Location = NOWHERE


@dataclass(eq=False)
class TField(TExpr):
    operand: TExpr
    name: str
    loc: Location = NOWHERE


@dataclass(eq=False)
class TCall(TExpr):
    sig: FunctionSignature
    args: tuple
    func: Optional["TFunction"] = None  # None for builtins
    loc: Location = NOWHERE


@dataclass(eq=False)
class TConstruct(TExpr):
    """Vector/matrix/scalar constructor; args already converted to the target base."""
    args: tuple
    loc: Location = NOWHERE


# -- statements --------------------------------------------------------------

@dataclass(eq=False)
class TStmt:
    pass


@dataclass(eq=False)
class TBlock(TStmt):
    stmts: tuple
    loc: Location = NOWHERE


@dataclass(eq=False)
class TDecl(TStmt):
    sym: Symbol
    init: Optional[TExpr] = None
    loc: Location = NOWHERE


@dataclass(eq=False)
class TExprStmt(TStmt):
    expr: TExpr
    loc: Location = NOWHERE


@dataclass(eq=False)
class TIf(TStmt):
    cond: TExpr
    then: TStmt
    other: Optional[TStmt] = None
    loc: Location = NOWHERE


@dataclass(eq=False)
class TFor(TStmt):
    init: Optional[TStmt]
    cond: Optional[TExpr]
    step: Optional[TExpr]
    body: TStmt
    loc: Location = NOWHERE


@dataclass(eq=False)
class TWhile(TStmt):
    cond: TExpr
    body: TStmt
    loc: Location = NOWHERE


@dataclass(eq=False)
class TDo(TStmt):
    body: TStmt
    cond: TExpr
    loc: Location = NOWHERE


@dataclass(eq=False)
class TBreak(TStmt):
    loc: Location = NOWHERE


@dataclass(eq=False)
class TContinue(TStmt):
    loc: Location = NOWHERE


@dataclass(eq=False)
class TReturn(TStmt):
    value: Optional[TExpr] = None
    loc: Location = NOWHERE


@dataclass(eq=False)
class TDiscard(TStmt):
    loc: Location = NOWHERE


# -- program -----------------------------------------------------------------

@dataclass(eq=False)
class TFunction:
    name: str
    sig: FunctionSignature
    params: tuple  # Symbol
    return_semantic: Optional[str] = None
    body: Optional[TBlock] = None
    loc: Location = NOWHERE

    @property
    def label(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"TFunction({self.sig})"


@dataclass(eq=False)
class TypedTree:
    functions: list  # TFunction, all user functions with bodies
    entry: TFunction
    globals: list  # TDecl, in declaration order
    structs: dict  # name -> Type
    call_graph: dict  # TFunction -> set of TFunction
    uses_discard: bool = False
    struct_semantics: dict = field(default_factory=dict)  # struct -> {field: semantic}

    @property
    def uniform_globals(self) -> list:
        return [d.sym for d in self.globals if d.sym.is_uniform]

    def reachable(self) -> list:
        """Entry plus every user function it can call, entry first."""
        position = {f: i for i, f in enumerate(self.functions)}
        seen, order, stack = set(), [], [self.entry]
        while stack:
            f = stack.pop()
            if f in seen:
                continue
            seen.add(f)
            order.append(f)
            stack.extend(sorted(self.call_graph.get(f, ()), key=lambda g: (position.get(g, -1), g.name),
                                reverse=True))
        return order


def children(node) -> list:
    """Direct typed sub-nodes of an expression or statement."""
    out = []
    for name in getattr(node, "__dataclass_fields__", {}):
        if name in ("type", "loc", "sym", "sig", "func"):
            continue
        val = getattr(node, name)
        if isinstance(val, (TExpr, TStmt)):
            out.append(val)
        elif isinstance(val, tuple):
            out.extend(v for v in val if isinstance(v, (TExpr, TStmt)))
    return out


def walk(node):
    yield node
    for c in children(node):
        yield from walk(c)
