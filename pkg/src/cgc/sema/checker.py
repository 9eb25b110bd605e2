"""Name resolution, typing, overload resolution and recursion rejection."""
from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import stdlib
from ..diagnostics import CompileError, DiagnosticSink, Location, NOWHERE, error
from ..frontend import ast
from ..numeric import saturate_fixed
from ..types import (ARRAY, BOOL, INT, MATRIX, RECORD, SAMPLER, SCALAR, VECTOR, VOID,
                     FunctionSignature, Type, array, assignable, builtin_type, castable,
                     common_base, component_count, conversion_cost, field_type, record,
                     same_shape, scalar, vector)
from . import tree as T
from .flow import check_flow

SWIZZLE_SETS = ("xyzw", "rgba")
ARITH_OPS = ("+", "-", "*", "/", "%")
COMPARE_OPS = ("<", ">", "<=", ">=", "==", "!=")
LOGICAL_OPS = ("&&", "||")
BITWISE_OPS = ("&", "|", "^", "<<", ">>")


class _Abort(Exception):
    """Unwinds the current statement after a diagnostic was recorded."""


@dataclass(frozen=True)
class Swizzle:
    components: tuple
    source_set: str

    def __post_init__(self):
        if not 1 <= len(self.components) <= 4:
            raise ValueError("swizzle length must be 1..4")


def np_dtype(base: str):
    return {"bool": np.bool_, "int": np.int32}.get(base, np.float32)


def const_value(t: Type, value) -> np.ndarray:
    v = np.asarray(value, dtype=np_dtype(t.base)).reshape(t.shape)
    if t.base == "fixed":
        v = saturate_fixed(v)
    return v


def parse_swizzle(text: str) -> Swizzle:
    """Parse ``.xyzw`` / ``.rgba`` suffix text; raises CompileError(E_SWIZZLE)."""
    if not 1 <= len(text) <= 4:
        raise CompileError.single("E_SWIZZLE", f"swizzle '{text}' must have 1 to 4 components")
    for letters in SWIZZLE_SETS:
        if all(ch in letters for ch in text):
            return Swizzle(tuple(letters.index(ch) for ch in text), letters)
    if all(ch in "xyzwrgba" for ch in text):
        raise CompileError.single("E_SWIZZLE", f"swizzle '{text}' mixes xyzw and rgba letters")
    raise CompileError.single("E_SWIZZLE", f"invalid swizzle letter in '{text}'")


def swizzle_type(base: Type, text: str) -> Type:
    """Result type of ``base.text``; scalars accept only index-0 components."""
    if base.kind not in (SCALAR, VECTOR):
        raise CompileError.single("E_SWIZZLE", f"cannot swizzle a value of type {base}")
    sw = parse_swizzle(text)
    limit = base.width
    bad = [c for c in sw.components if c >= limit]
    if bad:
        raise CompileError.single(
            "E_SWIZZLE", f"swizzle '{text}' reads component {bad[0]} of a {limit}-component {base}")
    n = len(sw.components)
    return scalar(base.base) if n == 1 else vector(base.base, n)


def validate_write_mask(lhs: Type, mask: Swizzle, rhs: Optional[Type] = None) -> frozenset:
    """Components written by ``lhs.mask = rhs``."""
    if lhs.kind not in (SCALAR, VECTOR):
        raise CompileError.single("E_WRITE_MASK", f"cannot write-mask a value of type {lhs}")
    comps = mask.components
    if len(set(comps)) != len(comps):
        raise CompileError.single("E_WRITE_MASK", "write mask names a component twice")
    if any(c >= lhs.width for c in comps):
        raise CompileError.single("E_WRITE_MASK", f"write mask exceeds the {lhs.width} components of {lhs}")
    if rhs is not None:
        target = scalar(lhs.base) if len(comps) == 1 else vector(lhs.base, len(comps))
        if not assignable(rhs, target):
            raise CompileError.single(
                "E_WRITE_MASK", f"cannot assign {rhs} through a {len(comps)}-component write mask")
    return frozenset(comps)


def resolve_overload(name: str, args: list, candidates: list) -> FunctionSignature:
    """Pick the unique cheapest viable candidate; exact matches always win."""
    if not candidates:
        raise CompileError.single("E_NO_OVERLOAD", f"no function named '{name}'")
    scored = []
    for sig in candidates:
        if len(sig.params) != len(args):
            continue
        total = (0, 0)
        for arg, (ptype, qual) in zip(args, sig.params):
            if qual in ("out", "inout"):
                cost = (0, 0) if arg == ptype else None
            else:
                cost = conversion_cost(arg, ptype)
            if cost is None:
                break
            total = (total[0] + cost[0], total[1] + cost[1])
        else:
            scored.append((total, sig))
    if not scored:
        shown = ", ".join(str(a) for a in args)
        raise CompileError.single("E_NO_OVERLOAD", f"no overload of '{name}' accepts ({shown})")
    best = min(cost for cost, _ in scored)
    winners = {sig for cost, sig in scored if cost == best}
    if len(winners) > 1:
        shown = ", ".join(str(a) for a in args)
        raise CompileError.single("E_AMBIGUOUS", f"call {name}({shown}) is ambiguous")
    return winners.pop()


def detect_recursion(graph: dict) -> None:
    """Raise E_RECURSION naming one cycle of ``graph`` (node -> iterable of callees)."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = defaultdict(int)
    label = lambda n: getattr(n, "name", n)
    order = lambda n: (str(label(n)), str(getattr(n, "sig", "")))

    def visit(node, path):
        color[node] = GREY
        path.append(node)
        for nxt in sorted(graph.get(node, ()), key=order):
            if color[nxt] == GREY:
                cycle = path[path.index(nxt):]
                names = [label(n) for n in cycle]
                loc = getattr(cycle[0], "loc", NOWHERE)
                raise CompileError.single(
                    "E_RECURSION", "recursive call cycle: " + " -> ".join(names + [names[0]]), loc)
            if color[nxt] == WHITE:
                visit(nxt, path)
        path.pop()
        color[node] = BLACK

    for node in sorted(graph, key=order):
        if color[node] == WHITE:
            visit(node, [])


def recursion_cycle(graph: dict) -> Optional[list]:
    try:
        detect_recursion(graph)
    except CompileError as exc:
        msg = exc.diagnostics[0].message.split(": ", 1)[1]
        return msg.split(" -> ")[:-1]
    return None


_MAT_ELEM = re.compile(r"^_m([0-3])([0-3])$|^_([1-4])([1-4])$")


def _scalarlike_shape(a: Type, b: Type, base: str) -> Type:
    if a.is_scalar and b.is_scalar:
        return scalar(base)
    return vector(base, 1)


class Checker:
    def __init__(self, syntax: ast.SyntaxTree):
        self.syntax = syntax
        self.sink = DiagnosticSink()
        self.structs: dict = {}
        self.scopes: list = [{}]
        self.user_funcs: dict = defaultdict(list)
        self.decl_of: dict = {}
        self.globals: list = []
        self.current: Optional[T.TFunction] = None
        self.calls: dict = defaultdict(set)
        self.loop_depth = 0
        self.discarding: set = set()
        self.struct_semantics: dict = {}

    # -- diagnostics -------------------------------------------------
    def fail(self, code: str, message: str, loc: Location):
        self.sink.error(code, message, loc)
        raise _Abort()

    def guard(self, fn, loc: Location):
        """Run ``fn`` translating CompileError from helper functions into a recorded diagnostic."""
        try:
            return fn()
        except CompileError as exc:
            d = exc.diagnostics[0]
            self.fail(d.code, d.message, loc if d.location == NOWHERE else d.location)

    # -- types -------------------------------------------------------
    def resolve_type(self, name: str, dims: tuple, loc: Location) -> Type:
        t = builtin_type(name)
        if t is None:
            t = self.structs.get(name)
        if t is None:
            self.fail("E_UNDECLARED", f"unknown type '{name}'", loc)
        for d in reversed(dims):
            if d <= 0:
                self.fail("E_TYPE_MISMATCH", "array extent must be positive", loc)
            t = array(t, d)
        return t

    # -- scopes ------------------------------------------------------
    def declare(self, sym: T.Symbol):
        scope = self.scopes[-1]
        if sym.name in scope:
            self.fail("E_REDEFINITION", f"'{sym.name}' already declared in this scope", sym.loc)
        scope[sym.name] = sym

    def lookup(self, name: str) -> Optional[T.Symbol]:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None

    # -- program -----------------------------------------------------
    def run(self, entry: str) -> T.TypedTree:
        decls = self.syntax.declarations
        for d in decls:
            if isinstance(d, ast.StructDecl):
                self.attempt(lambda d=d: self.struct_decl(d))
        for d in decls:
            if isinstance(d, ast.FunctionDecl):
                self.attempt(lambda d=d: self.function_shell(d))
        for d in decls:
            if isinstance(d, ast.DeclStmt):
                self.attempt(lambda d=d: self.global_decl(d))
            elif isinstance(d, ast.FunctionDecl) and d.body is not None:
                fn = self.decl_of.get(id(d))
                if fn is not None:
                    self.function_body(fn, d)
        self.sink.raise_if_errors()

        functions = [f for fs in self.user_funcs.values() for f in fs if f.body is not None]
        for fs in self.user_funcs.values():
            for f in fs:
                if f.body is None and f in {g for s in self.calls.values() for g in s}:
                    self.sink.error("E_UNDECLARED", f"function '{f.name}' is declared but never defined", f.loc)
        graph = {f: set(self.calls.get(f, ())) for f in functions}
        try:
            detect_recursion(graph)
        except CompileError as exc:
            self.sink.diagnostics.extend(exc.diagnostics)
        self.sink.raise_if_errors()

        for f in functions:
            self.sink.diagnostics.extend(check_flow(f))
        self.sink.raise_if_errors()

        entries = [f for f in functions if f.name == entry]
        if not entries:
            raise CompileError.single("E_NO_ENTRY", f"entry function '{entry}' not found")
        if len(entries) > 1:
            raise CompileError.single("E_AMBIGUOUS", f"entry function '{entry}' is overloaded")
        typed = T.TypedTree(functions, entries[0], self.globals, dict(self.structs), graph)
        typed.uses_discard = any(f in self.discarding for f in typed.reachable())
        return typed

    def attempt(self, fn):
        try:
            fn()
        except _Abort:
            pass

    def struct_decl(self, d: ast.StructDecl):
        if d.name in self.structs or builtin_type(d.name) is not None:
            self.fail("E_REDEFINITION", f"type '{d.name}' already defined", d.loc)
        fields = []
        seen = set()
        for f in d.fields:
            if f.name in seen:
                self.fail("E_REDEFINITION", f"field '{f.name}' repeated", f.loc)
            seen.add(f.name)
            ft = self.resolve_type(f.type_name, f.dims, f.loc)
            if ft.kind in (VOID, SAMPLER):
                self.fail("E_TYPE_MISMATCH", f"field '{f.name}' cannot have type {ft}", f.loc)
            fields.append((f.name, ft))
        self.structs[d.name] = record(d.name, fields)
        self.struct_semantics[d.name] = {f.name: f.semantic for f in d.fields}

    def param_qualifier(self, p: ast.Param) -> str:
        quals = set(p.qualifiers)
        if "uniform" in quals and quals & {"out", "inout"}:
            self.fail("E_BAD_QUALIFIER", f"parameter '{p.name}' cannot be both uniform and output", p.loc)
        if "out" in quals and "inout" in quals:
            self.fail("E_BAD_QUALIFIER", f"parameter '{p.name}' has conflicting qualifiers", p.loc)
        if "const" in quals and quals & {"out", "inout"}:
            self.fail("E_BAD_QUALIFIER", f"parameter '{p.name}' cannot be const and output", p.loc)
        for q in ("uniform", "inout", "out", "const"):
            if q in quals:
                return q
        return ""

    def function_shell(self, d: ast.FunctionDecl):
        ret = self.resolve_type(d.return_type, (), d.loc)
        if ret.kind == SAMPLER:
            self.fail("E_TYPE_MISMATCH", "functions cannot return samplers", d.loc)
        params, sig_params = [], []
        for p in d.params:
            pt = self.resolve_type(p.type_name, p.dims, p.loc)
            if pt.kind == VOID:
                self.fail("E_TYPE_MISMATCH", f"parameter '{p.name}' has type void", p.loc)
            q = self.param_qualifier(p)
            params.append(T.Symbol(p.name, pt, "param", q, p.semantic.upper() if p.semantic else None, p.loc))
            sig_params.append((pt, q if q in ("out", "inout") else ""))
        sig = FunctionSignature(d.name, tuple(sig_params), ret, "user", d.name)
        for existing in self.user_funcs[d.name]:
            if existing.sig.param_types == sig.param_types:
                if existing.sig != sig:
                    self.fail("E_REDEFINITION", f"conflicting declarations of '{d.name}'", d.loc)
                if d.body is not None and existing.body is not None:
                    self.fail("E_REDEFINITION", f"function '{d.name}' defined twice", d.loc)
                if d.body is not None:
                    existing.params = tuple(params)
                    existing.return_semantic = d.return_semantic.upper() if d.return_semantic else None
                    existing.loc = d.loc
                self.decl_of[id(d)] = existing
                return
        fn = T.TFunction(d.name, sig, tuple(params),
                         d.return_semantic.upper() if d.return_semantic else None, None, d.loc)
        self.user_funcs[d.name].append(fn)
        self.decl_of[id(d)] = fn

    def global_decl(self, d: ast.DeclStmt):
        quals = set(d.qualifiers)
        if quals & {"in", "out", "inout", "inline"}:
            self.fail("E_BAD_QUALIFIER", "invalid qualifier on a global variable", d.loc)
        for v in d.vars:
            t = self.resolve_type(d.type_name, v.dims, v.loc)
            if t.kind == VOID:
                self.fail("E_TYPE_MISMATCH", f"variable '{v.name}' has type void", v.loc)
            if "uniform" in quals or (v.init is None and not quals & {"const", "static"}):
                qual = "uniform"
            else:
                qual = "const" if "const" in quals else ""
            if v.init is not None and qual == "uniform":
                self.fail("E_UNSUPPORTED", f"uniform '{v.name}' cannot have an initializer", v.loc)
            if qual == "const" and v.init is None:
                self.fail("E_TYPE_MISMATCH", f"const '{v.name}' needs an initializer", v.loc)
            if t.kind == SAMPLER and qual != "uniform":
                self.fail("E_TYPE_MISMATCH", "samplers must be uniform", v.loc)
            init = self.coerce(self.expr(v.init), t, v.loc) if v.init is not None else None
            sym = T.Symbol(v.name, t, "global", qual, v.semantic, v.loc)
            self.declare(sym)
            self.globals.append(T.TDecl(sym, init, v.loc))

    def function_body(self, fn: T.TFunction, d: ast.FunctionDecl):
        self.current = fn
        self.scopes.append({})
        try:
            for p in fn.params:
                self.attempt(lambda p=p: self.declare(p))
            body = self.block(d.body, new_scope=False)
        finally:
            self.scopes.pop()
            self.current = None
        fn.body = body

    # -- statements --------------------------------------------------
    def block(self, b: ast.Block, new_scope: bool = True) -> T.TBlock:
        if new_scope:
            self.scopes.append({})
        out = []
        try:
            for s in b.stmts:
                try:
                    out.append(self.stmt(s))
                except _Abort:
                    pass
        finally:
            if new_scope:
                self.scopes.pop()
        return T.TBlock(tuple(out), b.loc)

    def cond(self, e: ast.Expr) -> T.TExpr:
        c = self.expr(e)
        if c.type != BOOL and not (c.type.is_scalarlike and c.type.base == "bool"):
            self.fail("E_TYPE_MISMATCH", f"condition must be bool, found {c.type}", e.loc)
        return self.convert(c, BOOL)

    def stmt(self, s: ast.Stmt) -> T.TStmt:
        if isinstance(s, ast.Block):
            return self.block(s)
        if isinstance(s, ast.DeclStmt):
            return self.local_decl(s)
        if isinstance(s, ast.ExprStmt):
            return T.TExprStmt(self.expr(s.expr), s.loc)
        if isinstance(s, ast.If):
            c = self.cond(s.cond)
            then = self.scoped_stmt(s.then)
            other = self.scoped_stmt(s.other) if s.other is not None else None
            return T.TIf(c, then, other, s.loc)
        if isinstance(s, ast.While):
            c = self.cond(s.cond)
            return T.TWhile(c, self.loop_body(s.body), s.loc)
        if isinstance(s, ast.DoWhile):
            body = self.loop_body(s.body)
            return T.TDo(body, self.cond(s.cond), s.loc)
        if isinstance(s, ast.For):
            self.scopes.append({})
            try:
                init = self.stmt(s.init) if s.init is not None else None
                c = self.cond(s.cond) if s.cond is not None else None
                step = self.expr(s.step) if s.step is not None else None
                body = self.loop_body(s.body)
            finally:
                self.scopes.pop()
            return T.TFor(init, c, step, body, s.loc)
        if isinstance(s, (ast.Break, ast.Continue)):
            if self.loop_depth == 0:
                self.fail("E_BAD_CONTROL", f"'{'break' if isinstance(s, ast.Break) else 'continue'}' outside a loop", s.loc)
            return T.TBreak(s.loc) if isinstance(s, ast.Break) else T.TContinue(s.loc)
        if isinstance(s, ast.Return):
            ret = self.current.sig.ret
            if s.value is None:
                if ret.kind != VOID:
                    self.fail("E_TYPE_MISMATCH", f"function returning {ret} needs a return value", s.loc)
                return T.TReturn(None, s.loc)
            if ret.kind == VOID:
                self.fail("E_TYPE_MISMATCH", "void function cannot return a value", s.loc)
            return T.TReturn(self.coerce(self.expr(s.value), ret, s.value.loc), s.loc)
        if isinstance(s, ast.Discard):
            self.discarding.add(self.current)
            return T.TDiscard(s.loc)
        raise TypeError(f"unknown statement {type(s).__name__}")

    def scoped_stmt(self, s: ast.Stmt) -> T.TStmt:
        self.scopes.append({})
        try:
            try:
                return self.stmt(s)
            except _Abort:
                return T.TBlock((), s.loc)
        finally:
            self.scopes.pop()

    def loop_body(self, s: ast.Stmt) -> T.TStmt:
        self.loop_depth += 1
        try:
            return self.scoped_stmt(s)
        finally:
            self.loop_depth -= 1

    def local_decl(self, d: ast.DeclStmt) -> T.TStmt:
        quals = set(d.qualifiers)
        if quals - {"const", "static"}:
            self.fail("E_BAD_QUALIFIER", f"invalid qualifier on local variable: {sorted(quals - {'const', 'static'})}", d.loc)
        out = []
        for v in d.vars:
            t = self.resolve_type(d.type_name, v.dims, v.loc)
            if t.kind in (VOID, SAMPLER):
                self.fail("E_TYPE_MISMATCH", f"local '{v.name}' cannot have type {t}", v.loc)
            if v.semantic:
                self.fail("E_SYNTAX", "semantics are only allowed on parameters and globals", v.loc)
            if "const" in quals and v.init is None:
                self.fail("E_TYPE_MISMATCH", f"const '{v.name}' needs an initializer", v.loc)
            init = self.coerce(self.expr(v.init), t, v.init.loc) if v.init is not None else None
            sym = T.Symbol(v.name, t, "local", "const" if "const" in quals else "", None, v.loc)
            self.declare(sym)
            out.append(T.TDecl(sym, init, v.loc))
        return out[0] if len(out) == 1 else T.TBlock(tuple(out), d.loc)

    # -- conversions -------------------------------------------------
    def convert(self, e: T.TExpr, target: Type) -> T.TExpr:
        """Insert explicit conversion/smear nodes; caller has checked legality."""
        src = e.type
        if src == target:
            return e
        loc = getattr(e, "loc", NOWHERE)
        if same_shape(src, target):
            return T.TConvert(target, e, loc)
        if src.is_scalarlike and target.kind in (VECTOR, MATRIX):
            s = scalar(target.base)
            if src != s:
                e = T.TConvert(s, e, loc)
            return T.TSmear(target, e, loc)
        raise AssertionError(f"no conversion {src} -> {target}")

    def coerce(self, e: T.TExpr, target: Type, loc: Location) -> T.TExpr:
        if not assignable(e.type, target):
            self.fail("E_TYPE_MISMATCH", f"cannot convert {e.type} to {target}", loc)
        return self.convert(e, target)

    # -- expressions -------------------------------------------------
    def expr(self, e: ast.Expr) -> T.TExpr:
        method = getattr(self, "e_" + type(e).__name__)
        return method(e)

    def e_IntLit(self, e):
        return T.TConst(INT, const_value(INT, e.value), e.loc)

    def e_FloatLit(self, e):
        base = {"": "float", "f": "float", "h": "half", "x": "fixed"}[e.suffix]
        t = scalar(base)
        return T.TConst(t, const_value(t, e.value), e.loc)

    def e_BoolLit(self, e):
        return T.TConst(BOOL, const_value(BOOL, e.value), e.loc)

    def e_Name(self, e):
        sym = self.lookup(e.ident)
        if sym is None:
            what = "function used as a value" if e.ident in self.user_funcs or stdlib.descriptor(e.ident) else "undeclared identifier"
            self.fail("E_UNDECLARED" if what.startswith("undeclared") else "E_UNSUPPORTED",
                      f"{what} '{e.ident}'", e.loc)
        return T.TVar(sym.type, sym, e.loc)

    def unify(self, a: T.TExpr, b: T.TExpr, op: str, loc: Location):
        """Bring two numeric operands to a common type (promotion + smear)."""
        ta, tb = a.type, b.type
        if not (ta.is_basic and tb.is_basic):
            self.fail("E_TYPE_MISMATCH", f"operator '{op}' cannot combine {ta} and {tb}", loc)
        if (ta.base == "bool") != (tb.base == "bool"):
            self.fail("E_TYPE_MISMATCH", f"operator '{op}' cannot mix bool and {ta if tb.base == 'bool' else tb}", loc)
        base = common_base(ta.base, tb.base)
        if base is None:
            self.fail("E_TYPE_MISMATCH", f"no common type for {ta} and {tb}", loc)
        if same_shape(ta, tb):
            result = _scalarlike_shape(ta, tb, base) if ta.is_scalarlike else ta.with_base(base)
        elif ta.is_scalarlike:
            result = tb.with_base(base)
        elif tb.is_scalarlike:
            result = ta.with_base(base)
        else:
            self.fail("E_TYPE_MISMATCH", f"operator '{op}' needs matching shapes, found {ta} and {tb}", loc)
        return self.convert(a, result), self.convert(b, result), result

    def e_Binary(self, e):
        op = e.op
        if op in BITWISE_OPS:
            self.fail("E_RESERVED", f"bitwise operator '{op}' is reserved and not supported", e.loc)
        a, b = self.expr(e.left), self.expr(e.right)
        if op in LOGICAL_OPS:
            if a.type.base != "bool" or b.type.base != "bool" or not (a.type.kind in (SCALAR, VECTOR) and b.type.kind in (SCALAR, VECTOR)):
                self.fail("E_TYPE_MISMATCH", f"operator '{op}' needs bool operands, found {a.type} and {b.type}", e.loc)
            a, b, t = self.unify(a, b, op, e.loc)
            return T.TBinary(t, op, a, b, e.loc)
        if a.type.base == "bool" or b.type.base == "bool":
            if not (op in ("==", "!=") and a.type.base == b.type.base == "bool"):
                self.fail("E_TYPE_MISMATCH", f"operator '{op}' is not defined on bool", e.loc)
        if not (a.type.is_basic and b.type.is_basic):
            self.fail("E_TYPE_MISMATCH", f"operator '{op}' cannot combine {a.type} and {b.type}", e.loc)
        a, b, t = self.unify(a, b, op, e.loc)
        if op in ARITH_OPS:
            return T.TBinary(t, op, a, b, e.loc)
        if op in COMPARE_OPS:
            if t.is_matrix:
                self.fail("E_TYPE_MISMATCH", "comparison of matrices is not supported", e.loc)
            return T.TBinary(t.with_base("bool"), op, a, b, e.loc)
        self.fail("E_SYNTAX", f"unknown operator '{op}'", e.loc)

    def e_Unary(self, e):
        if e.op == "~":
            self.fail("E_RESERVED", "bitwise operator '~' is reserved and not supported", e.loc)
        if e.op in ("++", "--"):
            target = self.lvalue(self.expr(e.operand), e.loc)
            if not target.type.is_numeric:
                self.fail("E_TYPE_MISMATCH", f"'{e.op}' needs a numeric operand", e.loc)
            return T.TIncDec(target.type, e.op, target, True, e.loc)
        a = self.expr(e.operand)
        if e.op == "!":
            if a.type.base != "bool" or a.type.kind not in (SCALAR, VECTOR):
                self.fail("E_TYPE_MISMATCH", f"'!' needs a bool operand, found {a.type}", e.loc)
            return T.TUnary(a.type, "!", a, e.loc)
        if not a.type.is_numeric:
            self.fail("E_TYPE_MISMATCH", f"unary '{e.op}' needs a numeric operand, found {a.type}", e.loc)
        return T.TUnary(a.type, e.op, a, e.loc)

    def e_Postfix(self, e):
        target = self.lvalue(self.expr(e.operand), e.loc)
        if not target.type.is_numeric:
            self.fail("E_TYPE_MISMATCH", f"'{e.op}' needs a numeric operand", e.loc)
        return T.TIncDec(target.type, e.op, target, False, e.loc)

    def e_Conditional(self, e):
        c = self.expr(e.cond)
        if c.type.base != "bool" or c.type.kind not in (SCALAR, VECTOR):
            self.fail("E_TYPE_MISMATCH", f"condition must be bool, found {c.type}", e.cond.loc)
        a, b = self.expr(e.then), self.expr(e.other)
        if a.type == b.type:
            t = a.type
        else:
            a, b, t = self.unify(a, b, "?:", e.loc)
        if not c.type.is_scalarlike:
            if not (t.is_vector and t.width == c.type.width):
                self.fail("E_TYPE_MISMATCH", f"vector condition {c.type} does not match branches of type {t}", e.loc)
        else:
            c = self.convert(c, BOOL)
        return T.TSelect(t, c, a, b, e.loc)

    def e_Comma(self, e):
        a, b = self.expr(e.left), self.expr(e.right)
        return T.TComma(b.type, a, b, e.loc)

    def lvalue(self, t: T.TExpr, loc: Location) -> T.TExpr:
        node = t
        while True:
            if isinstance(node, T.TVar):
                if node.sym.is_uniform:
                    self.fail("E_ASSIGN_UNIFORM", f"uniform '{node.sym.name}' cannot be written", loc)
                if node.sym.qualifier == "const":
                    self.fail("E_NOT_ASSIGNABLE", f"const '{node.sym.name}' cannot be written", loc)
                return t
            if isinstance(node, T.TSwizzle):
                if len(set(node.comps)) != len(node.comps):
                    self.fail("E_WRITE_MASK", "write mask names a component twice", loc)
                node = node.operand
            elif isinstance(node, (T.TIndex, T.TField, T.TMatElem)):
                node = node.operand
            else:
                self.fail("E_NOT_ASSIGNABLE", "expression is not assignable", loc)

    def e_Assign(self, e):
        op = e.op
        if op in ("&=", "|=", "^=", "<<=", ">>="):
            self.fail("E_RESERVED", f"bitwise operator '{op}' is reserved and not supported", e.loc)
        target = self.lvalue(self.expr(e.target), e.loc)
        value = self.expr(e.value)
        tt = target.type
        if isinstance(target, T.TSwizzle):
            self.guard(lambda: validate_write_mask(
                target.operand.type, Swizzle(target.comps, "xyzw"), value.type), e.loc)
        if op != "=":
            if not tt.is_numeric:
                self.fail("E_TYPE_MISMATCH", f"'{op}' needs a numeric target, found {tt}", e.loc)
        if tt.kind == SAMPLER:
            self.fail("E_TYPE_MISMATCH", "samplers cannot be assigned", e.loc)
        value = self.coerce(value, tt, e.loc)
        return T.TAssign(tt, op, target, value, e.loc)

    def e_Member(self, e):
        obj = self.expr(e.obj)
        t = obj.type
        if t.kind == RECORD:
            ft = field_type(t, e.name)
            if ft is None:
                self.fail("E_UNDECLARED", f"{t} has no field '{e.name}'", e.loc)
            return T.TField(ft, obj, e.name, e.loc)
        if t.kind == MATRIX:
            m = _MAT_ELEM.match(e.name)
            if not m:
                self.fail("E_UNSUPPORTED", f"matrix swizzle '.{e.name}' is not supported; use ._mRC", e.loc)
            if m.group(1) is not None:
                r, c = int(m.group(1)), int(m.group(2))
            else:
                r, c = int(m.group(3)) - 1, int(m.group(4)) - 1
            if r >= t.rows or c >= t.cols:
                self.fail("E_SWIZZLE", f"element ({r}, {c}) outside {t}", e.loc)
            return T.TMatElem(scalar(t.base), obj, r, c, e.loc)
        rt = self.guard(lambda: swizzle_type(t, e.name), e.loc)
        comps = parse_swizzle(e.name).components
        return T.TSwizzle(rt, obj, comps, e.loc)

    def e_Index(self, e):
        obj = self.expr(e.obj)
        idx = self.expr(e.index)
        if idx.type.base != "int" or not idx.type.is_scalarlike:
            self.fail("E_TYPE_MISMATCH", f"index must be int, found {idx.type}", e.index.loc)
        idx = self.convert(idx, INT)
        t = obj.type
        if t.kind == ARRAY:
            et, n = t.elem, t.length
        elif t.kind == VECTOR:
            et, n = scalar(t.base), t.cols
        elif t.kind == MATRIX:
            et, n = t.row_type(), t.rows
        else:
            self.fail("E_TYPE_MISMATCH", f"cannot index a value of type {t}", e.loc)
        if isinstance(idx, T.TConst) and not 0 <= int(idx.value) < n:
            self.fail("E_TYPE_MISMATCH", f"index {int(idx.value)} out of range for {t}", e.index.loc)
        return T.TIndex(et, obj, idx, e.loc)

    def e_Call(self, e):
        name = e.callee
        args = [self.expr(a) for a in e.args]
        user = self.user_funcs.get(name, [])
        candidates = [f.sig for f in user] + stdlib.builtin_signatures(name)
        if not candidates:
            if self.lookup(name) is not None:
                self.fail("E_UNSUPPORTED", f"'{name}' is not a function (function variables are not supported)", e.loc)
            self.fail("E_UNDECLARED", f"undeclared function '{name}'", e.loc)
        sig = self.guard(lambda: resolve_overload(name, [a.type for a in args], candidates), e.loc)
        conv = []
        for a, (pt, q), src in zip(args, sig.params, e.args):
            if q in ("out", "inout"):
                conv.append(self.lvalue(a, src.loc))
            else:
                conv.append(self.convert(a, pt))
        func = None
        if sig.origin == "user":
            func = next(f for f in user if f.sig == sig)
            if self.current is not None:
                self.calls[self.current].add(func)
        return T.TCall(sig.ret, sig, tuple(conv), func, e.loc)

    def e_Constructor(self, e):
        t = builtin_type(e.type_name)
        if t is None or t.kind not in (SCALAR, VECTOR, MATRIX):
            self.fail("E_TYPE_MISMATCH", f"'{e.type_name}' has no constructor", e.loc)
        args = [self.expr(a) for a in e.args]
        for a in args:
            if not a.type.is_basic:
                self.fail("E_TYPE_MISMATCH", f"constructor argument of type {a.type}", e.loc)
            if (a.type.base == "bool") != (t.base == "bool"):
                self.fail("E_TYPE_MISMATCH", f"cannot build {t} from {a.type}", e.loc)
        total = sum(component_count(a.type) for a in args)
        need = component_count(t)
        if len(args) == 1 and args[0].type.is_scalarlike and need > 1:
            return self.convert(self.convert(args[0], scalar(t.base)), t)
        if total != need:
            self.fail("E_TYPE_MISMATCH", f"{t} needs {need} components, got {total}", e.loc)
        conv = tuple(self.convert(a, a.type.with_base(t.base)) for a in args)
        if t.is_scalar:
            return self.convert(conv[0], t)
        return T.TConstruct(t, conv, e.loc)

    def e_Cast(self, e):
        t = self.resolve_type(e.type_name, (), e.loc)
        a = self.expr(e.operand)
        if not castable(a.type, t):
            self.fail("E_TYPE_MISMATCH", f"cannot cast {a.type} to {t}", e.loc)
        if a.type == t:
            return a
        src = a.type
        if same_shape(src, t):
            return T.TConvert(t, a, e.loc)
        if src.is_scalarlike and t.kind in (VECTOR, MATRIX):
            return self.convert(T.TConvert(scalar(t.base), a, e.loc) if src != scalar(t.base) else a, t)
        n = t.width
        sw_t = scalar(src.base) if n == 1 else vector(src.base, n)
        sw = T.TSwizzle(sw_t, a, tuple(range(n)), e.loc)
        return sw if sw_t == t else T.TConvert(t, sw, e.loc)


def check(tree: ast.SyntaxTree, entry: str) -> T.TypedTree:
    """Type-check ``tree`` and return the typed tree rooted at function ``entry``."""
    checker = Checker(tree)
    typed = checker.run(entry)
    typed.struct_semantics = checker.struct_semantics
    return typed
