"""Definite-assignment and return-path analysis over one typed function.

State maps each tracked symbol to the set of components known to be written.
Vectors and scalars are tracked per component; anything else is tracked as a
whole (component 0), and a partial write such as ``s.field = x`` counts as a
full write. ``None`` stands for unreachable code and is the identity of join.
"""
from __future__ import annotations

from typing import Optional

from ..diagnostics import Diagnostic, error
from ..types import SCALAR, VECTOR, VOID
from . import tree as T


def _slots(sym: T.Symbol) -> frozenset:
    t = sym.type
    if t.kind == VECTOR:
        return frozenset(range(t.cols))
    return frozenset({0})


def _join(a: Optional[dict], b: Optional[dict]) -> Optional[dict]:
    if a is None:
        return b
    if b is None:
        return a
    return {k: a[k] & b[k] for k in a.keys() & b.keys()}


def _has_jump(stmt) -> bool:
    """break/continue belonging to this loop body (not to a nested loop)."""
    if isinstance(stmt, (T.TBreak, T.TContinue)):
        return True
    if isinstance(stmt, (T.TFor, T.TWhile, T.TDo)):
        return False
    return any(_has_jump(c) for c in T.children(stmt) if isinstance(c, T.TStmt))


def _const_true(cond, init) -> bool:
    """``for (int i = K; i OP L; ...)`` whose first test is statically true."""
    if not (isinstance(init, T.TDecl) and isinstance(init.init, T.TConst)):
        return False
    if not (isinstance(cond, T.TBinary) and isinstance(cond.right, T.TConst)):
        return False
    left = cond.left
    while isinstance(left, T.TConvert):
        left = left.operand
    if not (isinstance(left, T.TVar) and left.sym is init.sym):
        return False
    a, b = float(init.init.value), float(cond.right.value)
    return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b,
            "!=": a != b, "==": a == b}.get(cond.op, False)


class _Flow:
    def __init__(self, fn: T.TFunction):
        self.fn = fn
        self.diags: list = []
        self.reported: set = set()
        self.outs = [p for p in fn.params if p.qualifier == "out"]

    def report(self, code, msg, loc, key):
        if key not in self.reported:
            self.reported.add(key)
            self.diags.append(error(code, msg, loc))

    # -- expressions ---------------------------------------------------
    def need(self, st, sym, comps, loc):
        if st is None or sym not in st:
            return
        missing = comps - st[sym]
        if missing:
            self.report("E_UNINITIALIZED", f"'{sym.name}' may be read before it is assigned",
                        loc, ("uninit", sym.uid))

    def write(self, st, target):
        """Mark the root variable of an lvalue as (partially) written."""
        if st is None:
            return
        comps = None  # swizzle composed down to the root, or "full"
        node = target
        while not isinstance(node, T.TVar):
            if isinstance(node, T.TSwizzle) and comps != "full":
                comps = node.comps if comps is None else tuple(node.comps[c] for c in comps)
            else:
                comps = "full"
            node = node.operand
        sym = node.sym
        if sym not in st:
            return
        if comps is None or comps == "full" or sym.type.kind not in (VECTOR, SCALAR):
            st[sym] = _slots(sym)
        else:
            st[sym] = st[sym] | frozenset(comps)

    def lvalue_reads(self, st, target):
        """Index expressions inside an lvalue are reads."""
        node = target
        while not isinstance(node, T.TVar):
            if isinstance(node, T.TIndex):
                self.expr(st, node.index)
            node = node.operand

    def read_lvalue(self, st, target):
        self.lvalue_reads(st, target)
        self.read(st, target)

    def read(self, st, e):
        """A read of a (possibly swizzled) variable reference."""
        comps = None
        node = e
        while isinstance(node, T.TSwizzle):
            comps = node.comps if comps is None else tuple(node.comps[c] for c in comps)
            node = node.operand
        if isinstance(node, T.TVar):
            sym = node.sym
            if comps is not None and sym.type.kind in (VECTOR, SCALAR):
                self.need(st, sym, frozenset(comps), node.loc)
            else:
                self.need(st, sym, _slots(sym), node.loc)
            return True
        return False

    def expr(self, st, e):
        if e is None or st is None:
            return
        if isinstance(e, (T.TVar, T.TSwizzle)) and self.read(st, e):
            return
        if isinstance(e, (T.TField, T.TIndex, T.TMatElem)):
            root = e
            while isinstance(root, (T.TField, T.TIndex, T.TMatElem, T.TSwizzle)):
                if isinstance(root, T.TIndex):
                    self.expr(st, root.index)
                root = root.operand
            if isinstance(root, T.TVar):
                self.need(st, root.sym, _slots(root.sym), root.loc)
            else:
                self.expr(st, root)
            return
        if isinstance(e, T.TAssign):
            self.expr(st, e.value)
            if e.op != "=":
                self.read_lvalue(st, e.target)
            else:
                self.lvalue_reads(st, e.target)
            self.write(st, e.target)
            return
        if isinstance(e, T.TIncDec):
            self.read_lvalue(st, e.target)
            self.write(st, e.target)
            return
        if isinstance(e, T.TCall):
            for a, (_, q) in zip(e.args, e.sig.params):
                if q == "out":
                    self.lvalue_reads(st, a)
                elif q == "inout":
                    self.read_lvalue(st, a)
                else:
                    self.expr(st, a)
            for a, (_, q) in zip(e.args, e.sig.params):
                if q in ("out", "inout"):
                    self.write(st, a)
            return
        if isinstance(e, T.TSelect):
            self.expr(st, e.cond)
            a, b = dict(st), dict(st)
            self.expr(a, e.then)
            self.expr(b, e.other)
            st.clear()
            st.update(_join(a, b))
            return
        for c in T.children(e):
            self.expr(st, c)

    # -- statements ----------------------------------------------------
    def check_outs(self, st, loc):
        for p in self.outs:
            if p in st and st[p] != _slots(p):
                self.report("E_OUT_UNASSIGNED",
                            f"out parameter '{p.name}' is not assigned on every path", loc,
                            ("out", p.uid))

    def stmt(self, st, s) -> Optional[dict]:
        if st is None:
            return None
        if isinstance(s, T.TBlock):
            for sub in s.stmts:
                st = self.stmt(st, sub)
            return st
        st = dict(st)
        if isinstance(s, T.TDecl):
            if s.init is not None:
                self.expr(st, s.init)
            st[s.sym] = _slots(s.sym) if s.init is not None else frozenset()
            return st
        if isinstance(s, T.TExprStmt):
            self.expr(st, s.expr)
            return st
        if isinstance(s, T.TIf):
            self.expr(st, s.cond)
            a = self.stmt(st, s.then)
            b = self.stmt(st, s.other) if s.other is not None else st
            return _join(a, b)
        if isinstance(s, T.TWhile):
            self.expr(st, s.cond)
            self.stmt(st, s.body)
            return st
        if isinstance(s, T.TDo):
            after = self.stmt(st, s.body)
            if _has_jump(s.body):
                return st
            if after is None:
                return None
            self.expr(after, s.cond)
            return after
        if isinstance(s, T.TFor):
            if s.init is not None:
                st = self.stmt(st, s.init)
            self.expr(st, s.cond)
            body = self.stmt(st, s.body)
            if body is not None and s.step is not None:
                body = dict(body)
                self.expr(body, s.step)
            if _const_true(s.cond, s.init) and not _has_jump(s.body) and body is not None:
                return body
            return st
        if isinstance(s, (T.TBreak, T.TContinue)):
            return None
        if isinstance(s, T.TReturn):
            self.expr(st, s.value)
            self.check_outs(st, s.loc)
            return None
        if isinstance(s, T.TDiscard):
            return None
        raise TypeError(f"unknown statement {type(s).__name__}")

    def run(self) -> list:
        st = {p: frozenset() for p in self.outs}
        end = self.stmt(st, self.fn.body)
        if end is not None:
            if self.fn.sig.ret.kind != VOID:
                self.report("E_MISSING_RETURN",
                            f"function '{self.fn.name}' can reach its end without returning a value",
                            self.fn.loc, ("ret",))
            else:
                self.check_outs(end, self.fn.loc)
        return self.diags


def check_flow(fn: T.TFunction) -> list[Diagnostic]:
    """Diagnostics for uninitialized reads, unassigned outs and missing returns."""
    return _Flow(fn).run()
