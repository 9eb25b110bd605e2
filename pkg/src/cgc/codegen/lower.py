"""Lower a typed tree to straight-line IR by symbolic execution.

Every basic value is a tuple of components. A component is either a ``Ref``
to one lane of a register or a Python number, so constant subexpressions fold
as a side effect of evaluation. Calls are inlined, loops unrolled and
constant ``if`` statements resolved while executing.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..diagnostics import NOWHERE, CompileError
from ..numeric import f32, saturate_fixed
from ..sema import tree as T
from ..types import ARRAY, FIXED_MAX, FIXED_MIN, MATRIX, RECORD, SAMPLER, SCALAR, VECTOR, Type
from ..vm.cginterp import binary
from ..vm.state import convert_array, dtype_of
from .ir import (CONST, IDENTITY, INPUT, OUTPUT, POOL, TEMP, Dst, Instruction, IRProgram, Reg,
                 Src, pool_source)

UNROLL_LIMIT = 4096


@dataclass(frozen=True)
class Ref:
    reg: Reg
    lane: int
    neg: bool = False

    def negated(self) -> "Ref":
        return Ref(self.reg, self.lane, not self.neg)


@dataclass(frozen=True)
class Sampler:
    unit: int
    dim: str


def is_const(c) -> bool:
    return not isinstance(c, Ref)


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class _Break(Exception):
    pass


class _Continue(Exception):
    pass


class _Halt(Exception):
    """Unconditional discard: nothing after it executes."""


def _fail(code, msg, loc=NOWHERE):
    raise CompileError.single(code, msg, loc)


def _comps_of_const(value: np.ndarray) -> tuple:
    return tuple(x.item() for x in np.asarray(value).reshape(-1))


def _blank(t: Type):
    if t.kind == ARRAY:
        return [_blank(t.elem) for _ in range(t.length)]
    if t.kind == RECORD:
        return {n: _blank(ft) for n, ft in t.fields}
    if t.kind == SAMPLER:
        return None
    n = int(np.prod(t.shape)) if t.shape else 1
    return [None] * n


class Lowering:
    def __init__(self, tree: T.TypedTree, bindings, profile):
        self.tree = tree
        self.bindings = bindings
        self.profile = profile
        self.code: list = []
        self.pool: list = []
        self.ntemps = 0
        self.frames = [{}]
        self.globals = {}
        self.materialized: dict = {}
        self.iterations = 0

    # -- emission helpers ------------------------------------------------
    def fresh(self) -> Reg:
        r = Reg(TEMP, self.ntemps)
        self.ntemps += 1
        return r

    def constant(self, values: tuple) -> Src:
        """Pool operand providing ``values`` in swizzle positions 0..n-1."""
        src = pool_source(self.pool, dict(enumerate(values)))
        n = len(values)
        return Src(src.reg, src.swizzle[:n] + (src.swizzle[n - 1],) * (4 - n))

    def operand(self, comps: tuple) -> Src:
        """An instruction source whose positions 0..n-1 hold ``comps``."""
        comps = tuple(comps)
        if all(is_const(c) for c in comps):
            return self.constant(comps)
        first = comps[0]
        if all(isinstance(c, Ref) and c.reg == first.reg and c.neg == first.neg for c in comps):
            swz = [c.lane for c in comps]
            return Src(first.reg, tuple(swz + [swz[-1]] * (4 - len(swz))), first.neg)
        key = comps
        if key in self.materialized:
            return self.materialized[key]
        t = self.fresh()
        groups: dict = {}
        for lane, c in enumerate(comps):
            gk = "const" if is_const(c) else (c.reg, c.neg)
            groups.setdefault(gk, []).append(lane)
        for gk, lanes in groups.items():
            if gk == "const":
                src = self.constant(tuple(comps[i] for i in lanes))
                # positions of src line up with the sorted lanes
                swz = [0] * 4
                for pos, lane in enumerate(lanes):
                    swz[lane] = src.swizzle[pos]
                src = Src(src.reg, tuple(swz))
            else:
                reg, neg = gk
                swz = [0] * 4
                for lane in lanes:
                    swz[lane] = comps[lane].lane
                src = Src(reg, tuple(swz), neg)
            self.code.append(Instruction("MOV", Dst(t, tuple(lanes)), (src,)))
        out = Src(t, IDENTITY)
        self.materialized[key] = out
        return out

    def op(self, opcode: str, n: int, *args: tuple, **tex) -> tuple:
        """Emit a component-wise opcode over ``n`` lanes; returns result components."""
        t = self.fresh()
        srcs = tuple(self.operand(a) for a in args)
        self.code.append(Instruction(opcode, Dst(t, tuple(range(n))), srcs, **tex))
        return tuple(Ref(t, i) for i in range(n))

    def chunked(self, opcode: str, *args: tuple) -> tuple:
        """Component-wise op over any number of components, four lanes at a time."""
        n = len(args[0])
        out = ()
        for start in range(0, n, 4):
            part = [a[start:start + 4] for a in args]
            out += self.op(opcode, len(part[0]), *part)
        return out

    def replicated(self, opcode: str, args: tuple) -> tuple:
        """Scalar opcode (RSQ/LG2/RCP) applied per component, one instruction each."""
        out = []
        for c in args:
            out.append(self.op(opcode, 1, (c,))[0])
        return tuple(out)

    # -- storage -------------------------------------------------------
    def lookup(self, sym):
        for scope in (self.frames[-1], self.globals):
            if sym in scope:
                return scope
        _fail("E_UNSUPPORTED", f"no storage for '{sym.name}'")

    def path(self, e):
        """(scope, sym, steps) of an lvalue-shaped expression, else None."""
        if isinstance(e, T.TVar):
            return self.lookup(e.sym), e.sym, []
        if isinstance(e, (T.TSwizzle, T.TMatElem, T.TIndex, T.TField)):
            base = self.path(e.operand)
            if base is None:
                return None
            scope, sym, steps = base
            return scope, sym, steps + [self.step(e)]
        return None

    def step(self, e):
        ot = e.operand.type
        if isinstance(e, T.TField):
            return ("item", e.name)
        if isinstance(e, T.TIndex):
            idx = self.expr(e.index)
            if not is_const(idx[0]):
                _fail("E_VARIABLE_INDEX", f"index is not a compile-time constant in {self.profile.name}", e.loc)
            i = int(idx[0])
            if ot.kind == ARRAY:
                if not 0 <= i < ot.length:
                    _fail("E_TYPE_MISMATCH", f"index {i} out of range for {ot}", e.loc)
                return ("item", i)
            n = ot.rows if ot.kind == MATRIX else ot.width
            if not 0 <= i < n:
                _fail("E_TYPE_MISMATCH", f"index {i} out of range for {ot}", e.loc)
            if ot.kind == MATRIX:
                return ("pos", tuple(i * ot.cols + c for c in range(ot.cols)))
            return ("pos", (i,))
        if isinstance(e, T.TMatElem):
            return ("pos", (e.row * ot.cols + e.col,))
        # swizzle
        return ("pos", tuple(e.comps))

    @staticmethod
    def _apply_pos(positions, steps):
        for _, sel in steps:
            positions = [positions[i] for i in sel] if positions is not None else list(sel)
        return positions

    def read_path(self, scope, sym, steps, loc):
        node = scope[sym]
        k = 0
        while k < len(steps) and steps[k][0] == "item":
            node = node[steps[k][1]]
            k += 1
        if k == len(steps):
            value = node
        else:
            pos = self._apply_pos(None, steps[k:])
            value = [node[p] for p in pos]
        self._check_init(value, sym, loc)
        return _freeze(value)

    def _check_init(self, value, sym, loc):
        if value is None:
            _fail("E_UNINITIALIZED", f"'{sym.name}' is read before it is assigned", loc)
        if isinstance(value, (list, tuple)):
            for v in value:
                self._check_init(v, sym, loc)
        elif isinstance(value, dict):
            for v in value.values():
                self._check_init(v, sym, loc)

    def write_path(self, scope, sym, steps, value):
        if not steps:
            scope[sym] = _store(value)
            return
        holder = scope
        key = sym
        k = 0
        while k < len(steps) and steps[k][0] == "item":
            holder = holder[key]
            key = steps[k][1]
            k += 1
        if k == len(steps):
            holder[key] = _store(value)
            return
        leaf = holder[key]
        pos = self._apply_pos(None, steps[k:])
        for p, v in zip(pos, value):
            leaf[p] = v

    # -- expressions -----------------------------------------------------
    def expr(self, e):
        return getattr(self, "x_" + type(e).__name__)(e)

    def x_TConst(self, e):
        return _comps_of_const(e.value)

    def _access(self, e):
        p = self.path(e)
        if p is not None:
            return _freeze(self.read_path(*p, e.loc))
        base = self.expr(e.operand)
        st = self.step(e)
        if st[0] == "item":
            return base[st[1]]
        return tuple(base[i] for i in st[1])

    x_TVar = x_TSwizzle = x_TMatElem = x_TIndex = x_TField = _access

    def fold(self, op, base, *args):
        arrays = [np.asarray(a, dtype=dtype_of(base)) for a in args]
        return _comps_of_const(binary(op, *arrays, base))

    def saturate(self, comps: tuple) -> tuple:
        if all(is_const(c) for c in comps):
            return _comps_of_const(saturate_fixed(np.asarray(comps, dtype=f32)))
        lo = self.chunked("MAX", comps, (FIXED_MIN,) * len(comps))
        return self.chunked("MIN", lo, (float(f32(FIXED_MAX)),) * len(comps))

    def convert(self, comps: tuple, src: str, dst: str, loc) -> tuple:
        if src == dst:
            return comps
        if all(is_const(c) for c in comps):
            return _comps_of_const(convert_array(np.asarray(comps, dtype=dtype_of(src)), dst))
        if dst == "bool":
            return self.compare("!=", comps, (0.0,) * len(comps))
        if dst == "int" and src != "bool":
            _fail("E_UNSUPPORTED", "conversion of a run-time value to int needs truncation, "
                  f"which {self.profile.name} does not provide", loc)
        if dst == "fixed" and src not in ("bool",):
            return self.saturate(comps)
        return comps

    def x_TConvert(self, e):
        return self.convert(self.expr(e.operand), e.operand.type.base, e.type.base, e.loc)

    def x_TSmear(self, e):
        c = self.expr(e.operand)
        n = int(np.prod(e.type.shape))
        return (c[0],) * n

    def x_TConstruct(self, e):
        out = ()
        for a in e.args:
            out += tuple(self.expr(a))
        return out

    def x_TUnary(self, e):
        v = self.expr(e.operand)
        base = e.type.base
        if e.op == "+":
            return v
        if e.op == "!":
            if all(is_const(c) for c in v):
                return tuple(not c for c in v)
            return self.chunked("ADD", (1.0,) * len(v), tuple(_neg(c) for c in v))
        if all(is_const(c) for c in v):
            out = _comps_of_const(-np.asarray(v, dtype=dtype_of(base)))
            return self.saturate(out) if base == "fixed" else out
        out = tuple(_neg(c) for c in v)
        return self.saturate(out) if base == "fixed" else out

    def compare(self, op, a, b):
        n = len(a)
        if all(is_const(c) for c in a + b):
            return tuple(bool(x) for x in self.fold(op, "float", a, b))
        if op == "<":
            return self.chunked("SLT", a, b)
        if op == ">":
            return self.chunked("SLT", b, a)
        if op == ">=":
            return self.chunked("SGE", a, b)
        if op == "<=":
            return self.chunked("SGE", b, a)
        ge = self.chunked("SGE", a, b)
        le = self.chunked("SGE", b, a)
        eq = self.chunked("MUL", ge, le)
        if op == "==":
            return eq
        return self.chunked("ADD", (1.0,) * n, tuple(_neg(c) for c in eq))

    def arith(self, op, a, b, base, loc):
        if all(is_const(c) for c in a + b):
            try:
                return self.fold(op, base, a, b)
            except Exception as exc:  # integer division by zero
                _fail("E_TYPE_MISMATCH", f"constant expression cannot be evaluated: {exc}", loc)
        if op == "+":
            out = self.chunked("ADD", a, b)
        elif op == "-":
            out = self.chunked("ADD", a, tuple(_neg(c) for c in b))
        elif op == "*":
            out = self.chunked("MUL", a, b)
        elif op == "/" and base not in ("int", "bool"):
            if all(is_const(c) and _pow2(c) for c in b):
                # a / 2^k and a * 2^-k round the same real number
                out = self.chunked("MUL", a, tuple(float(f32(1.0) / f32(c)) for c in b))
            else:
                out = self.chunked("MUL", a, self.replicated("RCP", b))
        else:
            _fail("E_UNSUPPORTED", f"operator '{op}' on run-time {base} values is not supported "
                  f"by {self.profile.name}", loc)
        return self.saturate(out) if base == "fixed" else out

    def x_TBinary(self, e):
        a, b = self.expr(e.left), self.expr(e.right)
        op = e.op
        if op in ("<", ">", "<=", ">=", "==", "!="):
            return self.compare(op, a, b)
        if op in ("&&", "||"):
            if all(is_const(c) for c in a + b):
                return tuple(bool(x) for x in self.fold(op, "bool", a, b))
            return self.chunked("MUL" if op == "&&" else "MAX", a, b)
        return self.arith(op, a, b, e.type.base, e.loc)

    def select(self, c, a, b):
        if all(is_const(x) for x in c):
            return tuple(ai if ci else bi for ci, ai, bi in zip(c, a, b))
        if all(is_const(x) for x in a + b) and all(ai == bi for ai, bi in zip(a, b)):
            return a
        ca = self.chunked("MUL", c, a)
        inv = self.chunked("ADD", (1.0,) * len(c), tuple(_neg(x) for x in c))
        out = ()
        for start in range(0, len(c), 4):
            sl = slice(start, start + 4)
            out += self.op("MAD", len(inv[sl]), inv[sl], b[sl], ca[sl])
        return out

    def x_TSelect(self, e):
        c = self.expr(e.cond)
        a, b = self.expr(e.then), self.expr(e.other)
        if not e.type.is_basic:
            if all(is_const(x) for x in c):
                return a if c[0] else b
            _fail("E_NEEDS_BRANCHING", "selecting between aggregates needs branching", e.loc)
        n = len(a)
        if len(c) == 1:
            c = c * n
        return self.select(c, a, b)

    def x_TComma(self, e):
        self.expr(e.left)
        return self.expr(e.right)

    def x_TAssign(self, e):
        value = self.expr(e.value)
        p = self.path(e.target)
        if e.op != "=":
            old = self.read_path(*p, e.loc)
            value = self.arith(e.op[:-1], tuple(old), tuple(value), e.type.base, e.loc)
        self.write_path(*p, value)
        return _freeze(value)

    def x_TIncDec(self, e):
        p = self.path(e.target)
        old = tuple(self.read_path(*p, e.loc))
        one = _comps_of_const(np.ones(len(old), dtype=dtype_of(e.type.base)))
        new = self.arith("+" if e.op == "++" else "-", old, one, e.type.base, e.loc)
        self.write_path(*p, new)
        return new if e.prefix else old

    # -- calls -----------------------------------------------------------
    def x_TCall(self, e):
        if e.func is None:
            return self.builtin(e)
        fn = e.func
        frame, writeback = {}, []
        for p, a in zip(fn.params, e.args):
            if p.qualifier == "out":
                writeback.append((p, self.path(a)))
                frame[p] = _blank(p.type)
            elif p.qualifier == "inout":
                path = self.path(a)
                writeback.append((p, path))
                frame[p] = _store(self.read_path(*path, a.loc))
            else:
                frame[p] = _store(self.expr(a))
        self.frames.append(frame)
        result = None
        try:
            self.stmt(fn.body)
        except _Return as r:
            result = r.value
        finally:
            self.frames.pop()
        for p, path in writeback:
            self.write_path(*path, _freeze(frame[p]))
        return result

    def builtin(self, e):
        key = e.sig.key
        args = [self.expr(a) for a in e.args]
        if key == "mul_mv":
            m, v = e.args[0].type, args[1]
            rows = [args[0][r * m.cols:(r + 1) * m.cols] for r in range(m.rows)]
            return self.dots(rows, v)
        if key == "mul_vm":
            m, v = e.args[1].type, args[0]
            cols = [tuple(args[1][r * m.cols + c] for r in range(m.rows)) for c in range(m.cols)]
            return self.dots(cols, v)
        if key == "mul_mm":
            a_t, b_t = e.args[0].type, e.args[1].type
            cols = [tuple(args[1][r * b_t.cols + c] for r in range(b_t.rows)) for c in range(b_t.cols)]
            out = ()
            for i in range(a_t.rows):
                out += self.dots(cols, args[0][i * a_t.cols:(i + 1) * a_t.cols])
            return out
        if key == "dot":
            return self.dots([args[0]], args[1])
        if key == "abs":
            v = args[0]
            if all(is_const(c) for c in v):
                return tuple(abs(c) for c in v)
            return self.chunked("MAX", v, tuple(_neg(c) for c in v))
        if key in ("rsqrt", "log2"):
            v = args[0]
            if all(is_const(c) for c in v):
                from ..stdlib import eval_builtin
                return _comps_of_const(eval_builtin(e.sig, [np.asarray(v, dtype=f32).reshape(e.sig.ret.shape)]))
            return self.replicated("RSQ" if key == "rsqrt" else "LG2", v)
        if key == "reflect":
            i, n = args
            d = self.dots([n], i)
            t2 = self.arith("*", (2.0,), d, "float", e.loc)
            s = self.arith("*", t2 * 3, n, "float", e.loc)
            return self.arith("-", i, s, "float", e.loc)
        if key in ("tex2D", "tex2Dproj", "tex3Dproj", "texCUBE"):
            sampler = args[0]
            opcode = "TXP" if key.endswith("proj") else "TEX"
            target = {"tex2D": "2D", "tex2Dproj": "2D", "tex3Dproj": "3D", "texCUBE": "CUBE"}[key]
            return self.op(opcode, 4, tuple(args[1]), unit=sampler.unit, target=target)
        _fail("E_UNSUPPORTED", f"builtin '{e.sig.name}' has no lowering", e.loc)

    def dots(self, rows, v) -> tuple:
        """One dot product per row of ``rows`` with ``v``, gathered into one temp."""
        v = tuple(v)
        n = len(v)
        if all(is_const(c) for r in rows for c in r) and all(is_const(c) for c in v):
            from ..numeric import dot32
            return tuple(float(dot32(np.asarray(r, dtype=f32), np.asarray(v, dtype=f32))) for r in rows)
        if n == 1:
            return tuple(self.arith("*", r, v, "float", NOWHERE)[0] for r in rows)
        t = self.fresh()
        opcode = "DP4" if n == 4 else "DP3"
        for lane, r in enumerate(rows):
            r = tuple(r)
            if n == 2:
                # both z lanes are zero so DP3 never reads an unset or non-finite lane
                a, b = self.operand(r + (0.0,)), self.operand(v + (0.0,))
            else:
                a, b = self.operand(r), self.operand(v)
            self.code.append(Instruction(opcode, Dst(t, (lane,)), (a, b)))
        return tuple(Ref(t, i) for i in range(len(rows)))

    # -- statements ------------------------------------------------------
    def stmt(self, s):
        if isinstance(s, T.TBlock):
            for sub in s.stmts:
                self.stmt(sub)
        elif isinstance(s, T.TDecl):
            self.frames[-1][s.sym] = _store(self.expr(s.init)) if s.init is not None else _blank(s.sym.type)
        elif isinstance(s, T.TExprStmt):
            self.expr(s.expr)
        elif isinstance(s, T.TIf):
            c = self.expr(s.cond)
            if is_const(c[0]):
                if c[0]:
                    self.stmt(s.then)
                elif s.other is not None:
                    self.stmt(s.other)
            elif s.other is None and _discard_only(s.then):
                self.kill(self.operand((_neg(c[0]),)))
            else:
                _fail("E_NEEDS_BRANCHING", f"condition is not a compile-time constant; "
                      f"{self.profile.name} has no branching", s.loc)
        elif isinstance(s, T.TFor):
            if s.init is not None:
                self.stmt(s.init)
            self.loop(s.cond, s.body, s.step, s.loc, True)
        elif isinstance(s, T.TWhile):
            self.loop(s.cond, s.body, None, s.loc, True)
        elif isinstance(s, T.TDo):
            self.loop(s.cond, s.body, None, s.loc, False)
        elif isinstance(s, T.TReturn):
            raise _Return(None if s.value is None else _freeze(self.expr(s.value)))
        elif isinstance(s, T.TBreak):
            raise _Break()
        elif isinstance(s, T.TContinue):
            raise _Continue()
        elif isinstance(s, T.TDiscard):
            self.kill(self.constant((-1.0,)))
            raise _Halt()
        else:
            _fail("E_UNSUPPORTED", f"cannot lower {type(s).__name__}")

    def kill(self, src: Src):
        if self.profile.is_vertex:
            _fail("E_DISCARD_IN_VERTEX", f"discard is not allowed in {self.profile.name}")
        self.code.append(Instruction("KIL", None, (Src(src.reg, (src.swizzle[0],) * 4, src.negate),)))

    def test(self, cond, loc) -> bool:
        if cond is None:
            return True
        c = self.expr(cond)
        if not is_const(c[0]):
            _fail("E_NEEDS_BRANCHING", f"loop condition is not a compile-time constant; "
                  f"{self.profile.name} has no branching", loc)
        return bool(c[0])

    def loop(self, cond, body, step, loc, test_first):
        first = True
        while (not test_first and first) or self.test(cond, loc):
            first = False
            self.iterations += 1
            if self.iterations > UNROLL_LIMIT:
                _fail("E_NEEDS_BRANCHING", f"loop needs more than {UNROLL_LIMIT} unrolled iterations", loc)
            try:
                self.stmt(body)
            except _Break:
                return
            except _Continue:
                pass
            if step is not None:
                self.expr(step)

    # -- program -----------------------------------------------------------
    def bind_entry(self):
        from ..profiles import entry_interface, entry_uniforms
        b = self.bindings
        for sym in entry_uniforms(self.tree):
            scope = self.globals if sym.kind == "global" else self.frames[-1]
            scope[sym] = self.uniform_storage((sym.name,), sym.type)
        for d in self.tree.globals:
            if d.sym.is_uniform:
                continue
            if d.init is not None:
                self.globals[d.sym] = _store(self.expr(d.init))
            else:
                self.globals[d.sym] = self.zero_storage(d.sym.type)
        inputs, _ = entry_interface(self.tree)
        entry = self.tree.entry
        for p in entry.params:
            if p not in self.frames[-1]:
                self.frames[-1][p] = _blank(p.type)
        for v in inputs:
            vb = b.input_for(v.path)
            sym = next(p for p in entry.params if p.name == v.path[0])
            n = int(np.prod(v.type.shape)) if v.type.shape else 1
            comps = tuple(Ref(Reg(INPUT, vb.register), i) for i in range(n))
            self.write_path(self.frames[-1], sym, [("item", k) for k in v.path[1:]], comps)

    def zero_storage(self, t: Type):
        if t.kind == ARRAY:
            return [self.zero_storage(t.elem) for _ in range(t.length)]
        if t.kind == RECORD:
            return {n: self.zero_storage(ft) for n, ft in t.fields}
        n = int(np.prod(t.shape)) if t.shape else 1
        return list(_comps_of_const(np.zeros(n, dtype=dtype_of(t.base))))

    def uniform_storage(self, path, t: Type):
        if t.kind == ARRAY:
            return [self.uniform_storage(path + (i,), t.elem) for i in range(t.length)]
        if t.kind == RECORD:
            return {n: self.uniform_storage(path + (n,), ft) for n, ft in t.fields}
        if t.kind == SAMPLER:
            return Sampler(self.bindings.sampler_for(path).unit, t.sampler_dim)
        ub = self.bindings.uniform_for(path)
        if t.kind == MATRIX:
            return [Ref(Reg(CONST, ub.register + r), c) for r in range(t.rows) for c in range(t.cols)]
        n = t.width
        return [Ref(Reg(CONST, ub.register), i) for i in range(n)]

    def outputs(self, ret):
        from ..profiles import entry_interface
        _, outs = entry_interface(self.tree)
        entry = self.tree.entry
        for v in outs:
            ob = self.bindings.output_for(v.path)
            if v.path[0] == "return":
                node = ret
                for k in v.path[1:]:
                    node = node[k]
                comps = tuple(node)
            else:
                sym = next(p for p in entry.params if p.name == v.path[0])
                comps = tuple(self.read_path(self.frames[-1], sym, [("item", k) for k in v.path[1:]], v.loc))
            self.store_output(Reg(OUTPUT, ob.register), comps)

    def store_output(self, reg: Reg, comps: tuple):
        groups: dict = {}
        for lane, c in enumerate(comps):
            gk = "const" if is_const(c) else (c.reg, c.neg)
            groups.setdefault(gk, []).append(lane)
        for gk, lanes in groups.items():
            if gk == "const":
                src = self.constant(tuple(comps[i] for i in lanes))
                swz = [0] * 4
                for pos, lane in enumerate(lanes):
                    swz[lane] = src.swizzle[pos]
                src = Src(src.reg, tuple(swz))
            else:
                swz = [0] * 4
                for lane in lanes:
                    swz[lane] = comps[lane].lane
                src = Src(gk[0], tuple(swz), gk[1])
            self.code.append(Instruction("MOV", Dst(reg, tuple(lanes)), (src,)))

    def run(self) -> IRProgram:
        self.bind_entry()
        ret = None
        try:
            self.stmt(self.tree.entry.body)
        except _Return as r:
            ret = r.value
        except _Halt:
            return IRProgram(self.code, self.pool, self.bindings, self.profile)
        self.outputs(ret)
        return IRProgram(self.code, self.pool, self.bindings, self.profile)


def _neg(c):
    if isinstance(c, Ref):
        return c.negated()
    if isinstance(c, bool):
        return -float(c)
    return -c if not isinstance(c, float) else float(-f32(c))


def _pow2(c) -> bool:
    v = f32(c)
    if not np.isfinite(v) or v == 0:
        return False
    mant, exp = np.frexp(v)
    return abs(float(mant)) == 0.5 and np.isfinite(f32(1.0) / v) and -125 <= exp <= 126


def _store(value):
    """Mutable storage copy of a value (lists for components and arrays)."""
    if isinstance(value, dict):
        return {k: _store(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        if value and isinstance(value[0], (list, tuple, dict)):
            return [_store(v) for v in value]
        return list(value)
    return value


def _freeze(value):
    if isinstance(value, dict):
        return {k: _freeze(v) for k, v in value.items()}
    if isinstance(value, list):
        if value and isinstance(value[0], (list, dict)):
            return [_freeze(v) for v in value]
        return tuple(value)
    return value


def _discard_only(s) -> bool:
    while isinstance(s, T.TBlock) and len(s.stmts) == 1:
        s = s.stmts[0]
    return isinstance(s, T.TDiscard)


def lower(tree: T.TypedTree, bindings, profile) -> IRProgram:
    return Lowering(tree, bindings, profile).run()
