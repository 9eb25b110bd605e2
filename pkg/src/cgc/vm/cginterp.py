"""Direct interpreter for the typed tree; the semantic oracle for codegen."""
from __future__ import annotations

import copy

import numpy as np

from .. import stdlib
from ..numeric import f32, saturate_fixed
from ..profiles import entry_interface, entry_uniforms
from ..sema import tree as T
from ..types import ARRAY, MATRIX, RECORD, SAMPLER, SCALAR, VECTOR, Type
from .state import ExecResult, ShadeInput, VMError, coerce_value, convert_array, dtype_of, pad_output

LOOP_LIMIT = 1 << 20


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class _Break(Exception):
    pass


class _Continue(Exception):
    pass


class _Discard(Exception):
    pass


def _blank(t: Type):
    """(value, init-mask) pair of an uninitialized variable of type ``t``."""
    if t.kind == ARRAY:
        pairs = [_blank(t.elem) for _ in range(t.length)]
        return [p[0] for p in pairs], [p[1] for p in pairs]
    if t.kind == RECORD:
        pairs = {n: _blank(ft) for n, ft in t.fields}
        return {n: p[0] for n, p in pairs.items()}, {n: p[1] for n, p in pairs.items()}
    if t.kind == SAMPLER:
        return None, np.array(False)
    return np.zeros(t.shape, dtype=dtype_of(t.base)), np.zeros(t.shape, dtype=bool)


def _full_mask(value):
    if isinstance(value, list):
        return [_full_mask(v) for v in value]
    if isinstance(value, dict):
        return {k: _full_mask(v) for k, v in value.items()}
    if isinstance(value, np.ndarray):
        return np.ones(value.shape, dtype=bool)
    return np.array(True)


def _all_set(mask) -> bool:
    if isinstance(mask, list):
        return all(_all_set(m) for m in mask)
    if isinstance(mask, dict):
        return all(_all_set(m) for m in mask.values())
    return bool(np.all(mask))


def _norm(value):
    """Numpy scalars become 0-d arrays so lanes can be addressed in place."""
    return np.array(value) if isinstance(value, np.generic) else value


class Var:
    __slots__ = ("sym", "value", "mask", "missing")

    def __init__(self, sym, value=None, mask=None, missing=""):
        self.sym = sym
        if value is None and mask is None:
            value, mask = _blank(sym.type)
        self.value, self.mask, self.missing = _norm(value), _norm(mask), missing


# An access path is a list of steps applied to a variable's value tree.
# ("item", i) indexes an array/record; ("pos", fn) selects ndarray positions.

def _select(pos: np.ndarray, node) -> np.ndarray:
    if isinstance(node, T.TSwizzle):
        return pos.reshape(-1)[list(node.comps)] if pos.ndim == 0 else pos[list(node.comps)]
    if isinstance(node, T.TMatElem):
        return pos[node.row, node.col]
    raise AssertionError(node)


class Interpreter:
    def __init__(self, tree: T.TypedTree, shade: ShadeInput):
        self.tree = tree
        self.shade = shade
        self.frames = [{}]
        self.globals = {}

    # -- variables -----------------------------------------------------
    def var(self, sym) -> Var:
        v = self.frames[-1].get(sym) or self.globals.get(sym)
        if v is None:
            raise VMError(f"variable '{sym.name}' has no storage")
        return v

    def access(self, e):
        """(Var or None, container, path steps) for an expression; None when not addressable."""
        if isinstance(e, T.TVar):
            return self.var(e.sym), []
        if isinstance(e, (T.TSwizzle, T.TMatElem, T.TIndex, T.TField)):
            base = self.access(e.operand)
            if base is None:
                return None
            var, steps = base
            if isinstance(e, T.TIndex):
                i = int(self.eval(e.index))
                n = e.operand.type.length if e.operand.type.kind == ARRAY else (
                    e.operand.type.rows if e.operand.type.kind == MATRIX else e.operand.type.width)
                if not 0 <= i < n:
                    raise VMError(f"index {i} out of range for {e.operand.type}")
                step = ("item", i) if e.operand.type.kind == ARRAY else ("pos", ("row", i))
            elif isinstance(e, T.TField):
                step = ("item", e.name)
            else:
                step = ("pos", e)
            return var, steps + [step]
        return None

    @staticmethod
    def _walk(tree, steps):
        node = tree
        k = 0
        while k < len(steps) and steps[k][0] == "item":
            node = node[steps[k][1]]
            k += 1
        return node, steps[k:]

    @staticmethod
    def _positions(shape, steps):
        pos = np.arange(int(np.prod(shape)) if shape else 1).reshape(shape)
        for _, s in steps:
            if isinstance(s, tuple):
                pos = pos[s[1]]
            else:
                pos = _select(pos, s)
        return pos

    def read(self, var: Var, steps, loc=None):
        value, rest = self._walk(var.value, steps)
        mask, _ = self._walk(var.mask, steps)
        if value is None or not isinstance(value, np.ndarray):
            if not _all_set(mask):
                self._uninit(var)
            return copy.deepcopy(value) if not isinstance(value, stdlib.SamplerValue) else value
        if not rest:
            if not np.all(mask):
                self._uninit(var)
            return value.copy()
        pos = self._positions(value.shape, rest)
        if not np.all(mask.reshape(-1)[pos]):
            self._uninit(var)
        return value.reshape(-1)[pos].copy()

    def _uninit(self, var: Var):
        if var.missing:
            raise VMError(var.missing)
        raise VMError(f"read of uninitialized '{var.sym.name}'")

    def write(self, var: Var, steps, value):
        if not steps:
            value = _norm(value)
            var.value, var.mask = copy.deepcopy(value), _full_mask(value)
            return
        holder_v, holder_m = var.value, var.mask
        k = 0
        while k < len(steps) and steps[k][0] == "item":
            key = steps[k][1]
            if k == len(steps) - 1:
                holder_v[key] = copy.deepcopy(_norm(value))
                holder_m[key] = _full_mask(value)
                return
            holder_v, holder_m = holder_v[key], holder_m[key]
            k += 1
        pos = self._positions(holder_v.shape, steps[k:])
        flat_v = holder_v.reshape(-1)
        flat_m = holder_m.reshape(-1)
        flat_v[pos] = np.asarray(value).astype(holder_v.dtype)
        flat_m[pos] = True

    # -- expressions ---------------------------------------------------
    def eval(self, e):
        return getattr(self, "x_" + type(e).__name__)(e)

    def x_TConst(self, e):
        return e.value.copy()

    def _read_expr(self, e):
        acc = self.access(e)
        if acc is not None:
            return self.read(*acc)
        # value-level access on a temporary
        base = self.eval(e.operand)
        if isinstance(e, T.TField):
            return base[e.name]
        if isinstance(e, T.TIndex):
            i = int(self.eval(e.index))
            if isinstance(base, list):
                return base[i]
            return base[i].copy()
        pos = self._positions(base.shape, [("pos", e)])
        return base.reshape(-1)[pos].copy()

    x_TVar = x_TSwizzle = x_TMatElem = x_TIndex = x_TField = _read_expr

    def x_TConvert(self, e):
        v = np.asarray(self.eval(e.operand))
        return convert_array(v, e.type.base).reshape(e.type.shape)

    def x_TSmear(self, e):
        v = np.asarray(self.eval(e.operand)).reshape(())
        return np.full(e.type.shape, v, dtype=dtype_of(e.type.base))

    def x_TConstruct(self, e):
        parts = [np.asarray(self.eval(a)).reshape(-1) for a in e.args]
        flat = np.concatenate(parts).astype(dtype_of(e.type.base))
        return flat.reshape(e.type.shape)

    def x_TUnary(self, e):
        v = self.eval(e.operand)
        if e.op == "!":
            return np.logical_not(v)
        if e.op == "+":
            return v
        with np.errstate(all="ignore"):
            out = np.negative(v)
        return saturate_fixed(out) if e.type.base == "fixed" else out

    def x_TBinary(self, e):
        a, b = self.eval(e.left), self.eval(e.right)
        return binary(e.op, a, b, e.left.type.base)

    def x_TSelect(self, e):
        c = self.eval(e.cond)
        a = self.eval(e.then)
        b = self.eval(e.other)
        return np.where(c, a, b).astype(a.dtype)

    def x_TComma(self, e):
        self.eval(e.left)
        return self.eval(e.right)

    def x_TAssign(self, e):
        value = self.eval(e.value)
        acc = self.access(e.target)
        if e.op != "=":
            old = self.read(*acc)
            value = binary(e.op[:-1], old, value, e.type.base)
        self.write(*acc, value)
        return np.asarray(value).copy() if isinstance(value, np.ndarray) else copy.deepcopy(value)

    def x_TIncDec(self, e):
        acc = self.access(e.target)
        old = self.read(*acc)
        one = np.ones_like(old)
        new = binary("+" if e.op == "++" else "-", old, one, e.type.base)
        self.write(*acc, new)
        return new if e.prefix else old

    def x_TCall(self, e):
        if e.func is None:
            args = [self.eval(a) for a in e.args]
            for a in args:
                if isinstance(a, stdlib.SamplerValue) and a.image is None:
                    raise VMError(f"no texture bound to unit {a.unit}")
            try:
                return stdlib.eval_builtin(e.sig, args)
            except ValueError as exc:
                raise VMError(str(exc)) from None
        fn = e.func
        frame, writeback = {}, []
        for p, a in zip(fn.params, e.args):
            if p.qualifier == "out":
                writeback.append((p, self.access(a)))
                frame[p] = Var(p)
            elif p.qualifier == "inout":
                acc = self.access(a)
                writeback.append((p, acc))
                val = self.read(*acc)
                frame[p] = Var(p, val, _full_mask(val))
            else:
                val = self.eval(a)
                frame[p] = Var(p, val, _full_mask(val))
        result = self.invoke(fn, frame)
        for p, acc in writeback:
            local = frame[p]
            self.write(*acc, self.read(local, []))
        return result

    def invoke(self, fn, frame):
        self.frames.append(frame)
        try:
            self.stmt(fn.body)
        except _Return as r:
            return r.value
        finally:
            self.frames.pop()
        return None

    # -- statements ----------------------------------------------------
    def stmt(self, s):
        if isinstance(s, T.TBlock):
            for sub in s.stmts:
                self.stmt(sub)
        elif isinstance(s, T.TDecl):
            if s.init is not None:
                val = self.eval(s.init)
                var = Var(s.sym, val, _full_mask(val))
            else:
                var = Var(s.sym)
            self.frames[-1][s.sym] = var
        elif isinstance(s, T.TExprStmt):
            self.eval(s.expr)
        elif isinstance(s, T.TIf):
            if bool(self.eval(s.cond)):
                self.stmt(s.then)
            elif s.other is not None:
                self.stmt(s.other)
        elif isinstance(s, T.TFor):
            if s.init is not None:
                self.stmt(s.init)
            self.loop(lambda: s.cond is None or bool(self.eval(s.cond)), s.body,
                      lambda: s.step is not None and self.eval(s.step), test_first=True)
        elif isinstance(s, T.TWhile):
            self.loop(lambda: bool(self.eval(s.cond)), s.body, lambda: None, test_first=True)
        elif isinstance(s, T.TDo):
            self.loop(lambda: bool(self.eval(s.cond)), s.body, lambda: None, test_first=False)
        elif isinstance(s, T.TReturn):
            raise _Return(None if s.value is None else self.eval(s.value))
        elif isinstance(s, T.TBreak):
            raise _Break()
        elif isinstance(s, T.TContinue):
            raise _Continue()
        elif isinstance(s, T.TDiscard):
            raise _Discard()
        else:
            raise VMError(f"cannot execute {type(s).__name__}")

    def loop(self, test, body, step, test_first):
        n = 0
        if not test_first:
            if self.iteration(body, step):
                return
        while test():
            n += 1
            if n > LOOP_LIMIT:
                raise VMError("loop iteration limit exceeded")
            if self.iteration(body, step):
                return

    def iteration(self, body, step) -> bool:
        """Run one body pass; True when the loop was left with break."""
        try:
            self.stmt(body)
        except _Break:
            return True
        except _Continue:
            pass
        step()
        return False


def binary(op: str, a, b, base: str):
    """Component-wise binary operator with C semantics on binary32 / int32 / bool data."""
    a, b = np.asarray(a), np.asarray(b)
    with np.errstate(all="ignore"):
        if op in ("<", ">", "<=", ">=", "==", "!="):
            return {"<": np.less, ">": np.greater, "<=": np.less_equal, ">=": np.greater_equal,
                    "==": np.equal, "!=": np.not_equal}[op](a, b)
        if op == "&&":
            return np.logical_and(a, b)
        if op == "||":
            return np.logical_or(a, b)
        if base == "int":
            a64, b64 = a.astype(np.int64), b.astype(np.int64)
            if op in ("/", "%"):
                if np.any(b64 == 0):
                    raise VMError("integer division by zero")
                q = np.trunc(a64 / b64).astype(np.int64)
                out = q if op == "/" else a64 - q * b64
            else:
                out = {"+": np.add, "-": np.subtract, "*": np.multiply}[op](a64, b64)
            return ((out + 2**31) % 2**32 - 2**31).astype(np.int32)
        a, b = a.astype(f32), b.astype(f32)
        if op == "%":
            out = np.fmod(a, b)
        else:
            out = {"+": np.add, "-": np.subtract, "*": np.multiply, "/": np.divide}[op](a, b)
        out = np.asarray(out, dtype=f32)
        return saturate_fixed(out) if base == "fixed" else out


def _uniform_vars(tree, shade: ShadeInput) -> dict:
    out = {}
    unit = 0
    for sym in entry_uniforms(tree):
        if sym.type.kind == SAMPLER:
            img = shade.textures.get(unit, shade.textures.get(str(unit)))
            val = stdlib.SamplerValue(unit, img, sym.type.sampler_dim)
            out[sym] = Var(sym, val, np.array(True))
            unit += 1
            continue
        if sym.name not in shade.uniforms:
            out[sym] = Var(sym, missing=f"uniform '{sym.name}' was not supplied")
            continue
        val = coerce_value(shade.uniforms[sym.name], sym.type, f"uniform '{sym.name}'")
        out[sym] = Var(sym, val, _full_mask(val))
    return out


def run_cg(tree: T.TypedTree, shade: ShadeInput) -> ExecResult:
    """Execute the entry function on one vertex or fragment."""
    interp = Interpreter(tree, shade)
    uniforms = _uniform_vars(tree, shade)
    for d in tree.globals:
        sym = d.sym
        if sym.is_uniform:
            interp.globals[sym] = uniforms[sym]
            continue
        if d.init is not None:
            val = interp.eval(d.init)
            interp.globals[sym] = Var(sym, val, _full_mask(val))
        else:
            blank, _ = _blank(sym.type)
            interp.globals[sym] = Var(sym, blank, _full_mask(blank))

    inputs, outputs = entry_interface(tree)
    entry = tree.entry
    frame = {}
    for p in entry.params:
        if p in uniforms:
            frame[p] = uniforms[p]
        else:
            frame[p] = Var(p)
    for v in inputs:
        var = frame[next(p for p in entry.params if p.name == v.path[0])]
        value = shade.varying_value(v.semantic)
        n = int(np.prod(v.type.shape)) if v.type.shape else 1
        interp.write(var, [("item", k) for k in v.path[1:]],
                     convert_array(value[:n], v.type.base).reshape(v.type.shape))
    try:
        ret = interp.invoke(entry, frame)
    except _Discard:
        return ExecResult({}, True)
    results = {}
    for v in outputs:
        if v.path[0] == "return":
            node = ret
            for k in v.path[1:]:
                node = node[k]
            results[v.semantic] = pad_output(node)
        else:
            var = frame[next(p for p in entry.params if p.name == v.path[0])]
            results[v.semantic] = pad_output(interp.read(var, [("item", k) for k in v.path[1:]]))
    return ExecResult(results, False)
