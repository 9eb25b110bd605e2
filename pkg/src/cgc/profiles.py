"""Compilation targets: register tables, limits, validation and binding."""
from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from typing import Optional

from .diagnostics import NOWHERE, CompileError, Diagnostic, Location, error
from .sema import tree as T
from .stdlib import TEXTURE_BUILTINS
from .types import ARRAY, MATRIX, RECORD, SAMPLER, SCALAR, VECTOR, VOID, Type, register_footprint

IMPLEMENTED = ("vs_1_1", "arbvp1", "arbfp1")
RECOGNIZED_UNIMPLEMENTED = ("vs_2_0", "ps_1_3", "ps_2_x", "vp20", "vp30", "fp20", "fp30")
LIMIT_NAMES = ("max_instructions", "max_constants", "max_temporaries", "texture_units")

_ALIASES = {"COLOR0": "COLOR", "DIFFUSE": "COLOR", "SPECULAR": "COLOR1", "TEXCOORD": "TEXCOORD0",
            "POSITION0": "POSITION", "NORMAL0": "NORMAL"}


def canonical_semantic(sem: str) -> str:
    s = sem.upper()
    return _ALIASES.get(s, s)


def _texcoords(fmt: str, start: int = 0, count: int = 8) -> dict:
    return {f"TEXCOORD{n}": fmt.format(n=n, r=start + n) for n in range(count)}


@dataclass(frozen=True)
class ProfileDescriptor:
    name: str
    stage: str  # "vertex" | "fragment"
    header: str
    inputs: dict = field(hash=False, compare=False)
    outputs: dict = field(hash=False, compare=False)
    max_instructions: int = 128
    max_constants: int = 96
    max_temporaries: int = 12
    texture_units: int = 0
    allows_texture_fetch: bool = False
    allows_data_dependent_branch: bool = False
    allows_variable_indexing: bool = False

    def __post_init__(self):
        for name in LIMIT_NAMES:
            value = getattr(self, name)
            if value < 0 or (value == 0 and name != "texture_units"):
                raise ValueError(f"limit {name} must be positive, got {value}")

    @property
    def is_vertex(self) -> bool:
        return self.stage == "vertex"

    @property
    def is_arb(self) -> bool:
        return self.name.startswith("arb")

    @property
    def limits(self) -> dict:
        return {n: getattr(self, n) for n in LIMIT_NAMES}

    def with_limits(self, **overrides) -> "ProfileDescriptor":
        unknown = set(overrides) - set(LIMIT_NAMES)
        if unknown:
            raise CompileError.single("E_BAD_LIMIT", f"unknown limit {sorted(unknown)[0]!r}; "
                                      f"expected one of {', '.join(LIMIT_NAMES)}")
        try:
            return dataclasses.replace(self, **overrides)
        except ValueError as exc:
            raise CompileError.single("E_BAD_LIMIT", str(exc)) from None


_PROFILES = {
    "vs_1_1": ProfileDescriptor(
        "vs_1_1", "vertex", "vs.1.1",
        inputs={"POSITION": "v0", "BLENDWEIGHT": "v1", "BLENDINDICES": "v2", "NORMAL": "v3",
                "PSIZE": "v4", "COLOR": "v5", "COLOR1": "v6", **_texcoords("v{r}", 7)},
        outputs={"POSITION": "oPos", "COLOR": "oD0", "COLOR1": "oD1", **_texcoords("oT{n}")},
    ),
    "arbvp1": ProfileDescriptor(
        "arbvp1", "vertex", "!!ARBvp1.0",
        inputs={"POSITION": "vertex.position", "BLENDWEIGHT": "vertex.weight",
                "NORMAL": "vertex.normal", "COLOR": "vertex.color",
                "COLOR1": "vertex.color.secondary", **_texcoords("vertex.texcoord[{n}]")},
        outputs={"POSITION": "result.position", "COLOR": "result.color",
                 "COLOR1": "result.color.secondary", **_texcoords("result.texcoord[{n}]")},
    ),
    "arbfp1": ProfileDescriptor(
        "arbfp1", "fragment", "!!ARBfp1.0",
        inputs={"COLOR": "fragment.color.primary", "COLOR1": "fragment.color.secondary",
                "WPOS": "fragment.position", **_texcoords("fragment.texcoord[{n}]")},
        outputs={"COLOR": "result.color"},
        max_instructions=96, max_constants=24, max_temporaries=16, texture_units=4,
        allows_texture_fetch=True,
    ),
}


def lookup_profile(name: str) -> ProfileDescriptor:
    if name in _PROFILES:
        return _PROFILES[name]
    if name in RECOGNIZED_UNIMPLEMENTED:
        raise CompileError.single("E_UNIMPLEMENTED_PROFILE",
                                  f"profile '{name}' is recognized but not implemented")
    raise CompileError.single("E_UNKNOWN_PROFILE", f"unknown profile '{name}'")


def parse_limit(text: str) -> tuple:
    """``name=value`` -> (name, int)."""
    m = re.fullmatch(r"\s*([a-z_]+)\s*=\s*(-?\d+)\s*", text)
    if not m:
        raise CompileError.single("E_BAD_LIMIT", f"limit override {text!r} is not name=integer")
    name, value = m.group(1), int(m.group(2))
    if name not in LIMIT_NAMES:
        raise CompileError.single("E_BAD_LIMIT", f"unknown limit {name!r}; expected one of {', '.join(LIMIT_NAMES)}")
    return name, value


# -- interface flattening ------------------------------------------------------

@dataclass(frozen=True)
class Varying:
    path: tuple  # ("param",) or ("param", "field") or ("return", ...)
    semantic: Optional[str]
    type: Type
    loc: Location = NOWHERE


def _flatten(path, t: Type, semantic, struct_semantics, loc) -> list:
    if t.kind == RECORD:
        sems = struct_semantics.get(t.name, {})
        out = []
        for fname, ftype in t.fields:
            out.extend(_flatten(path + (fname,), ftype, sems.get(fname), struct_semantics, loc))
        return out
    return [Varying(path, canonical_semantic(semantic) if semantic else None, t, loc)]


def entry_interface(tree: T.TypedTree) -> tuple:
    """(inputs, outputs) of the entry as flattened Varying lists."""
    entry, ss = tree.entry, tree.struct_semantics
    inputs, outputs = [], []
    for p in entry.params:
        if p.is_uniform or p.type.kind == SAMPLER:
            continue
        flat = _flatten((p.name,), p.type, p.semantic, ss, p.loc)
        if p.qualifier in ("", "const", "inout"):
            inputs.extend(flat)
        if p.qualifier in ("out", "inout"):
            outputs.extend(flat)
    if entry.sig.ret.kind != VOID:
        outputs.extend(_flatten(("return",), entry.sig.ret, entry.return_semantic, ss, entry.loc))
    return inputs, outputs


def entry_uniforms(tree: T.TypedTree) -> list:
    """Uniform symbols: entry uniform/sampler parameters, then uniform globals."""
    params = [p for p in tree.entry.params if p.is_uniform or p.type.kind == SAMPLER]
    return params + tree.uniform_globals


# -- validation ----------------------------------------------------------------

@dataclass(frozen=True)
class ValidationReport:
    diagnostics: tuple = ()

    @property
    def ok(self) -> bool:
        return not any(d.is_error for d in self.diagnostics)

    def raise_if_errors(self):
        if not self.ok:
            raise CompileError(self.diagnostics)


def _root(node):
    while not isinstance(node, T.TVar):
        node = node.operand
    return node.sym


class _Taint:
    """Flow-insensitive dependence on varying or uniform data, to a fixed point."""

    def __init__(self, tree: T.TypedTree):
        self.functions = tree.reachable()
        self.tainted = set(tree.entry.params) | set(tree.uniform_globals)
        self.returns = set()
        changed = True
        while changed:
            self.changed = False
            for f in self.functions:
                self.stmt(f, f.body)
            changed = self.changed

    def mark(self, sym):
        if sym not in self.tainted:
            self.tainted.add(sym)
            self.changed = True

    def of(self, e) -> bool:
        if isinstance(e, T.TVar):
            return e.sym in self.tainted
        if isinstance(e, T.TCall) and e.func is not None and e.func in self.returns:
            return True
        return any(self.of(c) for c in T.children(e))

    def effects(self, e):
        for node in T.walk(e):
            if isinstance(node, T.TAssign) and self.of(node.value):
                self.mark(_root(node.target))
            elif isinstance(node, T.TCall):
                arg_taint = [self.of(a) for a in node.args]
                if node.func is not None:
                    for p, a, t in zip(node.func.params, node.args, arg_taint):
                        if t and p.qualifier != "out":
                            self.mark(p)
                        if p.is_output and p in self.tainted:
                            self.mark(_root(a))
                elif any(arg_taint):
                    for a, (_, q) in zip(node.args, node.sig.params):
                        if q in ("out", "inout"):
                            self.mark(_root(a))

    def stmt(self, fn, s):
        if s is None:
            return
        if isinstance(s, T.TDecl):
            if s.init is not None:
                self.effects(s.init)
                if self.of(s.init):
                    self.mark(s.sym)
            return
        if isinstance(s, T.TReturn):
            if s.value is not None:
                self.effects(s.value)
                if self.of(s.value) and fn not in self.returns:
                    self.returns.add(fn)
                    self.changed = True
            return
        for c in T.children(s):
            if isinstance(c, T.TStmt):
                self.stmt(fn, c)
            else:
                self.effects(c)


def _is_discard_only(s) -> bool:
    while isinstance(s, T.TBlock) and len(s.stmts) == 1:
        s = s.stmts[0]
    return isinstance(s, T.TDiscard)


def validate(tree: T.TypedTree, profile: ProfileDescriptor) -> ValidationReport:
    diags: list[Diagnostic] = []
    add = lambda code, msg, loc=NOWHERE: diags.append(error(code, msg, loc))
    functions = tree.reachable()
    taint = _Taint(tree)

    for f in functions:
        for node in T.walk(f.body):
            if isinstance(node, T.TCall) and node.sig.key in TEXTURE_BUILTINS and not profile.allows_texture_fetch:
                add("E_TEX_IN_VERTEX", f"texture access '{node.sig.name}' is not allowed in vertex profile {profile.name}", node.loc)
            elif isinstance(node, T.TDiscard) and profile.is_vertex:
                add("E_DISCARD_IN_VERTEX", f"discard is not allowed in vertex profile {profile.name}", node.loc)
            elif isinstance(node, T.TIf) and taint.of(node.cond):
                if not (_is_discard_only(node.then) and node.other is None):
                    add("E_NEEDS_BRANCHING", f"condition depends on run-time data; {profile.name} has no branching", node.loc)
            elif isinstance(node, (T.TFor, T.TWhile, T.TDo)) and node.cond is not None and taint.of(node.cond):
                add("E_NEEDS_BRANCHING", f"loop condition depends on run-time data; {profile.name} has no branching", node.loc)
            elif isinstance(node, T.TIndex) and taint.of(node.index) and not profile.allows_variable_indexing:
                add("E_VARIABLE_INDEX", f"index depends on run-time data; {profile.name} has no indexed addressing", node.loc)

    inputs, outputs = entry_interface(tree)
    for v in inputs + outputs:
        if v.semantic is None:
            what = "return value" if v.path[0] == "return" else f"'{'.'.join(v.path)}'"
            add("E_MISSING_SEMANTIC", f"varying {what} has no semantic", v.loc)
        elif v.type.kind not in (SCALAR, VECTOR) or v.type.base == "bool":
            add("E_UNSUPPORTED", f"varying '{'.'.join(v.path)}' of type {v.type} is not supported", v.loc)
    if not profile.is_vertex:
        for v in outputs:
            if v.semantic and v.semantic.startswith("TEXCOORD"):
                add("E_FRAG_TEXCOORD_OUT", f"fragment program cannot output {v.semantic}", v.loc)

    samplers = [u for u in entry_uniforms(tree) if _contains_sampler(u.type)]
    for u in samplers:
        if u.type.kind != SAMPLER:
            add("E_UNSUPPORTED", f"sampler '{u.name}' must be a plain sampler parameter", u.loc)
    if len(samplers) > profile.texture_units and profile.allows_texture_fetch:
        add("E_TEXUNITS", f"{len(samplers)} samplers exceed the {profile.texture_units} texture units of {profile.name}")
    return ValidationReport(tuple(diags))


def _contains_sampler(t: Type) -> bool:
    if t.kind == SAMPLER:
        return True
    if t.kind == ARRAY:
        return _contains_sampler(t.elem)
    if t.kind == RECORD:
        return any(_contains_sampler(ft) for _, ft in t.fields)
    return False


# -- binding -------------------------------------------------------------------

@dataclass(frozen=True)
class VaryingBinding:
    path: tuple
    semantic: str
    register: str
    type: Type


@dataclass(frozen=True)
class UniformBinding:
    """A basic-typed uniform leaf occupying ``count`` registers from ``register``."""
    path: tuple  # (name, index-or-field, ...)
    type: Type
    register: int
    count: int

    @property
    def name(self) -> str:
        out = str(self.path[0])
        for p in self.path[1:]:
            out += f"[{p}]" if isinstance(p, int) else f".{p}"
        return out


@dataclass(frozen=True)
class SamplerBinding:
    path: tuple
    type: Type
    unit: int


@dataclass(frozen=True)
class BindingTable:
    inputs: tuple = ()
    outputs: tuple = ()
    uniforms: tuple = ()
    samplers: tuple = ()

    def merged(self, other: "BindingTable") -> "BindingTable":
        return BindingTable(self.inputs or other.inputs, self.outputs or other.outputs,
                            self.uniforms or other.uniforms, self.samplers or other.samplers)

    def _find(self, items, path):
        for b in items:
            if b.path == tuple(path):
                return b
        return None

    def input_for(self, path):
        return self._find(self.inputs, path)

    def output_for(self, path):
        return self._find(self.outputs, path)

    def uniform_for(self, path):
        return self._find(self.uniforms, path)

    def sampler_for(self, path):
        return self._find(self.samplers, path)

    @property
    def constants_used(self) -> int:
        return max((u.register + u.count for u in self.uniforms), default=0)


def bind_inputs(tree: T.TypedTree, profile: ProfileDescriptor) -> BindingTable:
    inputs, outputs = entry_interface(tree)
    diags = []

    def bind(items, table, role):
        out, seen = [], {}
        for v in items:
            reg = table.get(v.semantic)
            if reg is None:
                diags.append(error("E_BAD_SEMANTIC",
                                   f"{role} semantic {v.semantic} is not available in {profile.name}", v.loc))
                continue
            if v.semantic in seen:
                diags.append(error("E_DUPLICATE_SEMANTIC",
                                   f"{role} semantic {v.semantic} bound by both '{'.'.join(seen[v.semantic])}' and '{'.'.join(v.path)}'", v.loc))
                continue
            seen[v.semantic] = v.path
            out.append(VaryingBinding(v.path, v.semantic, reg, v.type))
        return tuple(out)

    missing = [v for v in inputs + outputs if v.semantic is None]
    if missing:
        v = missing[0]
        raise CompileError.single("E_MISSING_SEMANTIC", f"varying '{'.'.join(v.path)}' has no semantic", v.loc)
    table = BindingTable(bind(inputs, profile.inputs, "input"), bind(outputs, profile.outputs, "output"))
    if diags:
        raise CompileError(diags)
    return table


def _uniform_leaves(path, t: Type):
    if t.kind == ARRAY:
        for i in range(t.length):
            yield from _uniform_leaves(path + (i,), t.elem)
    elif t.kind == RECORD:
        for fname, ftype in t.fields:
            yield from _uniform_leaves(path + (fname,), ftype)
    else:
        yield path, t


def bind_uniforms(tree: T.TypedTree, profile: ProfileDescriptor) -> BindingTable:
    uniforms, samplers = [], []
    reg = 0
    for sym in entry_uniforms(tree):
        for path, t in _uniform_leaves((sym.name,), sym.type):
            if t.kind == SAMPLER:
                samplers.append(SamplerBinding(path, t, len(samplers)))
                continue
            n = register_footprint(t)
            uniforms.append(UniformBinding(path, t, reg, n))
            reg += n
    if reg > profile.max_constants:
        raise CompileError.single("E_CAPACITY", f"uniforms need {reg} constant registers; "
                                  f"max_constants is {profile.max_constants}")
    return BindingTable(uniforms=tuple(uniforms), samplers=tuple(samplers))


def bind(tree: T.TypedTree, profile: ProfileDescriptor) -> BindingTable:
    return bind_inputs(tree, profile).merged(bind_uniforms(tree, profile))
