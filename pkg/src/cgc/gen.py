"""Random straight-line Cg programs and random shading inputs for differential testing."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .profiles import entry_interface, entry_uniforms
from .stdlib import TextureImage
from .types import ARRAY, RECORD, SAMPLER
from .vm import ShadeInput

LANES = "xyzw"
FLOATN = {1: "float", 2: "float2", 3: "float3", 4: "float4"}


@dataclass
class GenConfig:
    statements: tuple = (3, 7)  # inclusive range of local statements
    max_depth: int = 3
    texture_probability: float = 0.6  # fragment programs only
    matrix_probability: float = 0.5


@dataclass
class GeneratedProgram:
    source: str
    entry: str
    profile: str
    seed: int

    @property
    def stage(self) -> str:
        return "fragment" if self.profile == "arbfp1" else "vertex"


@dataclass
class _Scope:
    rng: random.Random
    cfg: GenConfig
    vars: dict = field(default_factory=dict)  # name -> width
    matrix: str = ""


def _literal(rng: random.Random) -> str:
    v = rng.randint(-16, 16) / 4.0
    return f"{v:.2f}"


def _swizzle_of(rng, name: str, have: int, want: int) -> str:
    if have == want and rng.random() < 0.4:
        return name
    return name + "." + "".join(rng.choice(LANES[:have]) for _ in range(want))


def _expr(s: _Scope, width: int, depth: int) -> str:
    rng = s.rng
    leaf = depth <= 0 or rng.random() < 0.25
    if leaf:
        if rng.random() < 0.15:
            if width == 1:
                return _literal(rng)
            return f"{FLOATN[width]}({', '.join(_literal(rng) for _ in range(width))})"
        name = rng.choice(sorted(s.vars))
        return _swizzle_of(rng, name, s.vars[name], width)
    choice = rng.random()
    if choice < 0.45:
        op = rng.choice("+-*")
        return f"({_expr(s, width, depth - 1)} {op} {_expr(s, width, depth - 1)})"
    if choice < 0.6 and width > 1:
        return f"({_expr(s, 1, depth - 1)} * {_expr(s, width, depth - 1)})"
    if choice < 0.72 and width == 1:
        n = rng.randint(2, 4)
        return f"dot({_expr(s, n, depth - 1)}, {_expr(s, n, depth - 1)})"
    if choice < 0.8 and width == 4 and s.matrix:
        return f"mul({s.matrix}, {_expr(s, 4, depth - 1)})"
    if choice < 0.88:
        return f"abs({_expr(s, width, depth - 1)})"
    if choice < 0.94:
        return f"-({_expr(s, width, depth - 1)})"
    inner = rng.randint(max(width, 2), 4)
    sub = _expr(s, inner, depth - 1)
    return f"({sub})." + "".join(rng.choice(LANES[:inner]) for _ in range(width))


def generate(seed: int, profile: str, cfg: GenConfig = GenConfig()) -> GeneratedProgram:
    """A random program for ``profile`` built only from branch-free vector arithmetic."""
    rng = random.Random(seed)
    fragment = profile == "arbfp1"
    s = _Scope(rng, cfg)
    params = []
    if fragment:
        ins = [("color", "COLOR"), ("uv0", "TEXCOORD0"), ("uv1", "TEXCOORD1")]
    else:
        ins = [("position", "POSITION"), ("color", "COLOR"), ("normal", "NORMAL"), ("uv0", "TEXCOORD0")]
    for name, sem in ins:
        params.append(f"float4 {name} : {sem}")
        s.vars[name] = 4
    if not fragment:
        params += ["out float4 oPosition : POSITION", "out float4 oColor : COLOR"]
    params += ["uniform float scale", "uniform float4 tint"]
    s.vars.update(scale=1, tint=4)
    if rng.random() < cfg.matrix_probability:
        params.append("uniform float4x4 xform")
        s.matrix = "xform"
    use_texture = fragment and rng.random() < cfg.texture_probability
    if use_texture:
        params.append("uniform sampler2D image")

    body = []
    n_locals = rng.randint(*cfg.statements)
    for k in range(n_locals):
        name = f"t{k}"
        if k and rng.random() < 0.3:
            target = rng.choice([v for v in s.vars if v[0] == "t" and v[1:].isdigit()])
            have = s.vars[target]
            if have > 1:
                lanes = sorted(rng.sample(range(have), rng.randint(1, have - 1)))
                mask = "".join(LANES[i] for i in lanes)
                body.append(f"    {target}.{mask} = {_expr(s, len(lanes), cfg.max_depth)};")
                continue
        width = rng.randint(1, 4)
        body.append(f"    {FLOATN[width]} {name} = {_expr(s, width, cfg.max_depth)};")
        s.vars[name] = width
    if use_texture:
        if rng.random() < 0.5:
            body.append(f"    float4 texel = tex2Dproj(image, {rng.choice(['uv0', 'uv1'])});")
        else:
            body.append(f"    float4 texel = tex2D(image, {_expr(s, 2, 1)});")
        s.vars["texel"] = 4
    if fragment:
        final = _expr(s, 4, cfg.max_depth)
        if use_texture:
            final = f"texel * {final}"
        body.append(f"    return {final};")
        head = "float4 shade(" + ",\n             ".join(params) + ") : COLOR"
    else:
        body.append(f"    oPosition = {_expr(s, 4, cfg.max_depth)};")
        body.append(f"    oColor = {_expr(s, 4, cfg.max_depth)};")
        head = "void shade(" + ",\n           ".join(params) + ")"
    source = head + "\n{\n" + "\n".join(body) + "\n}\n"
    return GeneratedProgram(source, "shade", profile, seed)


# -- inputs --------------------------------------------------------------------

def _random_value(rng: np.random.Generator, t, lo, hi):
    if t.kind == ARRAY:
        return [_random_value(rng, t.elem, lo, hi) for _ in range(t.length)]
    if t.kind == RECORD:
        return {n: _random_value(rng, ft, lo, hi) for n, ft in t.fields}
    n = int(np.prod(t.shape)) if t.shape else 1
    vals = rng.uniform(lo, hi, n)
    if t.base == "bool":
        return [bool(v > 0) for v in vals] if n > 1 else bool(vals[0] > 0)
    if t.base == "int":
        vals = np.round(vals)
    return [float(v) for v in vals] if n > 1 else float(vals[0])


def random_texture(rng: np.random.Generator, size: int = 4, depth: int = 1) -> TextureImage:
    texels = rng.uniform(0.0, 1.0, (depth, size, size, 4)).astype(np.float32)
    return TextureImage(size, size, depth, texels)


def random_shade(tree, rng: np.random.Generator, lo: float = -8.0, hi: float = 8.0,
                 min_abs_w: float = 0.25) -> ShadeInput:
    """Varyings and uniforms drawn from [lo, hi]; every varying's w keeps |w| >= min_abs_w."""
    inputs, _ = entry_interface(tree)
    varying = {}
    for v in inputs:
        vals = rng.uniform(lo, hi, 4)
        if abs(vals[3]) < min_abs_w:
            vals[3] = min_abs_w if vals[3] >= 0 else -min_abs_w
        varying[v.semantic] = [float(x) for x in vals]
    uniforms, textures, unit = {}, {}, 0
    for sym in entry_uniforms(tree):
        if sym.type.kind == SAMPLER:
            dim = sym.type.sampler_dim
            textures[unit] = random_texture(rng, depth={"3D": 4, "CUBE": 6}.get(dim, 1))
            unit += 1
        else:
            uniforms[sym.name] = _random_value(rng, sym.type, lo, hi)
    return ShadeInput(varying, uniforms, textures)
