"""Built-in function catalogue, reference evaluators and texture sampling."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np

from .numeric import dot32, f32, log2_32, rsqrt32
from .types import (FunctionSignature, NUMERIC_BASES, Type, matrix, sampler, scalar,
                    vector)

FLOAT_T = scalar("float")
VERTEX_PROFILES = frozenset({"vs_1_1", "arbvp1"})


@dataclass(frozen=True)
class BuiltinDescriptor:
    name: str
    overloads: tuple  # FunctionSignature
    evaluator: str
    lowering: str
    no_lowering_in: frozenset = frozenset()  # profiles with no lowering

    def lowers_in(self, profile_name: str) -> bool:
        return profile_name not in self.no_lowering_in


def _fv(n):
    return vector("float", n)


def _sig(name, key, ret, *params):
    return FunctionSignature(name, tuple((p, "") for p in params), ret, "builtin", key)


def _build_catalogue() -> dict:
    cat = {}

    def add(name, evaluator, lowering, overloads, no_lowering_in=frozenset()):
        cat[name] = BuiltinDescriptor(name, tuple(overloads), evaluator, lowering, no_lowering_in)

    mul = []
    for r in range(1, 5):
        for c in range(1, 5):
            mul.append(_sig("mul", "mul_mv", _fv(r), matrix("float", r, c), _fv(c)))
            mul.append(_sig("mul", "mul_vm", _fv(c), _fv(r), matrix("float", r, c)))
            for k in range(1, 5):
                mul.append(_sig("mul", "mul_mm", matrix("float", r, c),
                                matrix("float", r, k), matrix("float", k, c)))
    add("mul", "mul", "mul", mul)
    add("dot", "dot", "dot", [_sig("dot", "dot", FLOAT_T, _fv(n), _fv(n)) for n in (2, 3, 4)])

    def componentwise(name):
        sigs = [_sig(name, name, FLOAT_T, FLOAT_T)]
        sigs += [_sig(name, name, _fv(n), _fv(n)) for n in range(1, 5)]
        return sigs

    add("abs", "abs", "abs", componentwise("abs"))
    add("log2", "log2", "log2", componentwise("log2"))
    add("rsqrt", "rsqrt", "rsqrt", componentwise("rsqrt"))
    add("reflect", "reflect", "reflect", [_sig("reflect", "reflect", _fv(3), _fv(3), _fv(3))])
    f4 = _fv(4)
    add("tex2D", "tex2D", "TEX", [_sig("tex2D", "tex2D", f4, sampler("2D"), _fv(2))], VERTEX_PROFILES)
    add("tex2Dproj", "tex2Dproj", "TXP", [_sig("tex2Dproj", "tex2Dproj", f4, sampler("2D"), f4)],
        VERTEX_PROFILES)
    add("tex3Dproj", "tex3Dproj", "TXP", [_sig("tex3Dproj", "tex3Dproj", f4, sampler("3D"), f4)],
        VERTEX_PROFILES)
    add("texCUBE", "texCUBE", "TEX", [_sig("texCUBE", "texCUBE", f4, sampler("CUBE"), _fv(3))],
        VERTEX_PROFILES)
    return cat


CATALOGUE = _build_catalogue()
TEXTURE_BUILTINS = frozenset(n for n, d in CATALOGUE.items() if d.no_lowering_in)


def builtin_signatures(name: str) -> list:
    desc = CATALOGUE.get(name)
    return list(desc.overloads) if desc else []


def descriptor(name: str) -> Optional[BuiltinDescriptor]:
    return CATALOGUE.get(name)


_ARITH_OPS = ("+", "-", "*", "/", "%")


@lru_cache(maxsize=None)
def operator_signatures(op: str) -> tuple:
    """Component-wise signatures of an arithmetic operator over every numeric shape."""
    if op not in _ARITH_OPS:
        raise ValueError(f"no signature table for operator {op!r}")
    shapes = [lambda b: scalar(b)]
    shapes += [lambda b, n=n: vector(b, n) for n in range(1, 5)]
    shapes += [lambda b, r=r, c=c: matrix(b, r, c) for r in range(1, 5) for c in range(1, 5)]
    sigs = []
    for base in NUMERIC_BASES:
        for mk in shapes:
            t = mk(base)
            sigs.append(FunctionSignature(op, ((t, ""), (t, "")), t, "builtin", f"op{op}"))
    return tuple(sigs)


# -- textures ----------------------------------------------------------------

@dataclass(frozen=True)
class TextureImage:
    width: int
    height: int
    depth: int = 1
    texels: np.ndarray = field(default=None, compare=False, repr=False)  # (depth, height, width, 4)

    def __post_init__(self):
        if min(self.width, self.height, self.depth) <= 0:
            raise ValueError("texture dimensions must be positive")
        data = np.asarray(self.texels if self.texels is not None else
                          np.zeros((self.depth, self.height, self.width, 4)), dtype=f32)
        if data.size != self.width * self.height * self.depth * 4:
            raise ValueError("texel count does not match dimensions")
        object.__setattr__(self, "texels", data.reshape(self.depth, self.height, self.width, 4))

    @classmethod
    def solid(cls, rgba, width=1, height=1, depth=1) -> "TextureImage":
        data = np.tile(np.asarray(rgba, dtype=f32), (depth, height, width, 1))
        return cls(width, height, depth, data)

    def texel(self, x: int, y: int, z: int = 0) -> np.ndarray:
        return self.texels[z, y, x].copy()


def load_texture(path) -> TextureImage:
    """Read ``W H [D]`` followed by W*H*D lines of ``R G B A``, x fastest."""
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty texture file")
    dims = [int(x) for x in lines[0].split()]
    if len(dims) not in (2, 3):
        raise ValueError(f"{path}: first line must be 'W H' or 'W H D'")
    w, h = dims[0], dims[1]
    d = dims[2] if len(dims) == 3 else 1
    rows = [[float(x) for x in ln.split()] for ln in lines[1:]]
    if len(rows) != w * h * d or any(len(r) != 4 for r in rows):
        raise ValueError(f"{path}: expected {w * h * d} lines of 4 numbers")
    return TextureImage(w, h, d, np.array(rows, dtype=f32))


def dump_texture(image: TextureImage) -> str:
    dims = f"{image.width} {image.height}" + (f" {image.depth}" if image.depth > 1 else "")
    body = [" ".join(repr(float(v)) for v in t) for t in image.texels.reshape(-1, 4)]
    return "\n".join([dims] + body) + "\n"


@dataclass(frozen=True)
class SamplerValue:
    unit: int
    image: TextureImage
    dim: str = "2D"


def _texel_index(coord, size: int) -> int:
    """floor(clamp(coord, 0, 1-eps) * size) computed without an explicit eps."""
    c = float(coord)
    if math.isnan(c) or c <= 0.0:
        return 0
    if math.isinf(c):
        return size - 1
    return min(int(math.floor(c * size)), size - 1)


def sample2d(image: TextureImage, u, v, layer: int = 0) -> np.ndarray:
    return image.texel(_texel_index(u, image.width), _texel_index(v, image.height), layer)


def sample3d(image: TextureImage, u, v, w) -> np.ndarray:
    return sample2d(image, u, v, _texel_index(w, image.depth))


def project(coord, n: int):
    """Divide the first ``n`` components by the 4th in binary32; None when w == 0."""
    c = np.asarray(coord, dtype=f32)
    if c[3] == 0:
        return None
    with np.errstate(all="ignore"):
        return [f32(c[i] / c[3]) for i in range(n)]


# Cube faces in storage order +X, -X, +Y, -Y, +Z, -Z (major-axis convention).
def cube_face(direction):
    x, y, z = (float(v) for v in direction[:3])
    ax, ay, az = abs(x), abs(y), abs(z)
    if ax >= ay and ax >= az:
        face, sc, tc, ma = (0, -z, -y, ax) if x >= 0 else (1, z, -y, ax)
    elif ay >= az:
        face, sc, tc, ma = (2, x, z, ay) if y >= 0 else (3, x, -z, ay)
    else:
        face, sc, tc, ma = (4, x, -y, az) if z >= 0 else (5, -x, -y, az)
    if ma == 0 or not math.isfinite(ma):
        return None
    return face, (sc / ma + 1.0) / 2.0, (tc / ma + 1.0) / 2.0


def sample_texture(kind: str, s: SamplerValue, coord) -> np.ndarray:
    """Sample for one of tex2D, tex2Dproj, tex3Dproj, texCUBE (nearest, clamp-to-edge)."""
    coord = np.asarray(coord, dtype=f32)
    zero = np.zeros(4, dtype=f32)
    if kind == "tex2D":
        return sample2d(s.image, coord[0], coord[1])
    if kind == "tex2Dproj":
        p = project(coord, 2)
        return zero if p is None else sample2d(s.image, p[0], p[1])
    if kind == "tex3Dproj":
        p = project(coord, 3)
        return zero if p is None else sample3d(s.image, p[0], p[1], p[2])
    if kind == "texCUBE":
        if s.image.depth != 6:
            raise ValueError("cube textures need depth 6 (one layer per face)")
        f = cube_face(coord)
        return zero if f is None else sample2d(s.image, f[1], f[2], f[0])
    raise ValueError(f"unknown texture function {kind}")


# -- reference evaluation ----------------------------------------------------

def _mul_mv(m, v):
    return np.array([dot32(m[i], v) for i in range(m.shape[0])], dtype=f32)


def _mul_vm(v, m):
    return np.array([dot32(v, m[:, j]) for j in range(m.shape[1])], dtype=f32)


def _mul_mm(a, b):
    return np.array([[dot32(a[i], b[:, j]) for j in range(b.shape[1])]
                     for i in range(a.shape[0])], dtype=f32)


def _reflect(i, n):
    d = dot32(n, i)
    t = f32(2.0) * d
    return (i - t * n).astype(f32)


_EVALUATORS = {
    "mul_mv": _mul_mv,
    "mul_vm": _mul_vm,
    "mul_mm": _mul_mm,
    "dot": dot32,
    "abs": lambda x: np.abs(x).astype(f32),
    "log2": log2_32,
    "rsqrt": rsqrt32,
    "reflect": _reflect,
}


def eval_builtin(sig: FunctionSignature, args: list):
    """Evaluate a builtin on binary32 arguments already converted to ``sig``'s types."""
    key = sig.key
    if key in ("tex2D", "tex2Dproj", "tex3Dproj", "texCUBE"):
        return sample_texture(key, args[0], args[1])
    fn = _EVALUATORS.get(key)
    if fn is None:
        raise ValueError(f"no evaluator for builtin {sig}")
    vals = [np.asarray(a, dtype=f32) for a in args]
    out = fn(*vals)
    return np.asarray(out, dtype=f32).reshape(sig.ret.shape)
