"""Inputs, results and value conversion shared by both interpreters."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..numeric import f32, saturate_fixed
from ..types import ARRAY, MATRIX, RECORD, SAMPLER, SCALAR, VECTOR, Type

OUTPUT_DEFAULT = np.array([0.0, 0.0, 0.0, 1.0], dtype=f32)


class VMError(RuntimeError):
    """Execution fault: uninitialized read, missing input, malformed listing."""


@dataclass
class ShadeInput:
    varying: dict = field(default_factory=dict)  # semantic -> sequence of <= 4 numbers
    uniforms: dict = field(default_factory=dict)  # name -> number / nested lists / dict
    textures: dict = field(default_factory=dict)  # unit -> TextureImage

    def varying_value(self, semantic: str) -> np.ndarray:
        """The semantic's value padded to a float4 with (0, 0, 0, 1)."""
        from ..profiles import canonical_semantic
        table = {canonical_semantic(k): v for k, v in self.varying.items()}
        if semantic not in table:
            raise VMError(f"no varying value supplied for semantic {semantic}")
        v = np.asarray(table[semantic], dtype=f32).reshape(-1)
        if not 1 <= v.size <= 4:
            raise VMError(f"varying {semantic} must have 1 to 4 components")
        out = OUTPUT_DEFAULT.copy()
        out[:v.size] = v
        return out


@dataclass
class ExecResult:
    outputs: dict = field(default_factory=dict)  # semantic -> float4
    discarded: bool = False

    def __post_init__(self):
        if self.discarded and self.outputs:
            raise ValueError("a discarded result carries no outputs")

    def format(self) -> str:
        if self.discarded:
            return "discarded"
        parts = []
        for sem in sorted(self.outputs):
            vals = ", ".join(f"{float(x):.9g}" for x in self.outputs[sem])
            parts.append(f"{sem} = ({vals})")
        return "; ".join(parts)


def dtype_of(base: str):
    return {"bool": np.bool_, "int": np.int32}.get(base, f32)


def convert_array(value: np.ndarray, base: str) -> np.ndarray:
    """Numeric conversion to ``base`` (float->int truncates toward zero)."""
    v = np.asarray(value)
    with np.errstate(all="ignore"):
        if base == "bool":
            return v != 0
        if base == "int":
            if v.dtype.kind == "f":
                v = np.trunc(v)
                v = np.nan_to_num(v, nan=0.0, posinf=2**31 - 1, neginf=-2**31)
                v = np.clip(v, -2**31, 2**31 - 1)
            return v.astype(np.int32)
        out = v.astype(f32)
        return saturate_fixed(out) if base == "fixed" else out


def coerce_value(value, t: Type, what: str):
    """Turn user-supplied JSON-like data into a value of type ``t``."""
    if t.kind == ARRAY:
        if not isinstance(value, (list, tuple)) or len(value) != t.length:
            raise VMError(f"{what}: expected a list of {t.length} elements")
        return [coerce_value(v, t.elem, f"{what}[{i}]") for i, v in enumerate(value)]
    if t.kind == RECORD:
        if not isinstance(value, dict):
            raise VMError(f"{what}: expected an object with fields {[n for n, _ in t.fields]}")
        out = {}
        for name, ft in t.fields:
            if name not in value:
                raise VMError(f"{what}: missing field '{name}'")
            out[name] = coerce_value(value[name], ft, f"{what}.{name}")
        return out
    if t.kind in (SCALAR, VECTOR, MATRIX):
        arr = np.asarray(value, dtype=np.float64).reshape(-1)
        n = int(np.prod(t.shape)) if t.shape else 1
        if arr.size != n:
            raise VMError(f"{what}: expected {n} numbers for {t}, got {arr.size}")
        return convert_array(arr.astype(f32), t.base).reshape(t.shape)
    raise VMError(f"{what}: cannot supply a value of type {t}")


def pad_output(value: np.ndarray) -> np.ndarray:
    v = np.asarray(value, dtype=f32).reshape(-1)
    out = OUTPUT_DEFAULT.copy()
    out[:v.size] = v
    return out
