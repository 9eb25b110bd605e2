"""The semantic type lattice: scalars, vectors, matrices, samplers, arrays, records."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

SCALAR = "scalar"
VECTOR = "vector"
MATRIX = "matrix"
SAMPLER = "sampler"
ARRAY = "array"
RECORD = "record"
VOID = "void"

BASES = ("bool", "int", "fixed", "half", "float", "double")
NUMERIC_BASES = ("int", "fixed", "half", "float", "double")
FLOAT_BASES = ("fixed", "half", "float", "double")
SAMPLER_DIMS = ("2D", "3D", "CUBE")

# Implicit promotions (source -> targets reachable in one conversion).
PROMOTIONS = {
    "int": ("float", "double"),
    "half": ("float", "double"),
    "fixed": ("float", "double"),
    "float": ("double",),
    "double": (),
    "bool": (),
}

# fixed is stored as binary32 but saturates to [-2, 2) after every operation.
FIXED_MIN = -2.0
FIXED_MAX = 1.9999999  # largest binary32 below 2.0 after rounding


@dataclass(frozen=True)
class Type:
    kind: str
    base: Optional[str] = None
    rows: int = 0  # matrices
    cols: int = 0  # vector length, or matrix columns
    sampler_dim: Optional[str] = None
    elem: Optional["Type"] = None
    length: int = 0  # arrays
    name: Optional[str] = None  # records
    fields: tuple = ()  # records: ((name, Type), ...)

    def __post_init__(self):
        if self.kind == VECTOR and not 1 <= self.cols <= 4:
            raise ValueError(f"vector length {self.cols} out of range")
        if self.kind == MATRIX and not (1 <= self.rows <= 4 and 1 <= self.cols <= 4):
            raise ValueError(f"matrix dims {self.rows}x{self.cols} out of range")

    # -- shape helpers -------------------------------------------------
    @property
    def is_scalar(self) -> bool:
        return self.kind == SCALAR

    @property
    def is_vector(self) -> bool:
        return self.kind == VECTOR

    @property
    def is_matrix(self) -> bool:
        return self.kind == MATRIX

    @property
    def is_numeric(self) -> bool:
        return self.kind in (SCALAR, VECTOR, MATRIX) and self.base in NUMERIC_BASES

    @property
    def is_basic(self) -> bool:
        """Scalar, vector or matrix of any base (incl. bool)."""
        return self.kind in (SCALAR, VECTOR, MATRIX)

    @property
    def is_scalarlike(self) -> bool:
        """Scalars and length-1 vectors, which convert to each other freely."""
        return self.kind == SCALAR or (self.kind == VECTOR and self.cols == 1)

    @property
    def width(self) -> int:
        """Number of components of a scalar or vector."""
        if self.kind == SCALAR:
            return 1
        if self.kind == VECTOR:
            return self.cols
        raise TypeError(f"{self} has no width")

    @property
    def shape(self) -> tuple:
        if self.kind == SCALAR:
            return ()
        if self.kind == VECTOR:
            return (self.cols,)
        if self.kind == MATRIX:
            return (self.rows, self.cols)
        raise TypeError(f"{self} has no numpy shape")

    def with_base(self, base: str) -> "Type":
        return Type(self.kind, base, self.rows, self.cols)

    def row_type(self) -> "Type":
        return vector(self.base, self.cols)

    def __str__(self) -> str:
        if self.kind == SCALAR:
            return self.base
        if self.kind == VECTOR:
            return f"{self.base}{self.cols}"
        if self.kind == MATRIX:
            return f"{self.base}{self.rows}x{self.cols}"
        if self.kind == SAMPLER:
            return f"sampler{self.sampler_dim}"
        if self.kind == ARRAY:
            return f"{self.elem}[{self.length}]"
        if self.kind == RECORD:
            return self.name or "struct"
        return "void"

    __repr__ = __str__


def scalar(base: str) -> Type:
    return Type(SCALAR, base)


def vector(base: str, n: int) -> Type:
    return Type(VECTOR, base, cols=n)


def matrix(base: str, rows: int, cols: int) -> Type:
    return Type(MATRIX, base, rows=rows, cols=cols)


def sampler(dim: str) -> Type:
    return Type(SAMPLER, sampler_dim=dim)


def array(elem: Type, length: int) -> Type:
    return Type(ARRAY, elem=elem, length=length)


def record(name: str, fields) -> Type:
    return Type(RECORD, name=name, fields=tuple(fields))


VOID_T = Type(VOID)
FLOAT = scalar("float")
INT = scalar("int")
BOOL = scalar("bool")
FLOAT4 = vector("float", 4)
FLOAT4X4 = matrix("float", 4, 4)

_NAME_RE = re.compile(r"^(bool|int|fixed|half|float|double)(?:([1-4])(?:x([1-4]))?)?$")


def builtin_type(name: str) -> Optional[Type]:
    """Resolve a builtin type name such as ``float4`` or ``half3x3``."""
    if name == "void":
        return VOID_T
    if name.startswith("sampler") and name[7:] in SAMPLER_DIMS:
        return sampler(name[7:])
    m = _NAME_RE.match(name)
    if not m:
        return None
    base, n, c = m.groups()
    if n is None:
        return scalar(base)
    if c is None:
        return vector(base, int(n))
    return matrix(base, int(n), int(c))


def is_builtin_type_name(name: str) -> bool:
    return builtin_type(name) is not None


def promotes(src: str, dst: str) -> bool:
    return src == dst or dst in PROMOTIONS.get(src, ())


def common_base(a: str, b: str) -> Optional[str]:
    """Least base both operands promote to, or None."""
    if a == b:
        return a
    if promotes(a, b):
        return b
    if promotes(b, a):
        return a
    candidates = [t for t in ("float", "double") if promotes(a, t) and promotes(b, t)]
    return candidates[0] if candidates else None


def same_shape(a: Type, b: Type) -> bool:
    if a.is_scalarlike and b.is_scalarlike:
        return True
    return a.kind == b.kind and a.rows == b.rows and a.cols == b.cols


def conversion_cost(src: Type, dst: Type) -> Optional[tuple]:
    """Cost of an implicit argument conversion, or None if not allowed.

    Returned as ``(conversions, inexact)``: ``conversions`` counts promotions
    and smears (each counts one); ``inexact`` is 1 when the types are not
    identical, so ``float`` -> ``float1`` ranks below an identical match.
    """
    if src == dst:
        return (0, 0)
    if not (src.is_basic and dst.is_basic):
        return None
    if src.base == "bool" or dst.base == "bool":
        if src.base != dst.base:
            return None
    conv = 0
    if src.base != dst.base:
        if not promotes(src.base, dst.base):
            return None
        conv += 1
    if same_shape(src, dst):
        return (conv, 1)
    if src.is_scalarlike and dst.kind in (VECTOR, MATRIX):
        return (conv + 1, 1)
    return None


def assignable(src: Type, dst: Type) -> bool:
    """Whether ``src`` converts implicitly to ``dst`` in an assignment or initializer."""
    if src == dst:
        return True
    if src.kind in (ARRAY, RECORD, SAMPLER) or dst.kind in (ARRAY, RECORD, SAMPLER):
        return False
    if not (src.is_basic and dst.is_basic):
        return False
    if (src.base == "bool") != (dst.base == "bool"):
        return False
    if same_shape(src, dst):
        return True
    return src.is_scalarlike and dst.kind in (VECTOR, MATRIX)


def castable(src: Type, dst: Type) -> bool:
    """Explicit C-style casts: any basic-to-basic cast of matching shape, or a smear."""
    if src == dst:
        return True
    if not (src.is_basic and dst.is_basic):
        return False
    if same_shape(src, dst):
        return True
    if src.is_scalarlike and dst.kind in (VECTOR, MATRIX):
        return True
    # truncation of a vector to a shorter vector
    return src.is_vector and dst.kind in (VECTOR, SCALAR) and dst.width <= src.width


def component_count(t: Type) -> int:
    if t.kind == SCALAR:
        return 1
    if t.kind == VECTOR:
        return t.cols
    if t.kind == MATRIX:
        return t.rows * t.cols
    if t.kind == ARRAY:
        return t.length * component_count(t.elem)
    if t.kind == RECORD:
        return sum(component_count(ft) for _, ft in t.fields)
    raise TypeError(f"{t} has no components")


def register_footprint(t: Type) -> int:
    """Constant registers a uniform of this type occupies (row per register)."""
    if t.kind in (SCALAR, VECTOR):
        return 1
    if t.kind == MATRIX:
        return t.rows
    if t.kind == ARRAY:
        return t.length * register_footprint(t.elem)
    if t.kind == RECORD:
        return sum(register_footprint(ft) for _, ft in t.fields)
    return 0


def field_type(t: Type, name: str) -> Optional[Type]:
    for fname, ftype in t.fields:
        if fname == name:
            return ftype
    return None


@dataclass(frozen=True)
class FunctionSignature:
    name: str
    params: tuple  # ((Type, qualifier), ...); qualifier in {"", "uniform", "out", "inout"}
    ret: Type
    origin: str = "builtin"  # "user" or "builtin"
    key: str = ""  # evaluator / lowering id for builtins

    @property
    def param_types(self) -> tuple:
        return tuple(t for t, _ in self.params)

    def __str__(self) -> str:
        args = ", ".join(f"{q + ' ' if q else ''}{t}" for t, q in self.params)
        return f"{self.ret} {self.name}({args})"
