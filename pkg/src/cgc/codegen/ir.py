"""Straight-line vector IR shared by lowering, optimization, emission and the assembly VM."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..numeric import dot32, f32, log2_32, rcp32, rsqrt32

LANES = "xyzw"
IDENTITY = (0, 1, 2, 3)

# opcode -> number of source operands
ARITY = {
    "MOV": 1, "MUL": 2, "ADD": 2, "MAD": 3, "DP3": 2, "DP4": 2, "RSQ": 1, "LG2": 1, "RCP": 1,
    "MIN": 2, "MAX": 2, "SLT": 2, "SGE": 2, "TEX": 1, "TXP": 1, "KIL": 1,
}
SCALAR_OPS = frozenset({"RSQ", "LG2", "RCP"})
REPLICATING_OPS = frozenset({"DP3", "DP4"}) | SCALAR_OPS
TEXTURE_OPS = frozenset({"TEX", "TXP"})
FRAGMENT_ONLY = frozenset({"TEX", "TXP", "KIL"})
TEX_TARGETS = ("2D", "3D", "CUBE")

# register files
TEMP = "temp"  # virtual before allocation, physical after
CONST = "const"  # uniform constant registers c0..
POOL = "pool"  # literal constants before emission
INPUT = "in"
OUTPUT = "out"


@dataclass(frozen=True, order=True)
class Reg:
    file: str
    index: object  # int for temp/const/pool, register name for in/out

    def __str__(self) -> str:
        return {TEMP: "t", CONST: "c", POOL: "k"}.get(self.file, "") + str(self.index)


@dataclass(frozen=True)
class Src:
    reg: Reg
    swizzle: tuple = IDENTITY
    negate: bool = False

    def lane(self, pos: int) -> int:
        return self.swizzle[pos]


@dataclass(frozen=True)
class Dst:
    reg: Reg
    mask: tuple = IDENTITY  # sorted lane indices


@dataclass(frozen=True)
class Instruction:
    op: str
    dst: Optional[Dst]
    srcs: tuple
    unit: Optional[int] = None
    target: Optional[str] = None

    def __post_init__(self):
        if self.op not in ARITY:
            raise ValueError(f"unknown opcode {self.op}")
        if len(self.srcs) != ARITY[self.op]:
            raise ValueError(f"{self.op} takes {ARITY[self.op]} operands, got {len(self.srcs)}")
        if (self.op == "KIL") != (self.dst is None):
            raise ValueError("KIL alone has no destination")
        if self.op in TEXTURE_OPS and (self.unit is None or self.target not in TEX_TARGETS):
            raise ValueError(f"{self.op} needs a texture unit and target")

    def __str__(self) -> str:
        parts = []
        if self.dst is not None:
            m = "" if self.dst.mask == IDENTITY else "." + "".join(LANES[i] for i in self.dst.mask)
            parts.append(f"{self.dst.reg}{m}")
        for s in self.srcs:
            parts.append(("-" if s.negate else "") + f"{s.reg}." + "".join(LANES[i] for i in s.swizzle))
        if self.unit is not None:
            parts += [f"texture[{self.unit}]", self.target]
        return f"{self.op} " + ", ".join(parts)


def read_positions(ins: Instruction, k: int) -> tuple:
    """Swizzle positions of source ``k`` whose lanes affect the result."""
    op = ins.op
    if op == "DP4" or op == "KIL" or op == "TXP":
        return IDENTITY
    if op == "DP3":
        return (0, 1, 2)
    if op in SCALAR_OPS:
        return (0,)
    if op == "TEX":
        return (0, 1) if ins.target == "2D" else (0, 1, 2)
    return ins.dst.mask


def lanes_read(ins: Instruction, k: int) -> frozenset:
    s = ins.srcs[k]
    return frozenset(s.swizzle[p] for p in read_positions(ins, k))


def canonical_swizzle(swz: tuple, positions) -> tuple:
    """Rewrite don't-care positions so the swizzle prints as briefly as possible."""
    positions = tuple(positions)
    if all(swz[p] == p for p in positions):
        return IDENTITY
    used = {swz[p] for p in positions}
    if len(used) == 1:
        return (used.pop(),) * 4
    out = list(swz)
    last = swz[positions[0]]
    for p in range(4):
        if p in positions:
            last = swz[p]
        else:
            out[p] = last
    return tuple(out)


def canonicalize(ins: Instruction) -> Instruction:
    srcs = tuple(replace(s, swizzle=canonical_swizzle(s.swizzle, read_positions(ins, k)))
                 for k, s in enumerate(ins.srcs))
    return replace(ins, srcs=srcs) if srcs != ins.srcs else ins


def pool_key(values) -> bytes:
    return np.asarray(values, dtype=f32).tobytes()


@dataclass
class IRProgram:
    instructions: list
    pool: list  # float4 tuples (python floats exactly representable in binary32)
    bindings: object  # profiles.BindingTable
    profile: object  # profiles.ProfileDescriptor
    allocated: bool = False

    def copy(self) -> "IRProgram":
        return IRProgram(list(self.instructions), list(self.pool), self.bindings, self.profile,
                         self.allocated)

    def structure(self) -> tuple:
        return tuple(self.instructions), tuple(pool_key(p) for p in self.pool)

    def temps(self) -> list:
        seen = []
        for ins in self.instructions:
            regs = ([ins.dst.reg] if ins.dst else []) + [s.reg for s in ins.srcs]
            for r in regs:
                if r.file == TEMP and r not in seen:
                    seen.append(r)
        return seen

    def __str__(self) -> str:
        lines = [f"k{i} = {{{', '.join(repr(v) for v in p)}}}" for i, p in enumerate(self.pool)]
        return "\n".join(lines + [str(i) for i in self.instructions])


# -- instruction semantics (shared by the VM and constant folding) ------------

def fetch(value: np.ndarray, src: Src) -> np.ndarray:
    v = np.asarray(value, dtype=f32)[list(src.swizzle)]
    return -v if src.negate else v


def _min(a, b):
    return np.where(a < b, a, b).astype(f32)


def _max(a, b):
    return np.where(a > b, a, b).astype(f32)


def evaluate(op: str, args: list, sample=None) -> np.ndarray:
    """Result float4 of one ALU/texture opcode on fetched float4 sources."""
    with np.errstate(all="ignore"):
        if op == "MOV":
            return args[0].astype(f32)
        if op == "MUL":
            return (args[0] * args[1]).astype(f32)
        if op == "ADD":
            return (args[0] + args[1]).astype(f32)
        if op == "MAD":
            return ((args[0] * args[1]).astype(f32) + args[2]).astype(f32)
        if op == "DP3":
            return np.full(4, dot32(args[0][:3], args[1][:3]), dtype=f32)
        if op == "DP4":
            return np.full(4, dot32(args[0], args[1]), dtype=f32)
        if op == "RSQ":
            return np.full(4, rsqrt32(args[0][0]), dtype=f32)
        if op == "LG2":
            return np.full(4, log2_32(args[0][0]), dtype=f32)
        if op == "RCP":
            return np.full(4, rcp32(args[0][0]), dtype=f32)
        if op == "MIN":
            return _min(args[0], args[1])
        if op == "MAX":
            return _max(args[0], args[1])
        if op == "SLT":
            return (args[0] < args[1]).astype(f32)
        if op == "SGE":
            return (args[0] >= args[1]).astype(f32)
        if op in TEXTURE_OPS:
            if sample is None:
                raise ValueError("texture instruction without a sampler")
            return np.asarray(sample(args[0]), dtype=f32)
    raise ValueError(f"cannot evaluate {op}")


def pool_source(pool: list, lane_values: dict) -> Src:
    """Source reading ``lane_values[l]`` at swizzle position ``l``; extends ``pool`` if needed.

    Existing entries are reused whenever they already hold every wanted value
    (compared bitwise), so a splat like {2, 2, 2, 2} serves any lane needing 2.
    """
    want = {l: float(f32(v)) for l, v in lane_values.items()}
    keys = {l: pool_key([v]) for l, v in want.items()}
    order = sorted(want)
    fill = order[0]
    for idx, entry in enumerate(pool):
        ekeys = [pool_key([e]) for e in entry]
        if all(k in ekeys for k in keys.values()):
            swz = [0] * 4
            for l in range(4):
                swz[l] = ekeys.index(keys.get(l, keys[fill]))
            return Src(Reg(POOL, idx), tuple(swz))
    if len(set(keys.values())) == 1:
        pool.append((want[fill],) * 4)
        return Src(Reg(POOL, len(pool) - 1), (0, 0, 0, 0))
    entry = [want.get(l, want[fill]) for l in range(4)]
    pool.append(tuple(entry))
    return Src(Reg(POOL, len(pool) - 1), IDENTITY)
