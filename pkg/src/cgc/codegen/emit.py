"""Assembly text for vs_1_1 and the ARB program formats, and the matching parser."""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..numeric import f32
from .ir import (CONST, IDENTITY, INPUT, LANES, OUTPUT, POOL, TEMP, Dst, Instruction, IRProgram,
                 Reg, Src)

HEADERS = {"vs.1.1": "vs_1_1", "!!ARBvp1.0": "arbvp1", "!!ARBfp1.0": "arbfp1"}
_VS_NAMES = {"LG2": "log"}


class ListingError(ValueError):
    """Assembly text that cannot be parsed."""


@dataclass
class AssemblyListing:
    profile: str
    header: str
    declarations: list
    lines: list  # instruction text, one per instruction
    trailer: Optional[str]
    instructions: list  # structured view with physical register names
    constants: dict = field(default_factory=dict)  # literal constant register -> float4
    locals: dict = field(default_factory=dict)  # constant register -> program.local index
    temps: list = field(default_factory=list)

    @property
    def text(self) -> str:
        parts = [self.header] + self.declarations + self.lines
        if self.trailer:
            parts.append(self.trailer)
        return "\n".join(parts) + "\n"

    @property
    def instruction_count(self) -> int:
        return len(self.instructions)

    def opcode_counts(self) -> dict:
        out: dict = {}
        for ins in self.instructions:
            out[ins.op] = out.get(ins.op, 0) + 1
        return out


def format_number(v: float) -> str:
    x = f32(v)
    if not np.isfinite(x):
        return "nan" if np.isnan(x) else ("inf" if x > 0 else "-inf")
    if x == 0 or 1e-4 <= abs(x) < 1e7:
        return np.format_float_positional(x, unique=True, trim="-")
    return np.format_float_scientific(x, unique=True, trim="-")


def _arb(profile_name: str) -> bool:
    return profile_name.startswith("arb")


def reg_name(reg: Reg, profile_name: str) -> str:
    if reg.file == TEMP:
        return ("R" if _arb(profile_name) else "r") + str(reg.index)
    if reg.file == CONST:
        return f"c{reg.index}"
    if reg.file in (INPUT, OUTPUT):
        return str(reg.index)
    raise ValueError(f"register {reg} has no assembly name")


def swizzle_suffix(swz: tuple) -> str:
    if tuple(swz) == IDENTITY:
        return ""
    if len(set(swz)) == 1:
        return "." + LANES[swz[0]]
    return "." + "".join(LANES[i] for i in swz)


def mask_suffix(mask: tuple) -> str:
    return "" if tuple(mask) == IDENTITY else "." + "".join(LANES[i] for i in mask)


def format_instruction(ins: Instruction, profile_name: str) -> str:
    arb = _arb(profile_name)
    op = ins.op if arb else _VS_NAMES.get(ins.op, ins.op.lower())
    ops = []
    if ins.dst is not None:
        ops.append(reg_name(ins.dst.reg, profile_name) + mask_suffix(ins.dst.mask))
    for s in ins.srcs:
        ops.append(("-" if s.negate else "") + reg_name(s.reg, profile_name) + swizzle_suffix(s.swizzle))
    if ins.unit is not None:
        ops += [f"texture[{ins.unit}]", ins.target]
    text = f"{op} " + ", ".join(ops)
    return text + ";" if arb else text


def emit(ir: IRProgram) -> AssemblyListing:
    """Render an allocated program; literal constants follow the uniform registers."""
    profile = ir.profile
    name = profile.name
    base = ir.bindings.constants_used
    code = []
    for ins in ir.instructions:
        srcs = tuple(replace(s, reg=Reg(CONST, base + s.reg.index)) if s.reg.file == POOL else s
                     for s in ins.srcs)
        code.append(replace(ins, srcs=srcs))
    constants = {base + k: tuple(v) for k, v in enumerate(ir.pool)}
    temps = sorted({r.index for ins in code for r in ([ins.dst.reg] if ins.dst else []) + [s.reg for s in ins.srcs]
                    if r.file == TEMP})
    decls = []
    locals_ = {}
    if _arb(name):
        for u in ir.bindings.uniforms:
            for r in range(u.register, u.register + u.count):
                locals_[r] = r
                decls.append(f"PARAM c{r} = program.local[{r}];")
        for r, v in constants.items():
            decls.append(f"PARAM c{r} = {{{', '.join(format_number(x) for x in v)}}};")
        decls += [f"TEMP R{t};" for t in temps]
        trailer = "END"
    else:
        for r, v in constants.items():
            decls.append(f"def c{r}, {', '.join(format_number(x) for x in v)}")
        trailer = None
    lines = [format_instruction(ins, name) for ins in code]
    return AssemblyListing(name, profile.header, decls, lines, trailer, code, constants, locals_, temps)


# -- parsing -----------------------------------------------------------------

_OPERAND = re.compile(r"^(-?)\s*([A-Za-z_][\w.\[\]]*?)(?:\.([xyzw]{1,4}))?$")
_OPCODES = {"MOV", "MUL", "ADD", "MAD", "DP3", "DP4", "RSQ", "LG2", "RCP", "MIN", "MAX", "SLT",
            "SGE", "TEX", "TXP", "KIL"}


def _parse_reg(name: str, profile, temps: set, consts: set) -> Reg:
    arb = profile.is_arb
    m = re.fullmatch(r"([rR])(\d+)", name)
    if m and (m.group(1) == ("R" if arb else "r")):
        idx = int(m.group(2))
        if arb and idx not in temps:
            raise ListingError(f"temporary {name} is not declared")
        return Reg(TEMP, idx)
    m = re.fullmatch(r"c(\d+)", name)
    if m:
        idx = int(m.group(1))
        if arb and idx not in consts:
            raise ListingError(f"parameter {name} is not declared")
        return Reg(CONST, idx)
    if name in profile.inputs.values():
        return Reg(INPUT, name)
    if name in profile.outputs.values():
        return Reg(OUTPUT, name)
    raise ListingError(f"unknown register {name!r}")


def _swz(text: Optional[str]) -> tuple:
    if not text:
        return IDENTITY
    idx = [LANES.index(ch) for ch in text]
    return tuple(idx + [idx[-1]] * (4 - len(idx)))


def _mask(text: Optional[str]) -> tuple:
    if not text:
        return IDENTITY
    idx = [LANES.index(ch) for ch in text]
    if idx != sorted(set(idx)):
        raise ListingError(f"write mask .{text} must list components in xyzw order")
    return tuple(idx)


def _numbers(text: str) -> tuple:
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise ListingError(f"bad constant {text!r}") from None
    if len(vals) == 1:
        vals *= 4
    if len(vals) != 4:
        raise ListingError(f"constant {text!r} needs 1 or 4 values")
    return tuple(float(f32(v)) for v in vals)


def parse_listing(text: str) -> AssemblyListing:
    """Parse assembly text produced by :func:`emit` (or edited by hand)."""
    from ..profiles import lookup_profile
    raw = text.splitlines()
    body_lines = []
    header = None
    for line in raw:
        line = re.split(r"#|//", line, maxsplit=1)[0].strip()
        if not line:
            continue
        if header is None:
            header = line
            continue
        body_lines.append(line)
    if header not in HEADERS:
        raise ListingError(f"unknown program header {header!r}")
    profile = lookup_profile(HEADERS[header])
    arb = profile.is_arb
    if arb:
        joined = " ".join(body_lines)
        if not re.search(r"\bEND\s*$", joined):
            raise ListingError("ARB program must end with END")
        joined = re.sub(r"\bEND\s*$", "", joined)
        statements = [s.strip() for s in joined.split(";")]
        if statements and statements[-1]:
            raise ListingError(f"statement {statements[-1]!r} is missing its ';'")
        statements = [s for s in statements if s]
    else:
        statements = body_lines
    decls, lines, code = [], [], []
    constants, locals_, temps = {}, {}, []
    for st in statements:
        m = re.fullmatch(r"PARAM\s+c(\d+)\s*=\s*\{([^}]*)\}", st) if arb else None
        if m:
            constants[int(m.group(1))] = _numbers(m.group(2))
            decls.append(st + ";")
            continue
        m = re.fullmatch(r"PARAM\s+c(\d+)\s*=\s*program\.local\[(\d+)\]", st) if arb else None
        if m:
            locals_[int(m.group(1))] = int(m.group(2))
            decls.append(st + ";")
            continue
        m = re.fullmatch(r"TEMP\s+(.+)", st) if arb else None
        if m:
            for name in m.group(1).split(","):
                tm = re.fullmatch(r"R(\d+)", name.strip())
                if not tm:
                    raise ListingError(f"bad TEMP name {name.strip()!r}")
                temps.append(int(tm.group(1)))
            decls.append(st + ";")
            continue
        m = None if arb else re.fullmatch(r"def\s+c(\d+)\s*,\s*(.+)", st)
        if m:
            constants[int(m.group(1))] = _numbers(m.group(2))
            decls.append(st)
            continue
        code.append(_parse_instruction(st, profile, set(temps), set(constants) | set(locals_)))
        lines.append(st + (";" if arb else ""))
    if not arb:
        temps = sorted({r.index for ins in code for r in ([ins.dst.reg] if ins.dst else []) + [s.reg for s in ins.srcs]
                        if r.file == TEMP})
    return AssemblyListing(profile.name, header, decls, lines, "END" if arb else None, code,
                           constants, locals_, temps)


def _parse_instruction(st: str, profile, temps: set, consts: set) -> Instruction:
    parts = st.split(None, 1)
    op = parts[0].upper()
    if op == "LOG" and not profile.is_arb:
        op = "LG2"
    if op not in _OPCODES:
        raise ListingError(f"unknown opcode {parts[0]!r}")
    operands = [o.strip() for o in parts[1].split(",")] if len(parts) > 1 else []
    unit = target = None
    if op in ("TEX", "TXP"):
        if len(operands) != 4:
            raise ListingError(f"{op} needs dst, coordinate, texture[n], target")
        tm = re.fullmatch(r"texture\[(\d+)\]", operands[2])
        if not tm or operands[3] not in ("2D", "3D", "CUBE"):
            raise ListingError(f"bad texture operand in {st!r}")
        unit, target = int(tm.group(1)), operands[3]
        operands = operands[:2]
    parsed = []
    for o in operands:
        m = _OPERAND.match(o)
        if not m:
            raise ListingError(f"bad operand {o!r}")
        parsed.append((m.group(1) == "-", _parse_reg(m.group(2), profile, temps, consts), m.group(3)))
    if op == "KIL":
        dst, srcs = None, parsed
    else:
        if not parsed:
            raise ListingError(f"{op} needs a destination")
        neg, reg, mask = parsed[0]
        if neg or reg.file in (CONST, INPUT):
            raise ListingError(f"{op} cannot write to {reg}")
        dst, srcs = Dst(reg, _mask(mask)), parsed[1:]
    srcs = tuple(Src(reg, _swz(s), neg) for neg, reg, s in srcs)
    for s in srcs:
        if s.reg.file == OUTPUT:
            raise ListingError("output registers cannot be read")
    try:
        return Instruction(op, dst, srcs, unit, target)
    except ValueError as exc:
        raise ListingError(str(exc)) from None
