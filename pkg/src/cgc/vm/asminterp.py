"""Reference interpreter for emitted assembly listings."""
from __future__ import annotations

import numpy as np

from .. import stdlib
from ..codegen.emit import AssemblyListing, ListingError, parse_listing
from ..codegen.ir import CONST, INPUT, OUTPUT, TEMP, evaluate, fetch, lanes_read
from ..numeric import f32
from ..types import MATRIX
from .state import ExecResult, ShadeInput, VMError, coerce_value, convert_array, pad_output

_SAMPLE_KIND = {("TEX", "2D"): "tex2D", ("TXP", "2D"): "tex2Dproj", ("TXP", "3D"): "tex3Dproj",
                ("TEX", "CUBE"): "texCUBE", ("TXP", "CUBE"): "texCUBE"}


def _lookup(uniforms: dict, path: tuple):
    node = uniforms
    for k in path:
        try:
            node = node[k]
        except (KeyError, IndexError, TypeError):
            return None
    return node


def _constant_file(listing: AssemblyListing, shade: ShadeInput, bindings) -> dict:
    """Constant register -> float4, or a string explaining why it has no value."""
    regs: dict = {r: np.asarray(v, dtype=f32) for r, v in listing.constants.items()}
    for u in bindings.uniforms:
        raw = _lookup(shade.uniforms, u.path)
        if raw is None:
            for r in range(u.register, u.register + u.count):
                regs[r] = f"uniform '{u.name}' was not supplied"
            continue
        val = np.asarray(coerce_value(raw, u.type, f"uniform '{u.name}'"), dtype=f32)
        rows = val.reshape(u.type.rows, u.type.cols) if u.type.kind == MATRIX else val.reshape(1, -1)
        for i, row in enumerate(rows):
            reg = np.zeros(4, dtype=f32)
            reg[:row.size] = row
            regs[u.register + i] = reg
    return regs


def _input_file(shade: ShadeInput, bindings) -> dict:
    regs = {}
    for v in bindings.inputs:
        try:
            value = shade.varying_value(v.semantic)
        except VMError as exc:
            regs[v.register] = str(exc)
            continue
        n = int(np.prod(v.type.shape)) if v.type.shape else 1
        value[:n] = convert_array(value[:n], v.type.base).astype(f32)
        regs[v.register] = value
    return regs


def run_asm(listing, shade: ShadeInput, bindings) -> ExecResult:
    """Execute ``listing`` (text or :class:`AssemblyListing`) on one vertex or fragment.

    Uniforms and varyings reach registers through ``bindings``; reading a lane
    nobody wrote raises :class:`VMError`.
    """
    if isinstance(listing, str):
        try:
            listing = parse_listing(listing)
        except ListingError as exc:
            raise VMError(f"malformed listing: {exc}") from None
    consts = _constant_file(listing, shade, bindings)
    inputs = _input_file(shade, bindings)
    temps: dict = {}
    written: dict = {}
    outputs: dict = {}
    out_written: dict = {}
    samplers = {s.unit: s for s in bindings.samplers}

    def read(ins, k):
        s = ins.srcs[k]
        r = s.reg
        if r.file == CONST:
            v = consts.get(r.index)
            if v is None:
                raise VMError(f"constant register c{r.index} has no value")
        elif r.file == INPUT:
            v = inputs.get(r.index)
            if v is None:
                raise VMError(f"input register {r.index} is not bound")
        elif r.file == TEMP:
            v = temps.get(r.index)
            have = written.get(r.index, set())
            missing = lanes_read(ins, k) - have
            if missing:
                lanes = "".join("xyzw"[i] for i in sorted(missing))
                raise VMError(f"{ins.op} reads uninitialized lanes .{lanes} of temporary {r.index}")
        else:
            raise VMError(f"cannot read register {r}")
        if isinstance(v, str):
            raise VMError(v)
        return fetch(v, s)

    for ins in listing.instructions:
        args = [read(ins, k) for k in range(len(ins.srcs))]
        if ins.op == "KIL":
            if any(args[0][p] < 0 for p in range(4)):
                return ExecResult({}, True)
            continue
        sample = None
        if ins.unit is not None:
            kind = _SAMPLE_KIND.get((ins.op, ins.target))
            binding = samplers.get(ins.unit)
            image = shade.textures.get(ins.unit, shade.textures.get(str(ins.unit)))
            if image is None:
                raise VMError(f"no texture bound to unit {ins.unit}")
            if kind is None:
                if (ins.op, ins.target) != ("TEX", "3D"):
                    raise VMError(f"unsupported texture instruction {ins.op} {ins.target}")
                sample = lambda c: stdlib.sample3d(image, c[0], c[1], c[2])  # noqa: E731
            else:
                sv = stdlib.SamplerValue(ins.unit, image, binding.type.sampler_dim if binding else ins.target)
                sample = lambda c: stdlib.sample_texture(kind, sv, c)  # noqa: E731
        try:
            result = evaluate(ins.op, args, sample)
        except ValueError as exc:
            raise VMError(str(exc)) from None
        dst = ins.dst
        if dst.reg.file == TEMP:
            reg = temps.setdefault(dst.reg.index, np.zeros(4, dtype=f32))
            written.setdefault(dst.reg.index, set()).update(dst.mask)
        elif dst.reg.file == OUTPUT:
            reg = outputs.setdefault(dst.reg.index, np.zeros(4, dtype=f32))
            out_written.setdefault(dst.reg.index, set()).update(dst.mask)
        else:
            raise VMError(f"cannot write register {dst.reg}")
        for lane in dst.mask:
            reg[lane] = result[lane]

    results = {}
    for ob in bindings.outputs:
        n = int(np.prod(ob.type.shape)) if ob.type.shape else 1
        have = out_written.get(ob.register, set())
        if not set(range(n)) <= have:
            raise VMError(f"output {ob.register} ({ob.semantic}) was not fully written")
        value = convert_array(outputs[ob.register][:n], ob.type.base).astype(f32)
        results[ob.semantic] = pad_output(value)
    return ExecResult(results, False)
