"""IR optimizer: folding, copy propagation, output retargeting and dead-code removal.

Passes rely on component-SSA: before allocation every temporary lane is
written by exactly one instruction, so any lane can be replaced by its
definition's source without checking for intervening writes.
"""
from __future__ import annotations

from dataclasses import replace

import numpy as np

from ..numeric import f32
from .ir import (OUTPUT, POOL, REPLICATING_OPS, TEMP, TEXTURE_OPS, Dst, Instruction, IRProgram,
                 Reg, Src, canonicalize, evaluate, fetch, lanes_read, pool_source, read_positions)

MAX_ROUNDS = 64


def _defs(code) -> dict:
    out = {}
    for i, ins in enumerate(code):
        if ins.dst is not None and ins.dst.reg.file == TEMP:
            for lane in ins.dst.mask:
                out[(ins.dst.reg, lane)] = i
    return out


def _pool_values(pool, src: Src) -> np.ndarray:
    return fetch(np.asarray(pool[src.reg.index], dtype=f32), src)


def fold_constants(prog: IRProgram) -> IRProgram:
    """Evaluate ALU instructions whose sources are all literal constants."""
    code, pool = [], list(prog.pool)
    for ins in prog.instructions:
        if ins.op in TEXTURE_OPS or not all(s.reg.file == POOL for s in ins.srcs):
            code.append(ins)
            continue
        vals = [_pool_values(pool, s) for s in ins.srcs]
        if ins.op == "KIL":
            lanes = [p for p in read_positions(ins, 0)]
            if all(not (vals[0][p] < 0) for p in lanes):
                continue  # never discards
            code.append(ins)
            continue
        if ins.op == "MOV":
            code.append(ins)
            continue
        result = evaluate(ins.op, vals)
        src = pool_source(pool, {l: result[l] for l in ins.dst.mask})
        code.append(Instruction("MOV", ins.dst, (src,)))
    return IRProgram(code, pool, prog.bindings, prog.profile)


def _is_pool_value(pool, ins, k, value) -> bool:
    s = ins.srcs[k]
    if s.reg.file != POOL:
        return False
    v = _pool_values(pool, s)
    return all(v[p] == value and not np.signbit(v[p]) for p in read_positions(ins, k))


def simplify(prog: IRProgram) -> IRProgram:
    """x*1 -> x and x+0 -> x."""
    code = []
    for ins in prog.instructions:
        if ins.op == "MUL":
            for k in (0, 1):
                if _is_pool_value(prog.pool, ins, k, 1.0):
                    ins = Instruction("MOV", ins.dst, (ins.srcs[1 - k],))
                    break
        elif ins.op == "ADD":
            for k in (0, 1):
                if _is_pool_value(prog.pool, ins, k, 0.0):
                    ins = Instruction("MOV", ins.dst, (ins.srcs[1 - k],))
                    break
        code.append(ins)
    return IRProgram(code, prog.pool, prog.bindings, prog.profile)


def propagate_copies(prog: IRProgram) -> IRProgram:
    """Read through MOVs: a source whose lanes all come from MOVs of one register reads that register."""
    code = list(prog.instructions)
    defs = _defs(code)
    for i, ins in enumerate(code):
        srcs = list(ins.srcs)
        for k, s in enumerate(srcs):
            if s.reg.file != TEMP:
                continue
            positions = read_positions(ins, k)
            movs = []
            for p in positions:
                d = defs.get((s.reg, s.swizzle[p]))
                if d is None or code[d].op != "MOV":
                    break
                movs.append(code[d])
            else:
                origins = {(m.srcs[0].reg, m.srcs[0].negate) for m in movs}
                if len(origins) != 1:
                    continue
                reg, neg = origins.pop()
                swz = list(s.swizzle)
                for p, m in zip(positions, movs):
                    swz[p] = m.srcs[0].swizzle[s.swizzle[p]]
                srcs[k] = Src(reg, tuple(swz), neg != s.negate)
        if tuple(srcs) != ins.srcs:
            code[i] = replace(ins, srcs=tuple(srcs))
    return IRProgram(code, prog.pool, prog.bindings, prog.profile)


def eliminate_dead_code(prog: IRProgram) -> IRProgram:
    """Drop instructions whose results are never used; shrink partially dead write masks."""
    live = set()
    kept = []
    for ins in reversed(prog.instructions):
        if ins.op == "KIL" or ins.dst.reg.file != TEMP:
            new = ins
        else:
            mask = tuple(l for l in ins.dst.mask if (ins.dst.reg, l) in live)
            if not mask:
                continue
            new = ins if mask == ins.dst.mask else replace(ins, dst=Dst(ins.dst.reg, mask))
        for k, s in enumerate(new.srcs):
            if s.reg.file == TEMP:
                live |= {(s.reg, l) for l in lanes_read(new, k)}
        kept.append(new)
    kept.reverse()
    return IRProgram(kept, prog.pool, prog.bindings, prog.profile)


def retarget_outputs(prog: IRProgram) -> IRProgram:
    """``op t; MOV out, t`` -> ``op out`` when t has no other reader."""
    code = list(prog.instructions)
    changed = True
    while changed:
        changed = False
        readers: dict = {}
        for i, ins in enumerate(code):
            for k, s in enumerate(ins.srcs):
                if s.reg.file == TEMP:
                    readers.setdefault(s.reg, set()).add(i)
        for i, mov in enumerate(code):
            if mov.op != "MOV" or mov.dst.reg.file != OUTPUT:
                continue
            s = mov.srcs[0]
            if s.reg.file != TEMP or s.negate or readers.get(s.reg) != {i}:
                continue
            lane_map = {}  # temp lane -> output lanes
            for p in mov.dst.mask:
                lane_map.setdefault(s.swizzle[p], []).append(p)
            defs = [j for j, d in enumerate(code) if d.dst is not None and d.dst.reg == s.reg]
            ok = bool(defs)
            new_defs = {}
            for j in defs:
                d = code[j]
                if any(l not in lane_map for l in d.dst.mask):
                    ok = False
                    break
                if d.op in REPLICATING_OPS:
                    mask = tuple(sorted(p for l in d.dst.mask for p in lane_map[l]))
                elif all(lane_map[l] == [l] for l in d.dst.mask):
                    mask = d.dst.mask
                else:
                    ok = False
                    break
                new_defs[j] = replace(d, dst=Dst(mov.dst.reg, mask))
            covered = {l for j in defs for l in code[j].dst.mask}
            if not ok or covered != set(lane_map):
                continue
            for j, d in new_defs.items():
                code[j] = d
            del code[i]
            changed = True
            break
    return IRProgram(code, prog.pool, prog.bindings, prog.profile)


def prune_pool(prog: IRProgram) -> IRProgram:
    used = sorted({s.reg.index for ins in prog.instructions for s in ins.srcs if s.reg.file == POOL})
    remap = {old: new for new, old in enumerate(used)}
    code = []
    for ins in prog.instructions:
        srcs = tuple(replace(s, reg=Reg(POOL, remap[s.reg.index])) if s.reg.file == POOL else s
                     for s in ins.srcs)
        code.append(canonicalize(replace(ins, srcs=srcs)))
    return IRProgram(code, [prog.pool[i] for i in used], prog.bindings, prog.profile)


PASSES = (fold_constants, simplify, propagate_copies, eliminate_dead_code, retarget_outputs,
          eliminate_dead_code, prune_pool)


def optimize(ir: IRProgram) -> IRProgram:
    """Apply every pass until the program stops changing."""
    prog = ir.copy()
    for _ in range(MAX_ROUNDS):
        before = prog.structure()
        for p in PASSES:
            prog = p(prog)
        if prog.structure() == before:
            return prog
    raise RuntimeError("optimizer did not reach a fixed point")
