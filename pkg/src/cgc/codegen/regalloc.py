"""Linear-scan register allocation over straight-line IR, plus a liveness audit."""
from __future__ import annotations

from dataclasses import replace

from ..diagnostics import CompileError
from .ir import TEMP, Dst, IRProgram, Reg, Src, lanes_read


def intervals(code) -> dict:
    """Virtual temp -> [first definition, last use] instruction indices."""
    out: dict = {}
    for i, ins in enumerate(code):
        regs = [s.reg for s in ins.srcs] + ([ins.dst.reg] if ins.dst is not None else [])
        for r in regs:
            if r.file == TEMP:
                lo, hi = out.get(r, (i, i))
                out[r] = (min(lo, i), max(hi, i))
    return out


def check_capacity(prog: IRProgram, temps_used: int) -> None:
    p = prog.profile
    n = len(prog.instructions)
    if n > p.max_instructions:
        raise CompileError.single("E_CAPACITY", f"program needs {n} instructions; "
                                  f"max_instructions for {p.name} is {p.max_instructions}")
    if temps_used > p.max_temporaries:
        raise CompileError.single("E_CAPACITY", f"program needs {temps_used} temporaries; "
                                  f"max_temporaries for {p.name} is {p.max_temporaries}")
    consts = prog.bindings.constants_used + len(prog.pool)
    if consts > p.max_constants:
        raise CompileError.single("E_CAPACITY", f"program needs {consts} constant registers; "
                                  f"max_constants for {p.name} is {p.max_constants}")


def allocate(ir: IRProgram) -> IRProgram:
    """Map virtual temps to physical registers 0..k-1 in first-use order.

    A register becomes free at the instruction holding its last read, so that
    instruction may reuse it for its own result.
    """
    code = ir.instructions
    spans = intervals(code)
    order = sorted(spans, key=lambda r: (spans[r][0], r.index))
    assignment: dict = {}
    active: list = []  # (end, physical)
    free_regs: list = []
    next_reg = 0
    for vreg in order:
        start, end = spans[vreg]
        still = []
        for e, phys in active:
            if e <= start:
                free_regs.append(phys)
            else:
                still.append((e, phys))
        active = still
        if free_regs:
            free_regs.sort()
            phys = free_regs.pop(0)
        else:
            phys = next_reg
            next_reg += 1
        assignment[vreg] = Reg(TEMP, phys)
        active.append((end, phys))
    out = []
    for ins in code:
        srcs = tuple(replace(s, reg=assignment[s.reg]) if s.reg.file == TEMP else s for s in ins.srcs)
        dst = ins.dst
        if dst is not None and dst.reg.file == TEMP:
            dst = Dst(assignment[dst.reg], dst.mask)
        out.append(replace(ins, srcs=srcs, dst=dst))
    prog = IRProgram(out, list(ir.pool), ir.bindings, ir.profile, allocated=True)
    check_capacity(prog, next_reg)
    return prog


def audit_allocation(virtual: IRProgram, physical: IRProgram) -> list:
    """Problems found by replaying both programs lane by lane; empty when allocation is sound."""
    holder: dict = {}  # (physical reg, lane) -> (virtual reg, lane)
    problems = []
    for i, (v, p) in enumerate(zip(virtual.instructions, physical.instructions)):
        for k, (vs, ps) in enumerate(zip(v.srcs, p.srcs)):
            if vs.reg.file != TEMP:
                continue
            for lane in lanes_read(v, k):
                got = holder.get((ps.reg, lane))
                if got != (vs.reg, lane):
                    problems.append(f"instruction {i} reads {vs.reg}.{lane} from {ps.reg} "
                                    f"which holds {got}")
        if v.dst is not None and v.dst.reg.file == TEMP:
            for lane in v.dst.mask:
                holder[(p.dst.reg, lane)] = (v.dst.reg, lane)
    if len(virtual.instructions) != len(physical.instructions):
        problems.append("instruction counts differ")
    return problems
