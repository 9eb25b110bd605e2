import re

import numpy as np
import pytest

from cgc.codegen import (Dst, Instruction, IRProgram, Reg, Src, allocate, audit_allocation, emit, lower,
                         optimize, parse_listing)
from cgc.codegen.ir import CONST, INPUT, OUTPUT, POOL, TEMP
from cgc.diagnostics import CompileError
from cgc.gen import random_shade
from cgc.pipeline import CompileOptions, compile_source
from cgc.vm import compare, run_asm, run_cg

from conftest import (BRIGHT_LIGHT_MAP_DECAL, CORPUS, CORPUS_CASES, SIMPLE_TRANSFORM, checked,
                      compiled)

PASS_THROUGH = """void v(float4 p : POSITION, float4 t : TEXCOORD0,
                         out float4 o : POSITION, out float4 ot : TEXCOORD0)
{ o = p; ot = t; }"""


def t(i):
    return Reg(TEMP, i)


def virtual_program(code, pool=(), source=PASS_THROUGH, entry="v", profile="vs_1_1"):
    c = checked(source, entry, profile)
    return IRProgram(list(code), list(pool), c.bindings, c.profile)


def lowered(text, entry, profile):
    c = checked(text, entry, profile)
    return lower(c.tree, c.bindings, c.profile)


class TestLower:
    def test_mul_matrix_is_four_dp4(self):
        ir = lowered(SIMPLE_TRANSFORM, "simpleTransform", "vs_1_1")
        dp4 = [i for i in ir.instructions if i.op == "DP4"]
        assert len(dp4) == 4
        consts = sorted(s.reg.index for i in dp4 for s in i.srcs if s.reg.file == CONST)
        assert consts == [1, 2, 3, 4]
        assert all(any(s.reg == Reg(INPUT, "v0") for s in i.srcs) for i in dp4)

    def test_smear_multiply_uses_replicated_swizzle(self, vertex_golden):
        (mul,) = [i for i in vertex_golden.listing.instructions if i.op == "MUL"]
        assert Src(Reg(CONST, 0), (0, 0, 0, 0)) in mul.srcs

    def test_literal_two_in_pool(self):
        ir = optimize(lowered(BRIGHT_LIGHT_MAP_DECAL, "brightLightMapDecal", "arbfp1"))
        assert ir.pool == [(2.0, 2.0, 2.0, 2.0)]
        assert [i.op for i in ir.instructions].count("MUL") == 3

    def test_copy_is_single_mov(self, vertex_golden):
        assert "mov oT0, v7" in vertex_golden.listing.lines
        assert "mov oT1, v8" in vertex_golden.listing.lines

    def test_tex2dproj_is_txp_and_tex2d_is_tex(self):
        src = """float4 f(float4 a : TEXCOORD0, uniform sampler2D s) : COLOR
                 { return tex2Dproj(s, a) + tex2D(s, a.xy); }"""
        ops = [i.op for i in compiled(src, "f", "arbfp1").listing.instructions]
        assert ops.count("TXP") == 1 and ops.count("TEX") == 1

    def test_discard_is_kil(self):
        src = "float4 f(float4 c : COLOR) : COLOR { if (c.a < 0.5) discard; return c; }"
        ops = [i.op for i in compiled(src, "f", "arbfp1").listing.instructions]
        assert "KIL" in ops

    def test_constant_if_folded(self):
        src = "float4 f(float4 c : COLOR) : COLOR { if (1 > 2) c = -c; return c; }"
        assert compiled(src, "f", "arbfp1").listing.lines == ["MOV result.color, fragment.color.primary;"]

    def test_loop_unrolled(self):
        src = "float4 f(float4 c : COLOR) : COLOR { float4 s = c; for (int i = 0; i < 3; i++) s = s * c; return s; }"
        ops = [i.op for i in compiled(src, "f", "arbfp1").listing.instructions]
        assert ops == ["MUL"] * 3

    def test_function_inlined(self):
        src = """float4 twice(float4 x) { return x + x; }
                 float4 f(float4 c : COLOR) : COLOR { return twice(twice(c)); }"""
        ops = [i.op for i in compiled(src, "f", "arbfp1").listing.instructions]
        assert ops == ["ADD", "ADD"]

    def test_ssa_before_allocation(self):
        ir = lowered(BRIGHT_LIGHT_MAP_DECAL, "brightLightMapDecal", "arbfp1")
        seen = set()
        for ins in ir.instructions:
            if ins.dst is not None and ins.dst.reg.file == TEMP:
                lanes = {(ins.dst.reg, m) for m in ins.dst.mask}
                assert not lanes & seen
                seen |= lanes

    def test_texture_ops_absent_from_vertex_code(self):
        for name, entry, profile in CORPUS_CASES:
            if profile == "arbfp1":
                continue
            listing = compiled((CORPUS / name).read_text(), entry, profile).listing
            assert not {"TEX", "TXP", "KIL"} & set(listing.opcode_counts())


class TestOptimize:
    def test_mov_chain(self):
        code = [Instruction("MOV", Dst(t(0)), (Src(Reg(INPUT, "v7")),)),
                Instruction("MOV", Dst(Reg(OUTPUT, "oT0")), (Src(t(0)),)),
                Instruction("MOV", Dst(Reg(OUTPUT, "oPos")), (Src(Reg(INPUT, "v0")),))]
        out = optimize(virtual_program(code))
        assert Instruction("MOV", Dst(Reg(OUTPUT, "oT0")), (Src(Reg(INPUT, "v7")),)) in out.instructions
        assert len(out.instructions) == 2

    def test_mov_chain_equivalent(self):
        code = [Instruction("MOV", Dst(t(0)), (Src(Reg(INPUT, "v7")),)),
                Instruction("MOV", Dst(Reg(OUTPUT, "oT0")), (Src(t(0)),)),
                Instruction("MOV", Dst(Reg(OUTPUT, "oPos")), (Src(Reg(INPUT, "v0")),))]
        before = virtual_program(code)
        after = optimize(before)
        c = checked(PASS_THROUGH, "v", "vs_1_1")
        rng = np.random.default_rng(5)
        for _ in range(100):
            shade = random_shade(c.tree, rng)
            a = run_asm(emit(allocate(before)), shade, c.bindings)
            b = run_asm(emit(allocate(after)), shade, c.bindings)
            assert compare(a, b).equal

    def test_dead_chain_removed(self):
        code = [Instruction("ADD", Dst(t(0)), (Src(Reg(INPUT, "v0")), Src(Reg(INPUT, "v7")))),
                Instruction("MUL", Dst(t(1)), (Src(t(0)), Src(t(0)))),
                Instruction("MOV", Dst(Reg(OUTPUT, "oPos")), (Src(Reg(INPUT, "v0")),)),
                Instruction("MOV", Dst(Reg(OUTPUT, "oT0")), (Src(Reg(INPUT, "v7")),))]
        out = optimize(virtual_program(code))
        assert [i.op for i in out.instructions] == ["MOV", "MOV"]
        assert not out.temps()

    def test_multiply_by_one(self):
        code = [Instruction("MUL", Dst(t(0)), (Src(Reg(POOL, 0), (0, 0, 0, 0)), Src(Reg(INPUT, "v7")))),
                Instruction("MOV", Dst(Reg(OUTPUT, "oT0")), (Src(t(0)),)),
                Instruction("MOV", Dst(Reg(OUTPUT, "oPos")), (Src(Reg(INPUT, "v0")),))]
        out = optimize(virtual_program(code, pool=[(1.0, 1.0, 1.0, 1.0)]))
        assert "MUL" not in [i.op for i in out.instructions]
        assert out.pool == []

    def test_constant_folding(self):
        src = "float4 f(float4 c : COLOR) : COLOR { float4 k = float4(1, 2, 3, 4) * 2; return c * k; }"
        listing = compiled(src, "f", "arbfp1").listing
        assert list(listing.constants.values()) == [(2.0, 4.0, 6.0, 8.0)]
        assert listing.lines == ["MUL result.color, fragment.color.primary, c0;"]

    def test_pool_dedup(self):
        src = "float4 f(float4 c : COLOR, float4 d : TEXCOORD0) : COLOR { return c * 3.0 + d * 3.0; }"
        assert len(compiled(src, "f", "arbfp1").listing.constants) == 1

    def test_idempotent_on_corpus(self):
        for name, entry, profile in CORPUS_CASES:
            c = checked((CORPUS / name).read_text(), entry, profile)
            once = optimize(lower(c.tree, c.bindings, c.profile))
            assert optimize(once).structure() == once.structure(), (name, profile)

    @pytest.mark.parametrize("name,entry,profile", CORPUS_CASES)
    def test_optimized_matches_unoptimized(self, name, entry, profile):
        text = (CORPUS / name).read_text()
        fast = compiled(text, entry, profile)
        slow = compile_source(text, CompileOptions(entry, profile, optimize=False))
        assert fast.listing.instruction_count <= slow.listing.instruction_count
        rng = np.random.default_rng(11)
        for _ in range(100):
            shade = random_shade(fast.tree, rng)
            a = run_asm(fast.listing, shade, fast.bindings)
            b = run_asm(slow.listing, shade, slow.bindings)
            assert compare(a, b).equal, compare(a, b).detail


class TestAllocate:
    def test_fragment_golden_three_temps(self, fragment_golden):
        assert fragment_golden.listing.temps == [0, 1, 2]

    def test_vertex_golden_no_temps(self, vertex_golden):
        assert vertex_golden.listing.temps == []
        assert not any(re.search(r"\br\d", line) for line in vertex_golden.listing.lines)

    def test_first_use_order(self, fragment_golden):
        first = []
        for ins in fragment_golden.physical.instructions:
            if ins.dst and ins.dst.reg.file == TEMP and ins.dst.reg.index not in first:
                first.append(ins.dst.reg.index)
        assert first == [0, 1, 2]

    @pytest.mark.parametrize("name,entry,profile", CORPUS_CASES)
    def test_audit_clean(self, name, entry, profile):
        c = compiled((CORPUS / name).read_text(), entry, profile)
        assert audit_allocation(c.virtual, c.physical) == []

    def test_audit_catches_clobber(self):
        code = [Instruction("MOV", Dst(t(0)), (Src(Reg(INPUT, "v0")),)),
                Instruction("MOV", Dst(t(1)), (Src(Reg(INPUT, "v7")),)),
                Instruction("ADD", Dst(Reg(OUTPUT, "oPos")), (Src(t(0)), Src(t(1)))),
                Instruction("MOV", Dst(Reg(OUTPUT, "oT0")), (Src(Reg(INPUT, "v7")),))]
        virtual = virtual_program(code)
        squashed = [Instruction(i.op, Dst(t(0)) if i.dst.reg.file == TEMP else i.dst,
                                tuple(Src(t(0)) if s.reg.file == TEMP else s for s in i.srcs)) for i in code]
        physical = IRProgram(squashed, [], virtual.bindings, virtual.profile, allocated=True)
        assert audit_allocation(virtual, physical)

    def test_instruction_capacity(self):
        with pytest.raises(CompileError) as info:
            compiled(SIMPLE_TRANSFORM, "simpleTransform", "vs_1_1", max_instructions=3)
        assert info.value.codes == ["E_CAPACITY"]
        assert "max_instructions" in info.value.diagnostics[0].message

    def test_exact_instruction_limit_fits(self):
        assert compiled(SIMPLE_TRANSFORM, "simpleTransform", "vs_1_1", max_instructions=7).listing.instruction_count == 7

    def test_temporary_capacity(self):
        with pytest.raises(CompileError) as info:
            compiled(BRIGHT_LIGHT_MAP_DECAL, "brightLightMapDecal", "arbfp1", max_temporaries=2)
        assert "max_temporaries" in info.value.diagnostics[0].message

    def test_constant_capacity(self):
        with pytest.raises(CompileError) as info:
            compiled("float4 f(float4 c : COLOR, uniform float4 k) : COLOR { return c * k + 3.0; }",
                     "f", "arbfp1", max_constants=1)
        assert info.value.codes == ["E_CAPACITY"]
        assert "max_constants" in info.value.diagnostics[0].message


class TestEmit:
    def test_vertex_golden(self, vertex_golden):
        listing = vertex_golden.listing
        assert listing.text.splitlines()[0] == "vs.1.1"
        assert listing.opcode_counts() == {"MOV": 2, "DP4": 4, "MUL": 1}
        assert listing.trailer is None
        assert sorted(listing.lines) == sorted([
            "dp4 oPos.x, c1, v0", "dp4 oPos.y, c2, v0", "dp4 oPos.z, c3, v0", "dp4 oPos.w, c4, v0",
            "mul oD0, c0.x, v5", "mov oT0, v7", "mov oT1, v8"])

    def test_fragment_golden(self, fragment_golden):
        text = fragment_golden.text
        lines = text.splitlines()
        assert lines[0] == "!!ARBfp1.0" and lines[-1] == "END" and text.endswith("END\n")
        assert fragment_golden.listing.opcode_counts() == {"TXP": 2, "MUL": 3}
        assert [l for l in lines if l.startswith("PARAM") and "{" in l] == ["PARAM c0 = {2, 2, 2, 2};"]
        assert [l for l in lines if l.startswith("TEMP")] == ["TEMP R0;", "TEMP R1;", "TEMP R2;"]
        assert "TXP R0, fragment.texcoord[0], texture[0], 2D;" in lines
        assert "TXP R1, fragment.texcoord[1], texture[1], 2D;" in lines
        assert not any("program.local" in l for l in lines)

    def test_arbvp1_header(self):
        text = compiled(SIMPLE_TRANSFORM, "simpleTransform", "arbvp1").text
        assert text.startswith("!!ARBvp1.0\n") and text.endswith("\nEND\n")
        assert "DP4 result.position.x, c1, vertex.position;" in text

    def test_minimal_vertex_program(self):
        src = "void v(out float4 o : POSITION) { o = float4(0, 0, 0, 1); }"
        listing = compiled(src, "v", "vs_1_1").listing
        assert listing.header == "vs.1.1" and listing.instruction_count <= 2

    def test_vs_log_name(self):
        src = "void v(float4 p : POSITION, out float4 o : POSITION) { o = p; o.x = log2(p.y); }"
        assert any(l.startswith("log ") for l in compiled(src, "v", "vs_1_1").listing.lines)

    @pytest.mark.parametrize("name,entry,profile", CORPUS_CASES)
    def test_round_trip(self, name, entry, profile):
        listing = compiled((CORPUS / name).read_text(), entry, profile).listing
        again = parse_listing(listing.text)
        assert again.instructions == listing.instructions
        assert again.constants == listing.constants
        assert again.text == listing.text

    def test_deterministic(self):
        assert compiled(BRIGHT_LIGHT_MAP_DECAL, "brightLightMapDecal", "arbfp1").text == \
            compiled(BRIGHT_LIGHT_MAP_DECAL, "brightLightMapDecal", "arbfp1").text


class TestParseListing:
    def test_dp4_operand_order(self, vertex_golden):
        swapped = vertex_golden.text.replace("c1, v0", "v0, c1")
        listing = parse_listing(swapped)
        rng = np.random.default_rng(2)
        for _ in range(20):
            shade = random_shade(vertex_golden.tree, rng)
            assert compare(run_asm(listing, shade, vertex_golden.bindings),
                           run_asm(vertex_golden.listing, shade, vertex_golden.bindings)).equal

    def test_multi_temp_declaration_and_comments(self):
        text = "!!ARBfp1.0\n# comment\nTEMP R0, R1;\nMOV R0, fragment.color.primary; MOV R1, R0;\n" \
               "MOV result.color, R1;\nEND\n"
        listing = parse_listing(text)
        assert listing.temps == [0, 1] and listing.instruction_count == 3

    @pytest.mark.parametrize("text", [
        "vs.2.0\nmov oPos, v0\n",
        "!!ARBfp1.0\nMOV result.color, fragment.color.primary;\n",
        "!!ARBfp1.0\nMOV result.color, R0;\nEND\n",
        "!!ARBfp1.0\nMOV result.color, c0;\nEND\n",
        "!!ARBfp1.0\nFOO result.color, fragment.color.primary;\nEND\n",
        "!!ARBfp1.0\nMOV fragment.color.primary, result.color;\nEND\n",
        "!!ARBfp1.0\nTEMP R0;\nMOV R0.yx, fragment.color.primary;\nEND\n",
        "!!ARBfp1.0\nTXP result.color, fragment.texcoord[0], texture[0], 1D;\nEND\n",
        "vs.1.1\nadd oPos, v0\n",
    ])
    def test_rejects(self, text):
        from cgc.codegen import ListingError
        with pytest.raises(ListingError):
            parse_listing(text)


def test_runtime_division_within_tolerance():
    src = "float4 f(float4 a : COLOR, float4 b : TEXCOORD0) : COLOR { return a / b.w; }"
    comp = compiled(src, "f", "arbfp1")
    assert "RCP" in comp.listing.opcode_counts()
    rng = np.random.default_rng(17)
    for _ in range(500):
        shade = random_shade(comp.tree, rng)
        verdict = compare(run_cg(comp.tree, shade), run_asm(comp.listing, shade, comp.bindings))
        assert verdict.equal, verdict.detail
