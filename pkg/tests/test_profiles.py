import numpy as np
import pytest

from cgc.diagnostics import CompileError
from cgc.profiles import (LIMIT_NAMES, RECOGNIZED_UNIMPLEMENTED, bind, bind_inputs, bind_uniforms,
                          lookup_profile, parse_limit, validate)
from cgc.vm.asminterp import _constant_file
from cgc.vm import ShadeInput

from conftest import BRIGHT_LIGHT_MAP_DECAL, SIMPLE_TRANSFORM, typed

WITH_TEXTURE = SIMPLE_TRANSFORM.replace(
    "uniform float4x4 modelViewProjection)",
    "uniform float4x4 modelViewProjection,\n uniform sampler2D decal)").replace(
    "oDecalCoord = decalCoord;", "oDecalCoord = tex2Dproj(decal, decalCoord);")


def report_codes(text, entry, profile):
    return [d.code for d in validate(typed(text, entry), profile).diagnostics]


class TestLookup:
    def test_vs_1_1(self):
        p = lookup_profile("vs_1_1")
        assert p.is_vertex and not p.allows_texture_fetch and p.header == "vs.1.1"

    def test_arbfp1(self):
        p = lookup_profile("arbfp1")
        assert not p.is_vertex and p.allows_texture_fetch and p.header == "!!ARBfp1.0"

    def test_no_profile_branches(self):
        assert not any(lookup_profile(n).allows_data_dependent_branch for n in ("vs_1_1", "arbvp1", "arbfp1"))

    @pytest.mark.parametrize("name", sorted(RECOGNIZED_UNIMPLEMENTED))
    def test_unimplemented(self, name):
        with pytest.raises(CompileError) as info:
            lookup_profile(name)
        assert info.value.codes == ["E_UNIMPLEMENTED_PROFILE"]

    def test_recognized_set(self):
        assert set(RECOGNIZED_UNIMPLEMENTED) == {"vs_2_0", "ps_1_3", "ps_2_x", "vp20", "vp30", "fp20", "fp30"}

    def test_unknown(self):
        with pytest.raises(CompileError) as info:
            lookup_profile("vs_9_9")
        assert info.value.codes == ["E_UNKNOWN_PROFILE"]

    def test_default_limits(self):
        assert lookup_profile("vs_1_1").limits["max_instructions"] == 128
        assert lookup_profile("arbvp1").limits["max_temporaries"] == 12
        fp = lookup_profile("arbfp1").limits
        assert (fp["max_instructions"], fp["max_constants"], fp["max_temporaries"], fp["texture_units"]) == (96, 24, 16, 4)

    def test_limits_positive(self):
        for name in ("vs_1_1", "arbvp1", "arbfp1"):
            assert all(v > 0 for k, v in lookup_profile(name).limits.items() if k != "texture_units")

    def test_limit_override(self):
        assert parse_limit("max_instructions=8") == ("max_instructions", 8)
        p = lookup_profile("vs_1_1").with_limits(max_instructions=8)
        assert p.max_instructions == 8 and lookup_profile("vs_1_1").max_instructions == 128

    @pytest.mark.parametrize("text", ["max_instructions", "bogus=3", "max_temporaries=x"])
    def test_bad_limit_text(self, text):
        with pytest.raises(CompileError) as info:
            parse_limit(text)
        assert info.value.codes == ["E_BAD_LIMIT"]

    def test_nonpositive_limit(self):
        with pytest.raises(CompileError) as info:
            lookup_profile("vs_1_1").with_limits(max_instructions=0)
        assert info.value.codes == ["E_BAD_LIMIT"]
        assert set(LIMIT_NAMES) >= {"max_instructions", "max_constants", "max_temporaries"}


class TestValidate:
    def test_texture_in_vertex(self):
        assert report_codes(WITH_TEXTURE, "simpleTransform", lookup_profile("vs_1_1")) == ["E_TEX_IN_VERTEX"]

    def test_frag_texcoord_out(self):
        src = """void f(float4 c : COLOR, out float4 o : COLOR, out float4 t : TEXCOORD0)
                 { o = c; t = c; }"""
        assert report_codes(src, "f", lookup_profile("arbfp1")) == ["E_FRAG_TEXCOORD_OUT"]

    def test_texunits(self):
        src = BRIGHT_LIGHT_MAP_DECAL.replace(
            "uniform sampler2D lightMap)", "uniform sampler2D lightMap,\n uniform sampler2D extra)")
        p = lookup_profile("arbfp1").with_limits(texture_units=2)
        assert report_codes(src, "brightLightMapDecal", p) == ["E_TEXUNITS"]
        assert report_codes(src, "brightLightMapDecal", lookup_profile("arbfp1")) == []

    def test_discard_in_vertex(self):
        src = "void v(float4 p : POSITION, out float4 o : POSITION) { o = p; discard; }"
        assert report_codes(src, "v", lookup_profile("vs_1_1")) == ["E_DISCARD_IN_VERTEX"]

    def test_data_dependent_branch(self):
        src = "float4 f(float4 c : COLOR) : COLOR { if (c.x > 0) c = -c; return c; }"
        assert report_codes(src, "f", lookup_profile("arbfp1")) == ["E_NEEDS_BRANCHING"]

    def test_data_dependent_loop(self):
        src = "float4 f(float4 c : COLOR) : COLOR { for (float i = 0; i < c.x; i++) c *= 0.5; return c; }"
        assert report_codes(src, "f", lookup_profile("arbfp1")) == ["E_NEEDS_BRANCHING"]

    def test_constant_loop_ok(self):
        src = "float4 f(float4 c : COLOR) : COLOR { for (int i = 0; i < 3; i++) c *= 0.5; return c; }"
        assert report_codes(src, "f", lookup_profile("arbfp1")) == []

    def test_discard_pattern_allowed(self):
        src = "float4 f(float4 c : COLOR) : COLOR { if (c.a < 0.5) discard; return c; }"
        assert report_codes(src, "f", lookup_profile("arbfp1")) == []

    def test_variable_index(self):
        src = "float f(float4 c : COLOR, int i : TEXCOORD0) : COLOR { return c[i]; }"
        assert report_codes(src, "f", lookup_profile("arbfp1")) == ["E_VARIABLE_INDEX"]

    def test_report_ok_flag(self):
        rep = validate(typed(SIMPLE_TRANSFORM, "simpleTransform"), lookup_profile("vs_1_1"))
        assert rep.ok and rep.diagnostics == ()

    def test_rejections_contain_sampler_calls(self):
        tree = typed(WITH_TEXTURE, "simpleTransform")
        from cgc.sema import tree as T
        calls = [n for f in tree.reachable() for n in T.walk(f.body) if isinstance(n, T.TCall)]
        assert any(p.kind == "sampler" for c in calls for p, _ in c.sig.params)


class TestBindings:
    def test_vertex_inputs_outputs(self):
        table = bind_inputs(typed(SIMPLE_TRANSFORM, "simpleTransform"), lookup_profile("vs_1_1"))
        ins = {b.semantic: b.register for b in table.inputs}
        assert ins == {"POSITION": "v0", "COLOR": "v5", "TEXCOORD0": "v7", "TEXCOORD1": "v8"}
        assert [b.register for b in table.outputs] == ["oPos", "oD0", "oT0", "oT1"]

    def test_fragment_inputs_outputs(self):
        table = bind_inputs(typed(BRIGHT_LIGHT_MAP_DECAL, "brightLightMapDecal"), lookup_profile("arbfp1"))
        ins = {b.semantic: b.register for b in table.inputs}
        assert ins == {"COLOR": "fragment.color.primary", "TEXCOORD0": "fragment.texcoord[0]",
                       "TEXCOORD1": "fragment.texcoord[1]"}
        assert [(b.path, b.register) for b in table.outputs] == [(("return",), "result.color")]

    def test_arbvp1_outputs(self):
        table = bind_inputs(typed(SIMPLE_TRANSFORM, "simpleTransform"), lookup_profile("arbvp1"))
        assert [b.register for b in table.outputs] == [
            "result.position", "result.color", "result.texcoord[0]", "result.texcoord[1]"]

    def test_no_varyings(self):
        table = bind_inputs(typed("float4 f(uniform float4 k) : COLOR { return k; }", "f"), lookup_profile("arbfp1"))
        assert table.inputs == ()

    def test_uniform_registers(self):
        table = bind_uniforms(typed(SIMPLE_TRANSFORM, "simpleTransform"), lookup_profile("vs_1_1"))
        regs = {u.name: (u.register, u.count) for u in table.uniforms}
        assert regs == {"brightness": (0, 1), "modelViewProjection": (1, 4)}
        assert table.constants_used == 5

    def test_sampler_units(self):
        table = bind_uniforms(typed(BRIGHT_LIGHT_MAP_DECAL, "brightLightMapDecal"), lookup_profile("arbfp1"))
        assert [(s.path[0], s.unit) for s in table.samplers] == [("decal", 0), ("lightMap", 1)]

    def test_no_uniforms(self):
        table = bind_uniforms(typed("float4 f(float4 c : COLOR) : COLOR { return c; }", "f"), lookup_profile("arbfp1"))
        assert table.uniforms == () and table.samplers == ()

    def test_unreferenced_uniform_keeps_register(self):
        src = "float4 f(float4 c : COLOR, uniform float4 unused, uniform float4 k) : COLOR { return c * k; }"
        table = bind_uniforms(typed(src, "f"), lookup_profile("arbfp1"))
        assert [(u.name, u.register) for u in table.uniforms] == [("unused", 0), ("k", 1)]

    def test_bad_semantic(self):
        with pytest.raises(CompileError) as info:
            bind_inputs(typed("float4 f(float4 c : FOG) : COLOR { return c; }", "f"), lookup_profile("arbfp1"))
        assert info.value.codes == ["E_BAD_SEMANTIC"]

    def test_duplicate_semantic(self):
        src = "float4 f(float4 a : COLOR, float4 b : COLOR0) : COLOR { return a + b; }"
        with pytest.raises(CompileError) as info:
            bind_inputs(typed(src, "f"), lookup_profile("arbfp1"))
        assert info.value.codes == ["E_DUPLICATE_SEMANTIC"]

    def test_constant_capacity(self):
        src = "float4 f(float4 c : COLOR, uniform float4 k[30]) : COLOR { return c * k[0]; }"
        with pytest.raises(CompileError) as info:
            bind_uniforms(typed(src, "f"), lookup_profile("arbfp1"))
        assert info.value.codes == ["E_CAPACITY"]

    def test_deterministic(self):
        tree = typed(SIMPLE_TRANSFORM, "simpleTransform")
        assert bind(tree, lookup_profile("vs_1_1")) == bind(tree, lookup_profile("vs_1_1"))

    def test_matrix_rows_in_constant_store(self, vertex_golden):
        m = np.arange(16, dtype=np.float32).reshape(4, 4) * 0.5 - 3
        consts = _constant_file(vertex_golden.listing, ShadeInput(uniforms={
            "modelViewProjection": m.tolist(), "brightness": 2.0}), vertex_golden.bindings)
        base = vertex_golden.bindings.uniform_for(("modelViewProjection",)).register
        for i in range(4):
            assert np.array_equal(consts[base + i], m[i])
        assert consts[0][0] == 2.0
