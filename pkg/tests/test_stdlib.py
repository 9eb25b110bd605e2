import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cgc.numeric import f32
from cgc.stdlib import (CATALOGUE, SamplerValue, TextureImage, builtin_signatures, descriptor,
                        dump_texture, eval_builtin, load_texture, sample_texture)
from cgc.types import matrix, sampler, scalar, vector

F4 = vector("float", 4)
finite = st.floats(-8, 8, allow_nan=False, width=32)


def sig(name, *params):
    for s in builtin_signatures(name):
        if [p for p, _ in s.params] == list(params):
            return s
    raise LookupError(name)


def gradient(w=4, h=4, d=1):
    texels = np.zeros((d, h, w, 4), dtype=f32)
    for z in range(d):
        for y in range(h):
            for x in range(w):
                texels[z, y, x] = (x, y, z, 1)
    return TextureImage(w, h, d, texels)


class TestCatalogue:
    def test_mul_has_matrix_vector(self):
        assert any(s.params[0][0] == matrix("float", 4, 4) and s.params[1][0] == F4 and s.ret == F4
                   for s in builtin_signatures("mul"))

    def test_mul_covers_all_dims(self):
        shapes = {(s.params[0][0].rows, s.params[0][0].cols) for s in builtin_signatures("mul")
                  if s.params[0][0].kind == "matrix" and s.params[1][0].kind == "vector"}
        assert shapes == {(r, c) for r in range(1, 5) for c in range(1, 5)}

    def test_tex2dproj(self):
        (s,) = builtin_signatures("tex2Dproj")
        assert [p for p, _ in s.params] == [sampler("2D"), F4] and s.ret == F4

    def test_unknown_is_empty(self):
        assert builtin_signatures("strlen") == []
        assert descriptor("strlen") is None

    def test_every_overload_has_evaluator_and_lowering(self):
        for d in CATALOGUE.values():
            assert d.overloads and d.evaluator and d.lowering

    def test_texture_functions_have_no_vertex_lowering(self):
        for name in ("tex2D", "tex2Dproj", "tex3Dproj", "texCUBE"):
            assert not descriptor(name).lowers_in("vs_1_1")
            assert descriptor(name).lowers_in("arbfp1")


class TestEvaluation:
    def test_mul_identity(self):
        s = sig("mul", matrix("float", 4, 4), F4)
        out = eval_builtin(s, [np.eye(4, dtype=f32), np.array([1, 2, 3, 4], dtype=f32)])
        assert list(out) == [1, 2, 3, 4]

    def test_reflect(self):
        s = sig("reflect", vector("float", 3), vector("float", 3))
        out = eval_builtin(s, [np.array([1, -1, 0], dtype=f32), np.array([0, 1, 0], dtype=f32)])
        assert list(out) == [1, 1, 0]

    def test_rsqrt_nonpositive_is_nan_or_inf(self):
        s = sig("rsqrt", scalar("float"))
        assert math.isnan(float(eval_builtin(s, [f32(-1.0)])))

    @settings(max_examples=200, deadline=None)
    @given(st.lists(finite, min_size=4, max_size=4))
    def test_abs_idempotent(self, xs):
        s = sig("abs", F4)
        once = eval_builtin(s, [np.array(xs, dtype=f32)])
        assert np.array_equal(eval_builtin(s, [once]), once)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(finite, min_size=3, max_size=3), st.floats(0, 2 * math.pi), st.floats(0, math.pi))
    def test_reflect_preserves_length(self, i, theta, phi):
        n = np.array([math.sin(phi) * math.cos(theta), math.sin(phi) * math.sin(theta), math.cos(phi)], dtype=f32)
        v = np.array(i, dtype=f32)
        r = eval_builtin(sig("reflect", vector("float", 3), vector("float", 3)), [v, n])
        assert abs(np.linalg.norm(r.astype(float)) - np.linalg.norm(v.astype(float))) <= 1e-5


class TestSampling:
    def test_proj_w1_equals_tex2d(self):
        s = SamplerValue(0, gradient())
        for u, v in [(0.1, 0.9), (0.5, 0.5), (0.99, 0.0), (-1, 3)]:
            assert np.array_equal(sample_texture("tex2Dproj", s, [u, v, 0, 1]),
                                  sample_texture("tex2D", s, [u, v]))

    @settings(max_examples=300, deadline=None)
    @given(st.floats(-2, 2, allow_nan=False, width=32), st.floats(-2, 2, allow_nan=False, width=32),
           st.floats(0.25, 8, width=32), st.sampled_from([1.0, 2.0, 4.0, 0.5, -1.0, -2.0]))
    def test_proj_homogeneous(self, u, v, w, k):
        # power-of-two scales keep the scaled coordinate exactly representable
        s = SamplerValue(0, gradient(8, 8))
        c = np.array([u, v, 0, w], dtype=f32)
        assert np.array_equal(sample_texture("tex2Dproj", s, c * f32(k)), sample_texture("tex2Dproj", s, c))

    def test_zero_w_gives_zero(self):
        s = SamplerValue(0, TextureImage.solid([1, 1, 1, 1]))
        assert list(sample_texture("tex2Dproj", s, [0.5, 0.5, 0, 0])) == [0, 0, 0, 0]

    def test_nearest_clamp(self):
        s = SamplerValue(0, gradient())
        assert list(sample_texture("tex2D", s, [0.0, 0.0])) == [0, 0, 0, 1]
        assert list(sample_texture("tex2D", s, [0.26, 0.74])) == [1, 2, 0, 1]
        assert list(sample_texture("tex2D", s, [1.0, 5.0])) == [3, 3, 0, 1]
        assert list(sample_texture("tex2D", s, [-3.0, 0.5])) == [0, 2, 0, 1]

    def test_3d(self):
        s = SamplerValue(0, gradient(2, 2, 4), "3D")
        assert list(sample_texture("tex3Dproj", s, [0.9, 0.1, 0.6, 1])) == [1, 0, 2, 1]

    @pytest.mark.parametrize("direction, face", [
        ([1, 0, 0], 0), ([-1, 0, 0], 1), ([0, 1, 0], 2), ([0, -1, 0], 3), ([0, 0, 1], 4), ([0, 0, -1], 5)])
    def test_cube_faces(self, direction, face):
        texels = np.zeros((6, 1, 1, 4), dtype=f32)
        texels[:, 0, 0, 0] = np.arange(6)
        s = SamplerValue(0, TextureImage(1, 1, 6, texels), "CUBE")
        assert sample_texture("texCUBE", s, direction)[0] == face

    def test_texture_file_round_trip(self, tmp_path):
        img = gradient(3, 2)
        path = tmp_path / "g.tex"
        path.write_text(dump_texture(img))
        back = load_texture(path)
        assert (back.width, back.height, back.depth) == (3, 2, 1)
        assert np.array_equal(back.texels, img.texels)

    def test_texture_file_row_major(self, tmp_path):
        path = tmp_path / "t.tex"
        path.write_text("2 1\n1 0 0 1\n0 1 0 1\n")
        img = load_texture(path)
        assert list(img.texel(1, 0)) == [0, 1, 0, 1]

    def test_bad_texture_file(self, tmp_path):
        path = tmp_path / "bad.tex"
        path.write_text("2 2\n1 1 1 1\n")
        with pytest.raises(ValueError):
            load_texture(path)
