import io
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from cgc.cli import main

from conftest import CORPUS, SIMPLE_TRANSFORM

ERRORS = CORPUS / "errors"
VECTORS = CORPUS / "vectors"


def cgc(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def vertex(*extra):
    return ("compile", CORPUS / "simple_transform.cg", "--entry", "simpleTransform", "--profile", "vs_1_1", *extra)


def test_compile_vertex():
    code, out, _ = cgc(*vertex())
    assert code == 0 and out.startswith("vs.1.1\n")


def test_compile_to_file(tmp_path):
    target = tmp_path / "st.vsh"
    code, out, _ = cgc(*vertex("--out", target))
    assert code == 0 and out == ""
    assert target.read_text().startswith("vs.1.1\n")


def test_compile_deterministic():
    assert cgc(*vertex())[1] == cgc(*vertex())[1]


def test_texture_in_vertex():
    code, _, err = cgc("compile", ERRORS / "tex_in_vertex.cg", "--entry", "simpleTransform", "--profile", "vs_1_1")
    assert code == 2 and "E_TEX_IN_VERTEX" in err


def test_capacity_override():
    code, _, err = cgc(*vertex("--limit", "max_instructions=3"))
    assert code == 2 and "E_CAPACITY" in err


def test_bad_limit():
    code, _, err = cgc(*vertex("--limit", "max_widgets=3"))
    assert code == 2 and "E_BAD_LIMIT" in err


def test_missing_file(tmp_path):
    code, _, err = cgc("compile", tmp_path / "absent.cg", "--entry", "main", "--profile", "vs_1_1")
    assert code == 1 and err


@pytest.mark.parametrize("argv", [
    ["compile"],
    ["compile", "x.cg", "--profile", "vs_1_1"],
    ["frobnicate", "x.cg"],
    ["compile", "x.cg", "--entry", "e", "--profile", "vs_1_1", "--diag-format", "xml"],
])
def test_usage_errors(argv):
    assert cgc(*argv)[0] == 1


def test_unknown_profile():
    code, _, err = cgc("compile", CORPUS / "simple_transform.cg", "--entry", "simpleTransform", "--profile", "vs_9_9")
    assert code == 2 and "E_UNKNOWN_PROFILE" in err


def test_check_ok():
    code, out, _ = cgc("check", CORPUS / "bright_light_map_decal.cg", "--entry", "brightLightMapDecal",
                       "--profile", "arbfp1")
    assert code == 0 and "ok" in out


def test_check_frag_texcoord_json():
    code, _, err = cgc("check", ERRORS / "frag_texcoord_out.cg", "--entry", "passCoord", "--profile", "arbfp1",
                       "--diag-format", "json-lines")
    assert code == 2
    records = [json.loads(line) for line in err.splitlines()]
    assert [r["code"] for r in records] == ["E_FRAG_TEXCOORD_OUT"]
    assert set(records[0]) >= {"code", "severity", "line", "column", "message"}
    assert records[0]["severity"] == "error" and records[0]["line"] >= 1
    assert records[0]["file"].endswith("frag_texcoord_out.cg")


def test_check_recursion():
    code, _, err = cgc("check", ERRORS / "recursion.cg", "--entry", "main", "--profile", "arbvp1")
    assert code == 2 and "E_RECURSION" in err


def test_human_diagnostic_has_location():
    code, _, err = cgc("check", ERRORS / "recursion.cg", "--entry", "main", "--profile", "vs_1_1")
    assert code == 2 and "recursion.cg:" in err


def test_run_identity():
    code, out, _ = cgc("run", CORPUS / "simple_transform.cg", "--entry", "simpleTransform", "--profile", "vs_1_1",
                       "--vectors", VECTORS / "identity.json")
    assert code == 0 and "agree" in out and "MISMATCH" not in out
    vec = json.loads((VECTORS / "identity.json").read_text())
    cg_line = next(line for line in out.splitlines() if " cg: " in line)
    for sem, value in vec["varying"].items():
        shown = ", ".join(f"{float(np.float32(v)):.9g}" for v in value)
        assert f"{sem} = ({shown})" in cg_line


def test_run_fragment_white():
    code, out, _ = cgc("run", CORPUS / "bright_light_map_decal.cg", "--entry", "brightLightMapDecal",
                       "--profile", "arbfp1", "--vectors", VECTORS / "white_half_gray.json")
    assert code == 0
    assert "COLOR = (1, 1, 1, 1)" in out


def test_run_corrupted_listing(tmp_path):
    code, text, _ = cgc("compile", CORPUS / "bright_light_map_decal.cg", "--entry", "brightLightMapDecal",
                        "--profile", "arbfp1")
    assert code == 0
    bad = tmp_path / "bad.afp"
    bad.write_text(text.replace("MUL result.color", "ADD result.color"))
    code, out, _ = cgc("run", CORPUS / "bright_light_map_decal.cg", "--entry", "brightLightMapDecal",
                       "--profile", "arbfp1", "--vectors", VECTORS / "white_half_gray.json", "--asm-override", bad)
    assert code == 3 and "MISMATCH" in out


def test_run_tolerance_flag(tmp_path):
    _, text, _ = cgc(*vertex())
    nudged = tmp_path / "nudged.vsh"
    nudged.write_text(text.replace("mov oT0, v7", "def c9, 0.000001, 0, 0, 0\nadd oT0, v7, c9"))
    run = ("run", CORPUS / "simple_transform.cg", "--entry", "simpleTransform", "--profile", "vs_1_1",
           "--vectors", VECTORS / "identity.json", "--asm-override", nudged)
    assert cgc(*run)[0] == 0
    assert cgc(*run, "--tolerance", "0")[0] == 3


def test_run_bad_vectors(tmp_path):
    bad = tmp_path / "v.json"
    bad.write_text("{not json")
    code, _, err = cgc("run", CORPUS / "simple_transform.cg", "--entry", "simpleTransform", "--profile", "vs_1_1",
                       "--vectors", bad)
    assert code == 1 and err


def test_run_missing_uniform(tmp_path):
    vec = tmp_path / "v.json"
    vec.write_text(json.dumps({"varying": {"POSITION": [1, 2, 3, 1], "COLOR": [1, 1, 1, 1],
                                           "TEXCOORD0": [0, 0, 0, 1], "TEXCOORD1": [0, 0, 0, 1]}}))
    code, _, err = cgc("run", CORPUS / "simple_transform.cg", "--entry", "simpleTransform", "--profile", "vs_1_1",
                       "--vectors", vec)
    assert code == 1 and "not supplied" in err


def test_run_solid_texture_vectors(tmp_path):
    vec = tmp_path / "v.json"
    vec.write_text(json.dumps([{"varying": {"COLOR": [0.5] * 4, "TEXCOORD0": [0, 0, 0, 1], "TEXCOORD1": [0, 0, 0, 1]},
                                "textures": {"0": [1, 1, 1, 1], "1": [0.5, 0.5, 0.5, 0.5]}}] * 2))
    code, out, _ = cgc("run", CORPUS / "bright_light_map_decal.cg", "--entry", "brightLightMapDecal",
                       "--profile", "arbfp1", "--vectors", vec)
    assert code == 0 and out.count("COLOR = (0.5, 0.5, 0.5, 0.5)") == 4


def test_module_entry_point(tmp_path):
    src = tmp_path / "st.cg"
    src.write_text(SIMPLE_TRANSFORM)
    proc = subprocess.run([sys.executable, "-m", "cgc", "compile", str(src), "--entry", "simpleTransform",
                           "--profile", "vs_1_1"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("vs.1.1")


def test_compile_stable_across_hash_seeds():
    outputs = set()
    for seed in ("1", "2", "3"):
        proc = subprocess.run([sys.executable, "-m", "cgc", "compile", str(CORPUS / "overloads.cg"), "--entry", "pick",
                               "--profile", "arbfp1"], capture_output=True, text=True,
                              env={**os.environ, "PYTHONHASHSEED": seed})
        assert proc.returncode == 0
        outputs.add(proc.stdout)
    assert len(outputs) == 1
