"""Property-based suites driven by hypothesis."""
import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from cgc.codegen import lower, optimize
from cgc.diagnostics import CompileError
from cgc.frontend import parse_source, pretty
from cgc.gen import generate, random_shade
from cgc.sema.checker import resolve_overload, swizzle_type
from cgc.stdlib import CATALOGUE, builtin_signatures, eval_builtin
from cgc.types import matrix, scalar, vector
from cgc.vm import ShadeInput, compare, run_asm, run_cg

from conftest import CORPUS, MANIFEST, checked, compiled

FAST = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
LANES = "xyzw"
f32s = st.floats(-1e3, 1e3, width=32, allow_nan=False, allow_infinity=False)


# -- parse / pretty ---------------------------------------------------------

def reprint(text):
    return pretty(parse_source(text)[1])


@pytest.mark.parametrize("name", sorted({e["file"] for e in MANIFEST}))
def test_corpus_round_trip(name):
    once = reprint((CORPUS / name).read_text())
    assert reprint(once) == once


@pytest.mark.parametrize("name", sorted({e["file"] for e in MANIFEST}))
def test_corpus_round_trip_preserves_types(name):
    entry = next(e for e in MANIFEST if e["file"] == name)
    text = (CORPUS / name).read_text()
    a = checked(text, entry["entry"], entry["profiles"][0])
    b = checked(reprint(text), entry["entry"], entry["profiles"][0])
    assert [str(f.sig) for f in a.tree.reachable()] == [str(f.sig) for f in b.tree.reachable()]


@FAST
@given(st.integers(0, 2**32 - 1), st.sampled_from(["vs_1_1", "arbfp1"]))
def test_generated_round_trip(seed, profile):
    once = reprint(generate(seed, profile).source)
    assert reprint(once) == once


# -- swizzles ---------------------------------------------------------------

@st.composite
def swizzle_chain(draw):
    width = draw(st.integers(1, 4))
    first = draw(st.lists(st.integers(0, width - 1), min_size=1, max_size=4))
    second = draw(st.lists(st.integers(0, len(first) - 1), min_size=1, max_size=4))
    return width, first, second


def letters(idx):
    return "".join(LANES[i] for i in idx)


@given(swizzle_chain())
def test_swizzle_composition_types(chain):
    width, first, second = chain
    base = scalar("float") if width == 1 else vector("float", width)
    composed = [first[i] for i in second]
    assert swizzle_type(swizzle_type(base, letters(first)), letters(second)) == \
        swizzle_type(base, letters(composed))


@FAST
@given(swizzle_chain(), st.lists(f32s, min_size=4, max_size=4))
def test_swizzle_composition_values(chain, values):
    width, first, second = chain
    composed = [first[i] for i in second]
    n = len(second)
    floatn = "float" if n == 1 else f"float{n}"
    src_t = "float" if width == 1 else f"float{width}"
    source = f"""void v(float4 p : POSITION, out float4 o : POSITION, out {floatn} a : TEXCOORD0,
                       out {floatn} b : TEXCOORD1)
                 {{ {src_t} s = p.{letters(range(width))}; o = p;
                    a = (s.{letters(first)}).{letters(second)}; b = s.{letters(composed)}; }}"""
    comp = compiled(source, "v", "vs_1_1")
    shade = ShadeInput({"POSITION": values})
    for result in (run_cg(comp.tree, shade), run_asm(comp.listing, shade, comp.bindings)):
        assert np.array_equal(result.outputs["TEXCOORD0"], result.outputs["TEXCOORD1"])
        want = [values[i] for i in composed]
        assert result.outputs["TEXCOORD0"][:n].tolist() == [float(np.float32(x)) for x in want]


# -- overload resolution -----------------------------------------------------

NUMERIC_TYPES = ([scalar(b) for b in ("float", "half", "fixed", "int", "bool")] +
                 [vector(b, n) for b in ("float", "half", "int") for n in (2, 3, 4)] +
                 [matrix("float", r, c) for r in (2, 3, 4) for c in (2, 3, 4)])
PURE_BUILTINS = sorted(n for n in CATALOGUE if not n.startswith("tex"))


def outcome(name, args, cands):
    try:
        return resolve_overload(name, args, cands)
    except CompileError as exc:
        return tuple(exc.codes)


@given(st.sampled_from(PURE_BUILTINS), st.data())
def test_overload_order_independence(name, data):
    cands = builtin_signatures(name)
    arity = len(cands[0].params)
    if data.draw(st.booleans()):
        args = [p for p, _ in data.draw(st.sampled_from(cands)).params]
    else:
        args = data.draw(st.lists(st.sampled_from(NUMERIC_TYPES), min_size=arity, max_size=arity))
    shuffled = data.draw(st.permutations(cands))
    assert outcome(name, args, shuffled) == outcome(name, args, cands)


@given(st.sampled_from(PURE_BUILTINS), st.data())
def test_exact_match_wins(name, data):
    cands = builtin_signatures(name)
    pick = data.draw(st.sampled_from(cands))
    args = [p for p, _ in pick.params]
    assert resolve_overload(name, args, data.draw(st.permutations(cands))) == pick


# -- optimizer ---------------------------------------------------------------

@FAST
@given(st.integers(0, 2**32 - 1), st.sampled_from(["vs_1_1", "arbvp1", "arbfp1"]))
def test_optimize_idempotent(seed, profile):
    prog = generate(seed, profile)
    c = checked(prog.source, prog.entry, profile)
    once = optimize(lower(c.tree, c.bindings, c.profile))
    assert optimize(once).structure() == once.structure()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["vs_1_1", "arbvp1", "arbfp1"]))
def test_generated_differential(seed, profile):
    prog = generate(seed, profile)
    comp = compiled(prog.source, prog.entry, profile)
    rng = np.random.default_rng(seed)
    for _ in range(20):
        shade = random_shade(comp.tree, rng)
        verdict = compare(run_cg(comp.tree, shade), run_asm(comp.listing, shade, comp.bindings))
        assert verdict.equal, (prog.source, verdict.detail)


# -- mul against a brute-force dot product -------------------------------------

def brute_mul(m, v):
    rows, cols = len(m), len(m[0])
    return [sum(float(m[i][j]) * float(v[j]) for j in range(cols)) for i in range(rows)]


def relative_error(got, want):
    return abs(got - want) / max(abs(want), 1e-30)


@st.composite
def matrix_vector(draw):
    rows, cols = draw(st.integers(1, 4)), draw(st.integers(1, 4))
    m = [[draw(f32s) for _ in range(cols)] for _ in range(rows)]
    v = [draw(f32s) for _ in range(cols)]
    return m, v


@settings(max_examples=1000, deadline=None)
@given(matrix_vector())
def test_mul_matches_brute_force(mv):
    m, v = mv
    rows, cols = len(m), len(v)
    mt = matrix("float", rows, cols)
    vt = scalar("float") if cols == 1 else vector("float", cols)
    sig = resolve_overload("mul", [mt, vt], builtin_signatures("mul"))
    got = np.asarray(eval_builtin(sig, [np.array(m, dtype=np.float32), np.array(v, dtype=np.float32)])).reshape(-1)
    want = brute_mul(m, v)
    for g, w in zip(got, want):
        assert relative_error(float(g), w) <= 1e-6


MUL4 = """void v(float4 p : POSITION, uniform float4x4 m, out float4 o : POSITION) { o = mul(m, p); }"""


@pytest.fixture(scope="module")
def mul4_program():
    return compiled(MUL4, "v", "vs_1_1")


@settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.lists(f32s, min_size=16, max_size=16), st.lists(f32s, min_size=4, max_size=4))
def test_mul_listing_matches_brute_force(mul4_program, flat, v):
    m = [flat[4 * i:4 * i + 4] for i in range(4)]
    shade = ShadeInput({"POSITION": v}, {"m": m})
    got = run_asm(mul4_program.listing, shade, mul4_program.bindings).outputs["POSITION"]
    for g, w in zip(got, brute_mul(m, v)):
        assert relative_error(float(g), w) <= 1e-6
