import pytest

from cgc.diagnostics import CompileError
from cgc.frontend import ast, parse, parse_source, pretty, preprocess, tokenize
from cgc.frontend.lexer import FLOAT_LIT, IDENTIFIER, OPERATOR, PUNCT, RESERVED, RESERVED_WORDS
from cgc.frontend.preprocess import SourceUnit

from conftest import BRIGHT_LIGHT_MAP_DECAL, SIMPLE_TRANSFORM


def pp(text, **kw):
    return preprocess(SourceUnit(text), **kw).text


def codes_of(fn, *args, **kw):
    with pytest.raises(CompileError) as info:
        fn(*args, **kw)
    return info.value.codes


class TestPreprocess:
    def test_object_macro(self):
        assert pp("#define N 2\nfloat x = N;").strip() == "float x = 2;"

    def test_false_ifdef_removed(self):
        assert "float y" not in pp("#ifdef A\nfloat y;\n#endif")

    def test_comments_become_spaces(self):
        assert pp("float4 v; /* note */ // tail").rstrip() == "float4 v;"
        assert "note" not in pp("float4 v; /* note */ // tail")

    def test_function_macro(self):
        assert pp("#define SQ(a) ((a) * (a))\nfloat y = SQ(x + 1);").strip() == \
            "float y = ((x + 1) * (x + 1));"

    def test_if_defined_else(self):
        text = "#if defined(FAST)\nfloat a;\n#else\nfloat b;\n#endif"
        assert "float b" in pp(text) and "float a" not in pp(text)
        assert "float a" in pp(text, predefines={"FAST": "1"})

    def test_include_and_line_map(self):
        unit = preprocess(SourceUnit("#include \"lib.cg\"\nfloat b;", "main.cg"),
                          includes={"lib.cg": "float a;"})
        lines = unit.text.split("\n")
        assert len(unit.line_map) == len(lines)
        row = next(i for i, ln in enumerate(lines) if "float a" in ln)
        assert unit.line_map[row] == ("lib.cg", 1)

    def test_token_locations_follow_line_map(self):
        unit = preprocess(SourceUnit("#include \"lib.cg\"\nfloat b;", "main.cg"),
                          includes={"lib.cg": "// one\n// two\nfloat a;"})
        locs = {t.lexeme: t.location for t in tokenize(unit)}
        assert (locs["a"].file, locs["a"].line) == ("lib.cg", 3)
        assert (locs["b"].file, locs["b"].line) == ("main.cg", 2)

    def test_undef(self):
        assert pp("#define N 3\n#undef N\nfloat x = N;").strip() == "float x = N;"

    @pytest.mark.parametrize("text, code", [
        ("#ifdef A\nfloat y;", "E_PP_UNTERMINATED_IF"),
        ("#include \"nope.cg\"", "E_PP_UNKNOWN_INCLUDE"),
        ("float x; /* open", "E_PP_UNTERMINATED_COMMENT"),
    ])
    def test_errors(self, text, code):
        assert code in codes_of(preprocess, SourceUnit(text))

    def test_idempotent_without_directives(self):
        once = pp(SIMPLE_TRANSFORM)
        assert pp(once) == once


class TestTokenize:
    def kinds(self, text):
        return [(t.kind, t.lexeme) for t in tokenize(SourceUnit(text))][:-1]

    def test_write_mask_statement(self):
        assert self.kinds("vec1.xw = vec3;") == [
            (IDENTIFIER, "vec1"), (OPERATOR, "."), (IDENTIFIER, "xw"), (OPERATOR, "="),
            (IDENTIFIER, "vec3"), (PUNCT, ";")]

    def test_goto_reserved(self):
        assert self.kinds("goto") == [(RESERVED, "goto")]

    def test_scalar_times_vector(self):
        assert self.kinds("2.0 * color") == [(FLOAT_LIT, "2.0"), (OPERATOR, "*"), (IDENTIFIER, "color")]

    def test_type_names_are_identifiers(self):
        assert self.kinds("float4x4 sampler2D") == [(IDENTIFIER, "float4x4"), (IDENTIFIER, "sampler2D")]

    def test_literal_suffixes(self):
        toks = tokenize(SourceUnit("1.5h 2x 3.0f"))
        assert [t.suffix for t in toks[:3]] == ["h", "x", "f"]

    def test_illegal_character(self):
        assert codes_of(tokenize, SourceUnit("float a = $;")) == ["E_LEX"]

    def test_malformed_number(self):
        assert "E_BAD_LITERAL" in codes_of(tokenize, SourceUnit("float a = 1.0e+;"))

    def test_locations_monotonic(self):
        locs = [(t.location.line, t.location.column) for t in tokenize(SourceUnit(SIMPLE_TRANSFORM))]
        assert locs == sorted(locs)


class TestParse:
    def test_simple_transform_parameters(self):
        _, tree = parse_source(SIMPLE_TRANSFORM)
        fn = tree.function("simpleTransform")
        assert len(fn.params) == 10
        assert sum("out" in p.qualifiers for p in fn.params) == 4
        assert sum("uniform" in p.qualifiers for p in fn.params) == 2
        assert fn.params[0].semantic == "POSITION"

    def test_return_semantic(self):
        _, tree = parse_source(BRIGHT_LIGHT_MAP_DECAL)
        assert tree.function("brightLightMapDecal").return_semantic == "COLOR"

    def test_constructor_initializer(self):
        _, tree = parse_source("void f() { float4 vec1 = float4(4.0, -2.0, 5.0, 3.0); }")
        decl = tree.function("f").body.stmts[0]
        assert isinstance(decl, ast.DeclStmt)
        init = decl.vars[0].init
        assert isinstance(init, ast.Constructor) and init.type_name == "float4"
        assert len(init.args) == 4

    @pytest.mark.parametrize("text", [
        "void f(int x) { switch (x) { } }",
        "void f() { goto done; }",
        "union U { float a; };",
    ])
    def test_reserved_constructs(self, text):
        assert codes_of(parse_source, text) == ["E_RESERVED"]

    def test_syntax_error_lists_expected(self):
        with pytest.raises(CompileError) as info:
            parse_source("void f() { float x = ; }")
        assert info.value.codes == ["E_SYNTAX"]
        assert "expected" in info.value.diagnostics[0].message

    def test_swizzle_binds_tighter_than_unary(self):
        _, tree = parse_source("void f() { y = -v.x; }")
        e = tree.function("f").body.stmts[0].expr.value
        assert isinstance(e, ast.Unary) and isinstance(e.operand, ast.Member)

    def test_c_precedence(self):
        _, tree = parse_source("void f() { y = a + b * c; }")
        e = tree.function("f").body.stmts[0].expr.value
        assert e.op == "+" and e.right.op == "*"


class TestPretty:
    def test_statement_text(self):
        _, tree = parse_source("void f() { oColor = brightness * color; }")
        assert "oColor = brightness * color;" in pretty(tree)

    def test_empty_body(self):
        _, tree = parse_source("void f() {}")
        assert "{ }" in pretty(tree)

    def test_nested_conditional_parenthesized(self):
        _, tree = parse_source("void f() { x = a ? b ? c : d : e; }")
        assert "x = a ? (b ? c : d) : e;" in pretty(tree)

    @pytest.mark.parametrize("text", [SIMPLE_TRANSFORM, BRIGHT_LIGHT_MAP_DECAL])
    def test_round_trip(self, text):
        _, tree = parse_source(text)
        assert parse(tokenize(SourceUnit(pretty(tree)))) == tree

    def test_deterministic(self):
        _, tree = parse_source(SIMPLE_TRANSFORM)
        assert pretty(tree) == pretty(tree)
