"""Recursive-descent parser producing a :class:`SyntaxTree`.

Expression precedence follows C. Type names are plain identifiers; a
statement is a declaration when it starts with a qualifier or with two
identifiers in a row.
"""
from __future__ import annotations

from ..diagnostics import CompileError, Location, error
from ..types import is_builtin_type_name
from . import ast
from .lexer import (EOF, FLOAT_LIT, IDENTIFIER, INT_LIT, KEYWORD, OPERATOR, PUNCT,
                    RESERVED, Token)

ASSIGN_OPS = ("=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=")

BINARY_PREC = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "&": 5,
    "==": 6, "!=": 6,
    "<": 7, ">": 7, "<=": 7, ">=": 7,
    "<<": 8, ">>": 8,
    "+": 9, "-": 9,
    "*": 10, "/": 10, "%": 10,
}

PARAM_QUALIFIERS = ("uniform", "in", "out", "inout", "const")
DECL_QUALIFIERS = ("uniform", "const", "static", "inline")


class ParseError(Exception):
    def __init__(self, diag):
        self.diag = diag
        super().__init__(diag.format())


class Parser:
    def __init__(self, tokens: list):
        if not tokens or tokens[-1].kind != EOF:
            raise ValueError("token list must end with the end-of-input marker")
        self.toks = tokens
        self.i = 0
        self.struct_names: set = set()
        self.diagnostics: list = []

    # -- token helpers -------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.toks[self.i]
        if t.kind != EOF:
            self.i += 1
        return t

    def at(self, lexeme: str) -> bool:
        t = self.tok
        return t.lexeme == lexeme and t.kind in (OPERATOR, PUNCT, KEYWORD)

    def accept(self, lexeme: str) -> bool:
        if self.at(lexeme):
            self.advance()
            return True
        return False

    def fail(self, expected, tok: Token = None):
        tok = tok or self.tok
        if tok.kind == RESERVED:
            diag = error("E_RESERVED", f"'{tok.lexeme}' is reserved and not supported", tok.location)
        else:
            if isinstance(expected, str):
                expected = [expected]
            exp = ", ".join(sorted(set(expected)))
            found = tok.lexeme or "end of input"
            diag = error("E_SYNTAX", f"expected one of {{{exp}}} but found '{found}'", tok.location)
        raise ParseError(diag)

    def expect(self, lexeme: str) -> Token:
        if not self.at(lexeme):
            self.fail(lexeme)
        return self.advance()

    def expect_ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != IDENTIFIER:
            self.fail(what)
        return self.advance()

    def reserved_operator(self, tok: Token):
        raise ParseError(error("E_RESERVED", f"operator '{tok.lexeme}' is reserved and not supported",
                               tok.location))

    def is_type_name(self, name: str) -> bool:
        return is_builtin_type_name(name) or name in self.struct_names

    # -- top level -----------------------------------------------------
    def parse_program(self) -> ast.SyntaxTree:
        decls = []
        while self.tok.kind != EOF:
            try:
                decls.append(self.parse_external())
            except ParseError as exc:
                self.diagnostics.append(exc.diag)
                break
        if self.diagnostics:
            raise CompileError(self.diagnostics)
        return ast.SyntaxTree(tuple(decls))

    def parse_external(self):
        loc = self.tok.location
        if self.tok.kind == RESERVED:
            self.fail("declaration")
        if self.at("struct") and self.peek(2).lexeme == "{":
            return self.parse_struct()
        quals = []
        while self.tok.kind == KEYWORD and self.tok.lexeme in DECL_QUALIFIERS + ("in", "out", "inout"):
            quals.append(self.advance().lexeme)
        type_tok = self.expect_ident("type name")
        name_tok = self.expect_ident()
        if self.at("("):
            return self.parse_function(tuple(q for q in quals if q != "inline"), type_tok, name_tok, loc)
        return self.finish_decl(tuple(quals), type_tok.lexeme, name_tok, loc, allow_semantic=True)

    def parse_struct(self) -> ast.StructDecl:
        loc = self.expect("struct").location
        name = self.expect_ident("struct name").lexeme
        self.struct_names.add(name)
        self.expect("{")
        fields = []
        while not self.at("}"):
            tname = self.expect_ident("type name")
            while True:
                fname = self.expect_ident("field name")
                dims = self.parse_dims()
                sem = self.parse_semantic()
                fields.append(ast.FieldDecl(tname.lexeme, fname.lexeme, dims, sem, fname.location))
                if not self.accept(","):
                    break
            self.expect(";")
        self.expect("}")
        self.expect(";")
        return ast.StructDecl(name, tuple(fields), loc)

    def parse_function(self, quals, type_tok, name_tok, loc) -> ast.FunctionDecl:
        if quals:
            self.fail("function declarator", type_tok)
        self.expect("(")
        params = []
        if not self.at(")"):
            if self.tok.lexeme == "void" and self.peek().lexeme == ")":
                self.advance()
            else:
                while True:
                    params.append(self.parse_param())
                    if not self.accept(","):
                        break
        self.expect(")")
        ret_sem = self.parse_semantic()
        if self.accept(";"):
            body = None
        else:
            body = self.parse_block()
        return ast.FunctionDecl(type_tok.lexeme, name_tok.lexeme, tuple(params), ret_sem, body, loc)

    def parse_param(self) -> ast.Param:
        loc = self.tok.location
        quals = []
        while self.tok.kind == KEYWORD and self.tok.lexeme in PARAM_QUALIFIERS:
            quals.append(self.advance().lexeme)
        tname = self.expect_ident("type name")
        name = self.expect_ident("parameter name")
        dims = self.parse_dims()
        sem = self.parse_semantic()
        return ast.Param(tuple(quals), tname.lexeme, name.lexeme, dims, sem, loc)

    def parse_dims(self) -> tuple:
        dims = []
        while self.accept("["):
            if self.tok.kind != INT_LIT:
                self.fail("integer array extent")
            dims.append(int(self.advance().lexeme))
            self.expect("]")
        return tuple(dims)

    def parse_semantic(self):
        if self.at(":"):
            self.advance()
            return self.expect_ident("semantic").lexeme
        return None

    def finish_decl(self, quals, type_name, name_tok, loc, allow_semantic=False) -> ast.DeclStmt:
        decls = []
        while True:
            dims = self.parse_dims()
            sem = self.parse_semantic() if allow_semantic else None
            init = None
            if self.accept("="):
                init = self.parse_assignment()
            decls.append(ast.VarDecl(name_tok.lexeme, dims, init, sem, name_tok.location))
            if not self.accept(","):
                break
            name_tok = self.expect_ident()
        self.expect(";")
        return ast.DeclStmt(quals, type_name, tuple(decls), loc)

    # -- statements ----------------------------------------------------
    def parse_block(self) -> ast.Block:
        loc = self.expect("{").location
        stmts = []
        while not self.at("}"):
            if self.tok.kind == EOF:
                self.fail("}")
            try:
                stmts.append(self.parse_statement())
            except ParseError as exc:
                self.diagnostics.append(exc.diag)
                self.resync()
        self.expect("}")
        return ast.Block(tuple(stmts), loc)

    def resync(self):
        """Skip to just past the next ';' (or up to a '}') at this nesting level."""
        depth = 0
        while self.tok.kind != EOF:
            if self.at("{"):
                depth += 1
            elif self.at("}"):
                if depth == 0:
                    return
                depth -= 1
            elif self.at(";") and depth == 0:
                self.advance()
                return
            self.advance()

    def is_decl_start(self) -> bool:
        t = self.tok
        if t.kind == KEYWORD and t.lexeme in ("const", "static", "uniform", "in", "out", "inout"):
            return True
        return t.kind == IDENTIFIER and self.peek().kind == IDENTIFIER

    def parse_statement(self) -> ast.Stmt:
        t = self.tok
        loc = t.location
        if t.kind == RESERVED:
            self.fail("statement")
        if self.at("{"):
            return self.parse_block()
        if self.at(";"):
            self.advance()
            return ast.Block((), loc)
        if t.kind == KEYWORD:
            kw = t.lexeme
            if kw == "if":
                self.advance()
                self.expect("(")
                cond = self.parse_expression()
                self.expect(")")
                then = self.parse_statement()
                other = self.parse_statement() if self.accept("else") else None
                return ast.If(cond, then, other, loc)
            if kw == "while":
                self.advance()
                self.expect("(")
                cond = self.parse_expression()
                self.expect(")")
                return ast.While(cond, self.parse_statement(), loc)
            if kw == "do":
                self.advance()
                body = self.parse_statement()
                self.expect("while")
                self.expect("(")
                cond = self.parse_expression()
                self.expect(")")
                self.expect(";")
                return ast.DoWhile(body, cond, loc)
            if kw == "for":
                return self.parse_for()
            if kw == "break":
                self.advance()
                self.expect(";")
                return ast.Break(loc)
            if kw == "continue":
                self.advance()
                self.expect(";")
                return ast.Continue(loc)
            if kw == "discard":
                self.advance()
                self.expect(";")
                return ast.Discard(loc)
            if kw == "return":
                self.advance()
                value = None if self.at(";") else self.parse_expression()
                self.expect(";")
                return ast.Return(value, loc)
        if self.is_decl_start():
            return self.parse_local_decl()
        expr = self.parse_expression()
        self.expect(";")
        return ast.ExprStmt(expr, loc)

    def parse_local_decl(self) -> ast.DeclStmt:
        loc = self.tok.location
        quals = []
        while self.tok.kind == KEYWORD and self.tok.lexeme in ("const", "static", "uniform", "in", "out", "inout"):
            quals.append(self.advance().lexeme)
        tname = self.expect_ident("type name")
        name = self.expect_ident()
        return self.finish_decl(tuple(quals), tname.lexeme, name, loc)

    def parse_for(self) -> ast.For:
        loc = self.expect("for").location
        self.expect("(")
        if self.accept(";"):
            init = None
        elif self.is_decl_start():
            init = self.parse_local_decl()
        else:
            iloc = self.tok.location
            init = ast.ExprStmt(self.parse_expression(), iloc)
            self.expect(";")
        cond = None if self.at(";") else self.parse_expression()
        self.expect(";")
        step = None if self.at(")") else self.parse_expression()
        self.expect(")")
        body = self.parse_statement()
        return ast.For(init, cond, step, body, loc)

    # -- expressions ---------------------------------------------------
    def parse_expression(self) -> ast.Expr:
        left = self.parse_assignment()
        while self.at(","):
            loc = self.advance().location
            right = self.parse_assignment()
            left = ast.Comma(left, right, loc)
        return left

    def parse_assignment(self) -> ast.Expr:
        left = self.parse_conditional()
        if self.tok.kind == OPERATOR and self.tok.lexeme in ASSIGN_OPS:
            op_tok = self.advance()
            value = self.parse_assignment()
            return ast.Assign(op_tok.lexeme, left, value, op_tok.location)
        return left

    def parse_conditional(self) -> ast.Expr:
        cond = self.parse_binary(1)
        if self.at("?"):
            loc = self.advance().location
            then = self.parse_expression()
            self.expect(":")
            other = self.parse_conditional()
            return ast.Conditional(cond, then, other, loc)
        return cond

    def parse_binary(self, min_prec: int) -> ast.Expr:
        left = self.parse_unary()
        while True:
            t = self.tok
            prec = BINARY_PREC.get(t.lexeme) if t.kind == OPERATOR else None
            if prec is None or prec < min_prec:
                return left
            self.advance()
            right = self.parse_binary(prec + 1)
            left = ast.Binary(t.lexeme, left, right, t.location)

    def parse_unary(self) -> ast.Expr:
        t = self.tok
        if t.kind == OPERATOR:
            if t.lexeme in ("-", "+", "!", "~", "++", "--"):
                self.advance()
                return ast.Unary(t.lexeme, self.parse_unary(), t.location)
            if t.lexeme in ("&", "*"):
                self.reserved_operator(t)  # address-of / dereference
        if (self.at("(") and self.peek().kind == IDENTIFIER and self.peek(2).lexeme == ")"
                and self.is_type_name(self.peek().lexeme)):
            self.advance()
            tname = self.advance().lexeme
            self.advance()
            return ast.Cast(tname, self.parse_unary(), t.location)
        return self.parse_postfix()

    def parse_postfix(self) -> ast.Expr:
        expr = self.parse_primary()
        while True:
            t = self.tok
            if self.at("."):
                self.advance()
                name = self.expect_ident("member name")
                expr = ast.Member(expr, name.lexeme, t.location)
            elif self.at("["):
                self.advance()
                idx = self.parse_expression()
                self.expect("]")
                expr = ast.Index(expr, idx, t.location)
            elif t.kind == OPERATOR and t.lexeme in ("++", "--"):
                self.advance()
                expr = ast.Postfix(t.lexeme, expr, t.location)
            elif t.kind == OPERATOR and t.lexeme in ("->", "::"):
                self.reserved_operator(t)
            else:
                return expr

    def parse_args(self) -> tuple:
        self.expect("(")
        args = []
        if not self.at(")"):
            while True:
                args.append(self.parse_assignment())
                if not self.accept(","):
                    break
        self.expect(")")
        return tuple(args)

    def parse_primary(self) -> ast.Expr:
        t = self.tok
        if t.kind == INT_LIT:
            self.advance()
            return ast.IntLit(int(t.lexeme), t.location)
        if t.kind == FLOAT_LIT:
            self.advance()
            return ast.FloatLit(float(t.lexeme), t.suffix, t.location)
        if t.kind == KEYWORD and t.lexeme in ("true", "false"):
            self.advance()
            return ast.BoolLit(t.lexeme == "true", t.location)
        if t.kind == IDENTIFIER:
            self.advance()
            if self.at("("):
                args = self.parse_args()
                if is_builtin_type_name(t.lexeme):
                    return ast.Constructor(t.lexeme, args, t.location)
                return ast.Call(t.lexeme, args, t.location)
            return ast.Name(t.lexeme, t.location)
        if self.at("("):
            self.advance()
            e = self.parse_expression()
            self.expect(")")
            return e
        self.fail(["expression", "identifier", "literal", "("])


def parse(tokens: list) -> ast.SyntaxTree:
    return Parser(tokens).parse_program()


def parse_expression(tokens: list) -> ast.Expr:
    p = Parser(tokens)
    try:
        e = p.parse_expression()
        if p.tok.kind != EOF:
            p.fail("end of input")
    except ParseError as exc:
        raise CompileError([exc.diag])
    return e
