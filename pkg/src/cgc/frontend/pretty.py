"""Canonical source printer.

Nested compound expressions are always parenthesized, so the output does not
depend on operator precedence and re-parses to the same tree.
"""
from __future__ import annotations

from . import ast

INDENT = "    "

_ATOMIC = (ast.IntLit, ast.FloatLit, ast.BoolLit, ast.Name, ast.Call, ast.Constructor,
           ast.Member, ast.Index, ast.Postfix)
_POSTFIX_SAFE = (ast.Name, ast.Call, ast.Constructor, ast.Member, ast.Index)


def _float(v: float) -> str:
    text = repr(float(v))
    if "e" not in text and "." not in text:
        text += ".0"
    return text


def expr(e: ast.Expr) -> str:
    if isinstance(e, ast.IntLit):
        return str(e.value)
    if isinstance(e, ast.FloatLit):
        return _float(e.value) + e.suffix
    if isinstance(e, ast.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, ast.Name):
        return e.ident
    if isinstance(e, ast.Call):
        return f"{e.callee}({', '.join(_arg(a) for a in e.args)})"
    if isinstance(e, ast.Constructor):
        return f"{e.type_name}({', '.join(_arg(a) for a in e.args)})"
    if isinstance(e, ast.Member):
        return f"{_postfix_operand(e.obj)}.{e.name}"
    if isinstance(e, ast.Index):
        return f"{_postfix_operand(e.obj)}[{expr(e.index)}]"
    if isinstance(e, ast.Postfix):
        return f"{_postfix_operand(e.operand)}{e.op}"
    if isinstance(e, ast.Unary):
        return f"{e.op}{_operand(e.operand)}"
    if isinstance(e, ast.Cast):
        return f"({e.type_name}){_operand(e.operand)}"
    if isinstance(e, ast.Binary):
        return f"{_operand(e.left)} {e.op} {_operand(e.right)}"
    if isinstance(e, ast.Conditional):
        return f"{_operand(e.cond)} ? {_operand(e.then)} : {_operand(e.other)}"
    if isinstance(e, ast.Assign):
        return f"{_operand(e.target)} {e.op} {_arg(e.value)}"
    if isinstance(e, ast.Comma):
        return f"{_operand(e.left)}, {_operand(e.right)}"
    raise TypeError(f"cannot print {type(e).__name__}")


def _operand(e: ast.Expr) -> str:
    return expr(e) if isinstance(e, _ATOMIC) else f"({expr(e)})"


def _postfix_operand(e: ast.Expr) -> str:
    return expr(e) if isinstance(e, _POSTFIX_SAFE) else f"({expr(e)})"


def _arg(e: ast.Expr) -> str:
    """Call arguments and right-hand sides only need parens around commas."""
    return f"({expr(e)})" if isinstance(e, (ast.Comma, ast.Assign)) else expr(e)


def _dims(dims) -> str:
    return "".join(f"[{d}]" for d in dims)


def _sem(sem) -> str:
    return f" : {sem}" if sem else ""


def _decl(d: ast.DeclStmt) -> str:
    quals = "".join(q + " " for q in d.qualifiers)
    parts = []
    for v in d.vars:
        s = v.name + _dims(v.dims) + _sem(v.semantic)
        if v.init is not None:
            s += " = " + _arg(v.init)
        parts.append(s)
    return f"{quals}{d.type_name} {', '.join(parts)};"


def stmt(s: ast.Stmt, depth: int) -> list:
    pad = INDENT * depth
    if isinstance(s, ast.Block):
        if not s.stmts:
            return [pad + "{ }"]
        lines = [pad + "{"]
        for sub in s.stmts:
            lines.extend(stmt(sub, depth + 1))
        lines.append(pad + "}")
        return lines
    if isinstance(s, ast.DeclStmt):
        return [pad + _decl(s)]
    if isinstance(s, ast.ExprStmt):
        return [pad + expr(s.expr) + ";"]
    if isinstance(s, ast.If):
        lines = [pad + f"if ({expr(s.cond)})"] + stmt(s.then, depth + 1)
        if s.other is not None:
            lines += [pad + "else"] + stmt(s.other, depth + 1)
        return lines
    if isinstance(s, ast.While):
        return [pad + f"while ({expr(s.cond)})"] + stmt(s.body, depth + 1)
    if isinstance(s, ast.DoWhile):
        return [pad + "do"] + stmt(s.body, depth + 1) + [pad + f"while ({expr(s.cond)});"]
    if isinstance(s, ast.For):
        if s.init is None:
            init = ";"
        elif isinstance(s.init, ast.DeclStmt):
            init = _decl(s.init)
        else:
            init = expr(s.init.expr) + ";"
        cond = f" {expr(s.cond)};" if s.cond is not None else ";"
        step = f" {expr(s.step)}" if s.step is not None else ""
        return [pad + f"for ({init}{cond}{step})"] + stmt(s.body, depth + 1)
    if isinstance(s, ast.Break):
        return [pad + "break;"]
    if isinstance(s, ast.Continue):
        return [pad + "continue;"]
    if isinstance(s, ast.Discard):
        return [pad + "discard;"]
    if isinstance(s, ast.Return):
        return [pad + ("return;" if s.value is None else f"return {expr(s.value)};")]
    raise TypeError(f"cannot print {type(s).__name__}")


def _param(p: ast.Param) -> str:
    quals = "".join(q + " " for q in p.qualifiers)
    return f"{quals}{p.type_name} {p.name}{_dims(p.dims)}{_sem(p.semantic)}"


def declaration(d) -> list:
    if isinstance(d, ast.StructDecl):
        lines = [f"struct {d.name} {{"]
        for f in d.fields:
            lines.append(f"{INDENT}{f.type_name} {f.name}{_dims(f.dims)}{_sem(f.semantic)};")
        return lines + ["};"]
    if isinstance(d, ast.FunctionDecl):
        head = f"{d.return_type} {d.name}({', '.join(_param(p) for p in d.params)}){_sem(d.return_semantic)}"
        if d.body is None:
            return [head + ";"]
        return [head] + stmt(d.body, 0)
    if isinstance(d, ast.DeclStmt):
        return [_decl(d)]
    raise TypeError(f"cannot print {type(d).__name__}")


def pretty(tree) -> str:
    """Print a SyntaxTree, a declaration, a statement or an expression."""
    if isinstance(tree, ast.SyntaxTree):
        blocks = ["\n".join(declaration(d)) for d in tree.declarations]
        return "\n\n".join(blocks) + "\n"
    if isinstance(tree, (ast.StructDecl, ast.FunctionDecl)):
        return "\n".join(declaration(tree)) + "\n"
    if isinstance(tree, ast.Stmt):
        return "\n".join(stmt(tree, 0))
    return expr(tree)
