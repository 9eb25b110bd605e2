"""A small C preprocessor: comments, #include, #define/#undef, conditionals.

Function-like macros are supported without variadics, stringizing or token
pasting. Directive lines and lines in inactive branches are dropped from the
output; ``line_map`` records where every surviving line came from.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Optional

from ..diagnostics import CompileError, Location, error


@dataclass(frozen=True)
class SourceUnit:
    text: str
    name: str = "<input>"
    line_map: tuple = ()  # ((file, line), ...) one entry per line of ``text``

    def __post_init__(self):
        if not self.line_map:
            n = self.text.count("\n") + 1
            object.__setattr__(self, "line_map", tuple((self.name, i + 1) for i in range(n)))

    def origin(self, line: int) -> tuple:
        if 1 <= line <= len(self.line_map):
            return self.line_map[line - 1]
        return (self.name, line)

    def remap(self, loc: Location) -> Location:
        if loc.line <= 0:
            return loc
        fname, oline = self.origin(loc.line)
        return Location(oline, loc.column, fname)


@dataclass
class Macro:
    name: str
    body: str
    params: Optional[tuple] = None  # None for object-like


_DIRECTIVE = re.compile(r"^\s*#\s*(\w*)(.*)$")
_PP_TOKEN = re.compile(r"(?P<num>\.?\d[\w.]*)|(?P<id>[A-Za-z_]\w*)|(?P<other>.)", re.S)
_DEFINE = re.compile(r"^\s*([A-Za-z_]\w*)(\(([^)]*)\))?(.*)$", re.S)
MAX_INCLUDE_DEPTH = 32


def _strip_comments(lines, fail):
    """Replace comments with one space; a block comment may join lines."""
    out = []
    in_block = False
    pending = ""
    pending_origin = None
    block_start = None
    for text, origin in lines:
        i = 0
        cur = pending if in_block else ""
        start_origin = pending_origin if in_block else origin
        n = len(text)
        while i < n:
            if in_block:
                end = text.find("*/", i)
                if end < 0:
                    i = n
                    break
                i = end + 2
                in_block = False
                cur += " "
                continue
            c = text[i]
            if c == "/" and i + 1 < n and text[i + 1] == "/":
                cur += " "
                i = n
                break
            if c == "/" and i + 1 < n and text[i + 1] == "*":
                in_block = True
                block_start = (origin, i + 1)
                i += 2
                continue
            cur += c
            i += 1
        if in_block:
            pending, pending_origin = cur, start_origin
            continue
        out.append((cur, start_origin))
    if in_block:
        (fname, line), col = block_start
        fail("E_PP_UNTERMINATED_COMMENT", "unterminated block comment", Location(line, col, fname))
    return out


def _join_continuations(lines):
    out = []
    buf, origin = None, None
    for text, org in lines:
        if buf is None:
            buf, origin = text, org
        else:
            buf += text
        if buf.endswith("\\"):
            buf = buf[:-1]
            continue
        out.append((buf, origin))
        buf = None
    if buf is not None:
        out.append((buf, origin))
    return out


class _IfEvaluator:
    """Integer constant expressions for #if, after macro expansion."""

    _TOK = re.compile(r"\s*(\d+|[A-Za-z_]\w*|&&|\|\||==|!=|<=|>=|[-+*/%()<>!])")

    def __init__(self, text: str):
        self.toks = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = self._TOK.match(text, pos)
            if not m:
                raise ValueError(f"bad token in #if near {text[pos:]!r}")
            self.toks.append(m.group(1))
            pos = m.end()
            while pos < len(text) and text[pos].isspace():
                pos += 1
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def evaluate(self) -> int:
        v = self.expr(0)
        if self.peek() is not None:
            raise ValueError(f"trailing tokens in #if: {self.toks[self.i:]}")
        return v

    _BIN = {
        "||": (1, lambda a, b: int(bool(a) or bool(b))),
        "&&": (2, lambda a, b: int(bool(a) and bool(b))),
        "==": (3, lambda a, b: int(a == b)),
        "!=": (3, lambda a, b: int(a != b)),
        "<": (4, lambda a, b: int(a < b)),
        ">": (4, lambda a, b: int(a > b)),
        "<=": (4, lambda a, b: int(a <= b)),
        ">=": (4, lambda a, b: int(a >= b)),
        "+": (5, lambda a, b: a + b),
        "-": (5, lambda a, b: a - b),
        "*": (6, lambda a, b: a * b),
        "/": (6, lambda a, b: int(a / b) if b else 0),
        "%": (6, lambda a, b: a - b * int(a / b) if b else 0),
    }

    def expr(self, min_prec: int) -> int:
        left = self.unary()
        while True:
            op = self.peek()
            if op not in self._BIN or self._BIN[op][0] < min_prec:
                return left
            prec, fn = self._BIN[op]
            self.take()
            right = self.expr(prec + 1)
            left = fn(left, right)

    def unary(self) -> int:
        t = self.take()
        if t is None:
            raise ValueError("unexpected end of #if expression")
        if t == "!":
            return int(not self.unary())
        if t == "-":
            return -self.unary()
        if t == "+":
            return self.unary()
        if t == "(":
            v = self.expr(0)
            if self.take() != ")":
                raise ValueError("missing ')' in #if")
            return v
        if t.isdigit():
            return int(t)
        if t[0].isalpha() or t[0] == "_":
            return 0  # undefined identifiers evaluate to 0
        raise ValueError(f"unexpected {t!r} in #if")


class Preprocessor:
    def __init__(self, includes: Mapping[str, str] = None, predefines: Mapping[str, str] = None):
        self.includes = dict(includes or {})
        self.macros: dict = {}
        for name, body in (predefines or {}).items():
            self.macros[name] = Macro(name, str(body))

    # -- macro expansion ----------------------------------------------
    def expand(self, text: str, hide: frozenset = frozenset()) -> str:
        if not self.macros:
            return text
        out = []
        pos = 0
        n = len(text)
        while pos < n:
            m = _PP_TOKEN.match(text, pos)
            tok = m.group(0)
            name = m.group("id")
            pos = m.end()
            macro = self.macros.get(name) if name else None
            if macro is None or name in hide:
                out.append(tok)
                continue
            if macro.params is None:
                out.append(self.expand(macro.body, hide | {name}))
                continue
            j = pos
            while j < n and text[j] in " \t":
                j += 1
            if j >= n or text[j] != "(":
                out.append(tok)
                continue
            args, end = self._collect_args(text, j)
            if args is None:
                out.append(tok)
                continue
            if len(args) == 1 and args[0].strip() == "" and not macro.params:
                args = []
            if len(args) != len(macro.params):
                raise ValueError(
                    f"macro {name} expects {len(macro.params)} arguments, got {len(args)}")
            expanded_args = {p: self.expand(a.strip(), hide) for p, a in zip(macro.params, args)}
            body = _PP_TOKEN.sub(
                lambda mm: expanded_args.get(mm.group("id"), mm.group(0)) if mm.group("id") else mm.group(0),
                macro.body)
            out.append(self.expand(body, hide | {name}))
            pos = end
        return "".join(out)

    @staticmethod
    def _collect_args(text: str, open_pos: int):
        depth = 0
        args = []
        cur = ""
        for k in range(open_pos, len(text)):
            c = text[k]
            if c == "(":
                depth += 1
                if depth == 1:
                    continue
            elif c == ")":
                depth -= 1
                if depth == 0:
                    args.append(cur)
                    return args, k + 1
            elif c == "," and depth == 1:
                args.append(cur)
                cur = ""
                continue
            cur += c
        return None, open_pos

    # -- directives ----------------------------------------------------
    def _define(self, rest: str, loc: Location, fail):
        m = _DEFINE.match(rest)
        if not m:
            fail("E_PP_DIRECTIVE", "malformed #define", loc)
        name, has_params, params, body = m.groups()
        # "#define F (x)" is object-like: the paren must touch the name
        if has_params and rest.lstrip().startswith(name + "("):
            plist = tuple(p.strip() for p in params.split(",")) if params.strip() else ()
            if any(not re.match(r"^[A-Za-z_]\w*$", p) for p in plist):
                fail("E_PP_DIRECTIVE", f"bad parameter list for macro {name}", loc)
            self.macros[name] = Macro(name, body.strip(), plist)
        else:
            body = (has_params or "") + body
            self.macros[name] = Macro(name, body.strip())

    def _eval_if(self, expr: str, loc: Location, fail) -> bool:
        def defined(m):
            nm = m.group(1) or m.group(2)
            return "1" if nm in self.macros else "0"

        text = re.sub(r"\bdefined\s*(?:\(\s*([A-Za-z_]\w*)\s*\)|([A-Za-z_]\w*))", defined, expr)
        try:
            text = self.expand(text)
            return bool(_IfEvaluator(text).evaluate())
        except (ValueError, ZeroDivisionError) as exc:
            fail("E_PP_DIRECTIVE", f"bad #if expression: {exc}", loc)

    def run(self, text: str, name: str, depth: int = 0, origins=None):
        diags = []

        def fail(code, message, loc):
            diags.append(error(code, message, loc))
            raise CompileError(diags)

        text = text.replace("\r\n", "\n").replace("\r", "\n")
        raw = [(line, origins[i] if origins and i < len(origins) else (name, i + 1))
               for i, line in enumerate(text.split("\n"))]
        lines = _strip_comments(_join_continuations(raw), fail)

        out_lines = []
        out_map = []
        # stack entries: [parent_active, active, taken, else_seen, loc]
        stack = []

        def active():
            return not stack or stack[-1][1]

        for line, origin in lines:
            loc = Location(origin[1], 1, origin[0])
            m = _DIRECTIVE.match(line)
            if not m:
                if active():
                    try:
                        out_lines.append(self.expand(line))
                    except ValueError as exc:
                        fail("E_PP_DIRECTIVE", str(exc), loc)
                    out_map.append(origin)
                continue
            kw, rest = m.group(1), m.group(2).strip()
            if kw in ("ifdef", "ifndef"):
                mm = re.match(r"^([A-Za-z_]\w*)\s*$", rest)
                if not mm:
                    fail("E_PP_DIRECTIVE", f"#{kw} needs one identifier", loc)
                cond = (mm.group(1) in self.macros) == (kw == "ifdef")
                parent = active()
                stack.append([parent, parent and cond, cond, False, loc])
            elif kw == "if":
                parent = active()
                cond = self._eval_if(rest, loc, fail) if parent else False
                stack.append([parent, parent and cond, cond, False, loc])
            elif kw == "elif":
                if not stack or stack[-1][3]:
                    fail("E_PP_DIRECTIVE", "#elif without #if", loc)
                top = stack[-1]
                if top[2] or not top[0]:
                    top[1] = False
                else:
                    cond = self._eval_if(rest, loc, fail)
                    top[1] = cond
                    top[2] = cond
            elif kw == "else":
                if not stack or stack[-1][3]:
                    fail("E_PP_DIRECTIVE", "#else without #if", loc)
                top = stack[-1]
                top[1] = top[0] and not top[2]
                top[2] = True
                top[3] = True
            elif kw == "endif":
                if not stack:
                    fail("E_PP_DIRECTIVE", "#endif without #if", loc)
                stack.pop()
            elif not active():
                continue
            elif kw == "define":
                self._define(rest, loc, fail)
            elif kw == "undef":
                self.macros.pop(rest.strip(), None)
            elif kw == "include":
                mm = re.match(r'^(?:"([^"]+)"|<([^>]+)>)\s*$', rest)
                if not mm:
                    fail("E_PP_DIRECTIVE", "malformed #include", loc)
                iname = mm.group(1) or mm.group(2)
                if iname not in self.includes:
                    fail("E_PP_UNKNOWN_INCLUDE", f"unknown include {iname!r}", loc)
                if depth >= MAX_INCLUDE_DEPTH:
                    fail("E_PP_DIRECTIVE", "#include nested too deeply", loc)
                sub_lines, sub_map = self.run(self.includes[iname], iname, depth + 1)
                out_lines.extend(sub_lines)
                out_map.extend(sub_map)
            elif kw == "error":
                fail("E_PP_ERROR", f"#error {rest}", loc)
            elif kw in ("pragma", ""):
                pass
            else:
                fail("E_PP_DIRECTIVE", f"unknown directive #{kw}", loc)
        if stack:
            fail("E_PP_UNTERMINATED_IF", "conditional not closed by #endif", stack[-1][4])
        return out_lines, out_map


def preprocess(source: SourceUnit, includes: Mapping[str, str] = None,
               predefines: Mapping[str, str] = None) -> SourceUnit:
    pp = Preprocessor(includes, predefines)
    lines, line_map = pp.run(source.text, source.name, origins=source.line_map)
    if not lines:
        lines, line_map = [""], [(source.name, 1)]
    return SourceUnit("\n".join(lines), source.name, tuple(line_map))
