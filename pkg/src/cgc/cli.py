"""Command-line driver: ``cgc compile|run|check``.

Exit codes: 0 success, 1 I/O or usage fault, 2 compile diagnostics, 3 differential mismatch.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .codegen.emit import ListingError, parse_listing
from .diagnostics import CompileError
from .pipeline import CompileOptions, check_source, compile_source
from .stdlib import TextureImage, load_texture
from .vm import ShadeInput, VMError, compare, run_asm, run_cg

EXIT_OK, EXIT_FAULT, EXIT_DIAGNOSTICS, EXIT_MISMATCH = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cgc", description="Compile and cross-check Cg programs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_text in (("compile", "emit assembly for one entry point"),
                            ("run", "execute source and assembly on test vectors and compare"),
                            ("check", "parse, type-check and validate without code generation")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("source", type=Path)
        p.add_argument("--entry", required=True)
        p.add_argument("--profile", required=True)
        p.add_argument("--limit", action="append", default=[], metavar="NAME=VALUE",
                       help="override a profile limit (repeatable)")
        p.add_argument("--diag-format", choices=("human", "json-lines"), default="human")
        if name == "compile":
            p.add_argument("--out", type=Path, help="write the listing here instead of stdout")
        if name == "run":
            p.add_argument("--vectors", type=Path, required=True, nargs="+")
            p.add_argument("--tolerance", type=float, default=1e-5)
            p.add_argument("--asm-override", type=Path,
                           help="execute this listing instead of the compiled one")
    return parser


def report(diagnostics, fmt: str, stream) -> None:
    for d in diagnostics:
        stream.write((json.dumps(d.as_json()) if fmt == "json-lines" else d.format()) + "\n")


def load_vectors(path: Path) -> list:
    """Test-vector file: one object (or a list of them) with varying/uniform/textures keys."""
    doc = json.loads(path.read_text())
    docs = doc if isinstance(doc, list) else [doc]
    out = []
    for i, d in enumerate(docs):
        if not isinstance(d, dict):
            raise UsageError(f"{path}: vector {i} is not a JSON object")
        textures = {}
        for unit, spec in d.get("textures", {}).items():
            if isinstance(spec, list):
                textures[int(unit)] = TextureImage.solid(spec)
            else:
                textures[int(unit)] = load_texture(path.parent / spec)
        out.append(ShadeInput(d.get("varying", {}), d.get("uniform", {}), textures))
    return out


def cmd_check(args, out, err) -> int:
    options = CompileOptions.from_strings(args.entry, args.profile, args.limit)
    check_source(args.source.read_text(encoding="utf-8"), options, str(args.source))
    out.write(f"{args.source}: ok ({args.entry}, {args.profile})\n")
    return EXIT_OK


def cmd_compile(args, out, err) -> int:
    options = CompileOptions.from_strings(args.entry, args.profile, args.limit)
    comp = compile_source(args.source.read_text(encoding="utf-8"), options, str(args.source))
    if args.out:
        args.out.write_text(comp.text)
    else:
        out.write(comp.text)
    return EXIT_OK


def cmd_run(args, out, err) -> int:
    options = CompileOptions.from_strings(args.entry, args.profile, args.limit)
    comp = compile_source(args.source.read_text(encoding="utf-8"), options, str(args.source))
    listing = comp.listing
    if args.asm_override:
        listing = parse_listing(args.asm_override.read_text())
    mismatches = 0
    for vec_path in args.vectors:
        for i, shade in enumerate(load_vectors(vec_path)):
            a = run_cg(comp.tree, shade)
            b = run_asm(listing, shade, comp.bindings)
            verdict = compare(a, b, args.tolerance)
            out.write(f"{vec_path}[{i}] cg:  {a.format()}\n")
            out.write(f"{vec_path}[{i}] asm: {b.format()}\n")
            if verdict.equal:
                out.write(f"{vec_path}[{i}] agree (worst difference {verdict.worst:.3g})\n")
            else:
                mismatches += 1
                out.write(f"{vec_path}[{i}] MISMATCH: {verdict.detail}\n")
    return EXIT_MISMATCH if mismatches else EXIT_OK


COMMANDS = {"compile": cmd_compile, "run": cmd_run, "check": cmd_check}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    fmt = "human"
    try:
        args = build_parser().parse_args(argv)
        fmt = args.diag_format
        return COMMANDS[args.command](args, out, err)
    except CompileError as exc:
        report(exc.diagnostics, fmt, err)
        return EXIT_DIAGNOSTICS
    except UsageError as exc:
        err.write(f"cgc: {exc}\n")
        return EXIT_FAULT
    except (OSError, UnicodeDecodeError, json.JSONDecodeError, ListingError, VMError, ValueError) as exc:
        err.write(f"cgc: {exc}\n")
        return EXIT_FAULT
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_FAULT
    except Exception as exc:  # noqa: BLE001
        err.write(f"cgc: internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_FAULT


if __name__ == "__main__":
    sys.exit(main())
