"""End-to-end compilation: source text to typed tree, bindings, IR and assembly."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .codegen import allocate, emit, lower, optimize
from .codegen.emit import AssemblyListing
from .codegen.ir import IRProgram
from .frontend import parse_source
from .profiles import BindingTable, ProfileDescriptor, bind, lookup_profile, parse_limit, validate
from .sema import check
from .sema.tree import TypedTree


@dataclass
class CompileOptions:
    entry: str = "main"
    profile: str = "vs_1_1"
    limits: dict = field(default_factory=dict)  # limit name -> int
    includes: dict = field(default_factory=dict)  # include name -> text
    predefines: dict = field(default_factory=dict)
    optimize: bool = True

    @classmethod
    def from_strings(cls, entry: str, profile: str, limits=(), **kw) -> "CompileOptions":
        """Build options from ``name=value`` limit strings as given on a command line."""
        return cls(entry, profile, dict(parse_limit(s) for s in limits), **kw)

    def descriptor(self) -> ProfileDescriptor:
        p = lookup_profile(self.profile)
        return p.with_limits(**self.limits) if self.limits else p


@dataclass
class Checked:
    tree: TypedTree
    profile: ProfileDescriptor
    bindings: BindingTable


@dataclass
class Compilation(Checked):
    virtual: IRProgram = None  # lowered, then optimized
    physical: IRProgram = None  # after register allocation
    listing: Optional[AssemblyListing] = None

    @property
    def text(self) -> str:
        return self.listing.text


def check_source(text: str, options: CompileOptions, name: str = "<input>") -> Checked:
    """Frontend, type checking and profile validation; raises CompileError."""
    profile = options.descriptor()
    _, syntax = parse_source(text, name, options.includes, options.predefines)
    tree = check(syntax, options.entry)
    validate(tree, profile).raise_if_errors()
    return Checked(tree, profile, bind(tree, profile))


def compile_source(text: str, options: CompileOptions, name: str = "<input>") -> Compilation:
    checked = check_source(text, options, name)
    ir = lower(checked.tree, checked.bindings, checked.profile)
    if options.optimize:
        ir = optimize(ir)
    physical = allocate(ir)
    return Compilation(checked.tree, checked.profile, checked.bindings, ir, physical, emit(physical))
