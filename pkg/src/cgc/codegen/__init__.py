"""Lowering, optimization, register allocation and assembly emission."""
from .emit import AssemblyListing, ListingError, emit, format_instruction, parse_listing
from .ir import Dst, Instruction, IRProgram, Reg, Src
from .lower import lower
from .optimize import optimize
from .regalloc import allocate, audit_allocation, check_capacity

__all__ = ["AssemblyListing", "Dst", "IRProgram", "Instruction", "ListingError", "Reg", "Src",
           "allocate", "audit_allocation", "check_capacity", "emit", "format_instruction", "lower",
           "optimize", "parse_listing"]
