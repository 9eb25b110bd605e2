"""Reference interpreters for Cg source and assembly, plus result comparison."""
from .asminterp import run_asm
from .cginterp import run_cg
from .compare import Comparison, compare
from .state import ExecResult, ShadeInput, VMError

__all__ = ["Comparison", "ExecResult", "ShadeInput", "VMError", "compare", "run_asm", "run_cg"]
