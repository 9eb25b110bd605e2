"""Semantic analysis: typing, overloads, swizzles, flow checks."""
from .checker import (Checker, Swizzle, check, detect_recursion, parse_swizzle,
                      resolve_overload, swizzle_type, validate_write_mask)
from .flow import check_flow
from . import tree

__all__ = ["Checker", "Swizzle", "check", "check_flow", "detect_recursion", "parse_swizzle",
           "resolve_overload", "swizzle_type", "tree", "validate_write_mask"]
