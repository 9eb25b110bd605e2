"""Tolerance comparison of two execution results."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .state import ExecResult


@dataclass
class Comparison:
    equal: bool
    worst: float = 0.0  # largest absolute lane difference
    where: Optional[str] = None  # "SEMANTIC.lane" of the worst lane, or a reason
    detail: str = ""

    def __bool__(self) -> bool:
        return self.equal


def _lane_diff(a: float, b: float) -> float:
    if math.isnan(a) and math.isnan(b):
        return 0.0
    if math.isinf(a) or math.isinf(b):
        return 0.0 if a == b else math.inf
    if math.isnan(a) or math.isnan(b):
        return math.inf
    return abs(a - b)


def compare(a: ExecResult, b: ExecResult, tol: float = 1e-5) -> Comparison:
    """Equal when both discard, or both produce the same outputs within ``tol`` per lane."""
    if a.discarded != b.discarded:
        return Comparison(False, math.inf, "discard", "one result discarded and the other did not")
    if a.discarded:
        return Comparison(True)
    if set(a.outputs) != set(b.outputs):
        return Comparison(False, math.inf, "outputs",
                          f"output sets differ: {sorted(a.outputs)} vs {sorted(b.outputs)}")
    worst, where = 0.0, None
    for sem in sorted(a.outputs):
        for lane, (x, y) in enumerate(zip(a.outputs[sem], b.outputs[sem])):
            d = _lane_diff(float(x), float(y))
            if d > worst or where is None:
                worst, where = max(d, worst), f"{sem}.{'xyzw'[lane]}"
    equal = worst <= tol
    detail = "" if equal else f"{where} differs by {worst:.3g} (tolerance {tol:g})"
    return Comparison(equal, worst, where, detail)
