"""Binary32 arithmetic helpers shared by the reference evaluators and the machine model."""
from __future__ import annotations

import numpy as np

from .types import FIXED_MAX, FIXED_MIN

f32 = np.float32


def dot32(a, b) -> np.float32:
    """Dot product summed in double precision and rounded once to binary32."""
    total = 0.0
    for x, y in zip(np.asarray(a, dtype=np.float64).ravel(), np.asarray(b, dtype=np.float64).ravel()):
        total += float(x) * float(y)
    return f32(total)


def saturate_fixed(x):
    return np.clip(np.asarray(x, dtype=f32), f32(FIXED_MIN), f32(FIXED_MAX)).astype(f32)


def rsqrt32(x):
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        return (1.0 / np.sqrt(x)).astype(f32)


def log2_32(x):
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log2(x).astype(f32)


def rcp32(x):
    x = np.asarray(x, dtype=f32)
    with np.errstate(divide="ignore", invalid="ignore"):
        return (f32(1.0) / x).astype(f32)
