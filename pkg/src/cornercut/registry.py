"""Built-in bivariate test functions for initial nets.

Each entry carries a vectorised ``F(s, t)`` and, where available, a rigorous
BMSDD constant on a window: any MSDD is the mean of the mixed partial
``F_st`` over a rectangle, so ``sup |F_st|`` on the window bounds it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


def _absmax(lo, hi):
    return max(abs(lo), abs(hi))


@dataclass(frozen=True)
class BuiltinFunction:
    name: str
    F: Callable
    # (s_window, t_window) -> upper bound on |F_st|
    bmsdd: Optional[Callable] = None
    description: str = ""


def polynomial(coeffs) -> BuiltinFunction:
    """Tensor polynomial ``sum_ab c[a][b] s^a t^b``."""
    c = np.asarray(coeffs, dtype=float)
    if c.ndim != 2:
        raise ValueError("polynomial coefficients must form a 2-d array")

    def F(s, t):
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        return np.polynomial.polynomial.polyval2d(s, t, c)

    def bound(sw, tw):
        ms, mt = _absmax(*sw), _absmax(*tw)
        total = 0.0
        for a in range(1, c.shape[0]):
            for b in range(1, c.shape[1]):
                total += abs(c[a, b]) * a * b * ms ** (a - 1) * mt ** (b - 1)
        return total

    return BuiltinFunction("polynomial", F, bound, "tensor polynomial")


BUILTINS: dict[str, BuiltinFunction] = {
    "bilinear": BuiltinFunction("bilinear", lambda s, t: s * t, lambda sw, tw: 1.0, "s*t"),
    "sum": BuiltinFunction("sum", lambda s, t: s + t, lambda sw, tw: 0.0, "s+t"),
    "product": BuiltinFunction(
        "product", lambda s, t: s ** 2 * t ** 2,
        lambda sw, tw: 4.0 * _absmax(*sw) * _absmax(*tw), "s^2*t^2",
    ),
    "s3t": BuiltinFunction(
        "s3t", lambda s, t: s ** 3 * t, lambda sw, tw: 3.0 * _absmax(*sw) ** 2, "s^3*t",
    ),
    "sinxcosy": BuiltinFunction(
        "sinxcosy", lambda s, t: np.sin(s) * np.cos(t), lambda sw, tw: 1.0, "sin(s)*cos(t)",
    ),
    "sinycosx": BuiltinFunction(
        "sinycosx", lambda s, t: np.sin(t) * np.cos(s), lambda sw, tw: 1.0, "sin(t)*cos(s)",
    ),
}


def lookup(name: str, coeffs=None) -> BuiltinFunction:
    if name == "polynomial":
        if coeffs is None:
            raise KeyError("built-in 'polynomial' needs coefficients")
        return polynomial(coeffs)
    try:
        return BUILTINS[name]
    except KeyError:
        raise KeyError(
            f"unknown built-in function {name!r}; choose from "
            f"{sorted(BUILTINS) + ['polynomial']}"
        ) from None
