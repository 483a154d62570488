"""Linear interpolation, divided differences, bilinear and Coons patches.

All blends act componentwise; values may be scalars or arrays whose
trailing axes hold vector components.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import IncompatibleCorners, OutOfDomain

DEFAULT_CORNER_RTOL = 1e-9


def _w(weight, value):
    """Broadcast a weight array of shape (n,) against values of shape (n, ...)."""
    weight = np.asarray(weight, dtype=float)
    value = np.asarray(value)
    extra = value.ndim - weight.ndim
    if extra > 0:
        weight = weight.reshape(weight.shape + (1,) * extra)
    return weight


def linear_interp(a, b, fa, fb, x, *, extrapolate=True):
    """``(x-a)/(b-a) f(b) + (b-x)/(b-a) f(a)``.

    With ``extrapolate=False`` points outside ``[a, b]`` raise
    :class:`OutOfDomain`; otherwise they are evaluated by the same formula.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a >= b):
        raise ValueError("linear_interp requires a < b")
    x = np.asarray(x, dtype=float)
    if not extrapolate and np.any((x < a) | (x > b)):
        raise OutOfDomain("x outside [a, b]")
    fa = np.asarray(fa, dtype=float)
    fb = np.asarray(fb, dtype=float)
    ha = (b - x) / (b - a)
    hb = (x - a) / (b - a)
    return _w(hb, fb) * fb + _w(ha, fa) * fa


def is_extrapolating(a, b, x) -> bool:
    x = np.asarray(x, dtype=float)
    return bool(np.any((x < a) | (x > b)))


def divided_diff2(a, b, x, fa, fb, fx):
    """Second order divided difference ``[a, b, x] f``."""
    a, b, x = (np.asarray(v, dtype=float) for v in (a, b, x))
    if np.any(a == b) or np.any(a == x) or np.any(b == x):
        raise ValueError("divided_diff2 requires pairwise distinct nodes")
    fa, fb, fx = (np.asarray(v, dtype=float) for v in (fa, fb, fx))
    right = (fb - fx) / _w(b - x, fb)
    left = (fx - fa) / _w(x - a, fa)
    return (right - left) / _w(b - a, fa)


def msdd(sig1, sig2, tau1, tau2, F11, F22, F21, F12):
    """Mixed second divided difference ``[sig1, sig2; tau1, tau2] F``.

    ``Fij`` is ``F(sig_i, tau_j)``.
    """
    sig1, sig2, tau1, tau2 = (np.asarray(v, dtype=float) for v in (sig1, sig2, tau1, tau2))
    if np.any(sig1 == sig2) or np.any(tau1 == tau2):
        raise ValueError("msdd requires distinct sigma nodes and distinct tau nodes")
    num = np.asarray(F11, dtype=float) + F22 - F21 - F12
    return num / _w((sig1 - sig2) * (tau1 - tau2), num)


def msdd_of(F, sig1, sig2, tau1, tau2):
    """MSDD of a vectorised bivariate callable."""
    return msdd(
        sig1, sig2, tau1, tau2,
        F(sig1, tau1), F(sig2, tau2), F(sig2, tau1), F(sig1, tau2),
    )


class UFunction:
    """A continuous univariate function on a closed interval.

    Parameters
    ----------
    func : callable
        Vectorised map from a 1-d float array to values of shape ``(n, ...)``
        or ``(n,)``.
    domain : (float, float)
    tag : str
        ``"analytic"``, ``"sampled-piecewise-linear"`` or ``"surface-trace"``.
    """

    def __init__(self, func: Callable, domain, tag: str = "analytic"):
        lo, hi = float(domain[0]), float(domain[1])
        if not lo < hi:
            raise ValueError(f"empty domain [{lo}, {hi}]")
        self.func = func
        self.domain = (lo, hi)
        self.tag = tag

    def _evaluate(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.func(x), dtype=float)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        flat = x.reshape(-1)
        lo, hi = self.domain
        if np.any((flat < lo) | (flat > hi)):
            bad = flat[(flat < lo) | (flat > hi)][0]
            raise OutOfDomain(f"{bad!r} outside [{lo}, {hi}]")
        out = self._evaluate(flat)
        out = out.reshape(x.shape + out.shape[1:])
        return out[()] if scalar else out

    @classmethod
    def piecewise_linear(cls, knots, values, tag="sampled-piecewise-linear"):
        """Piecewise-linear interpolant through ``(knots[i], values[i])``."""
        knots = np.asarray(knots, dtype=float)
        values = np.asarray(values, dtype=float)
        if knots.ndim != 1 or len(knots) < 2 or np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing with at least two entries")
        if len(values) != len(knots):
            raise ValueError("values must match knots in length")
        knots.setflags(write=False)
        values.setflags(write=False)

        def pl(x):
            i = np.clip(np.searchsorted(knots, x, side="right") - 1, 0, len(knots) - 2)
            return linear_interp(knots[i], knots[i + 1], values[i], values[i + 1], x)

        f = cls(pl, (knots[0], knots[-1]), tag)
        f.knots = knots
        f.values = values
        return f

    def __repr__(self):
        return f"UFunction(domain={self.domain}, tag={self.tag!r})"


@dataclass(frozen=True)
class Rect:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if not (self.a < self.b and self.c < self.d):
            raise ValueError(f"degenerate rectangle {self}")

    @property
    def h(self) -> tuple[float, float]:
        return (self.b - self.a, self.d - self.c)

    def contains(self, s, t) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        return (s >= self.a) & (s <= self.b) & (t >= self.c) & (t <= self.d)


def _check_local(s, t, h1, h2):
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any((s < 0) | (s > h1) | (t < 0) | (t > h2)):
        raise OutOfDomain(f"(s, t) outside [0, {h1}] x [0, {h2}]")
    return s, t


def bilinear_patch(P00, P01, P10, P11, h, s, t):
    """Tensor-linear blend of the corner values ``Pij`` at ``(i*h1, j*h2)``."""
    h1, h2 = (float(v) for v in h)
    if h1 <= 0 or h2 <= 0:
        raise ValueError("patch sides must be positive")
    s, t = _check_local(s, t, h1, h2)
    return _bilinear(P00, P01, P10, P11, s / h1, t / h2)


def _bilinear(P00, P01, P10, P11, u, v):
    # corners are shared by all evaluation points
    P00, P01, P10, P11 = (np.asarray(p, dtype=float) for p in (P00, P01, P10, P11))
    extra = (1,) * P00.ndim
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    u = u.reshape(u.shape + extra)
    v = v.reshape(v.shape + extra)
    return (1 - u) * ((1 - v) * P00 + v * P01) + u * ((1 - v) * P10 + v * P11)


class CoonsPatch:
    """Coons patch over ``[0, h1] x [0, h2]`` from four boundary u-functions.

    ``phi0``/``phi1`` are the bottom/top curves (functions of ``s``),
    ``psi0``/``psi1`` the left/right curves (functions of ``t``).
    Corner compatibility ``phi_i(j h1) == psi_j(i h2)`` is checked with a
    relative tolerance ``corner_rtol`` scaled by the corner magnitudes.
    """

    def __init__(self, phi0, phi1, psi0, psi1, h, corner_rtol=DEFAULT_CORNER_RTOL):
        self.phi0, self.phi1, self.psi0, self.psi1 = phi0, phi1, psi0, psi1
        self.h = (float(h[0]), float(h[1]))
        if self.h[0] <= 0 or self.h[1] <= 0:
            raise ValueError("patch sides must be positive")
        h1, h2 = self.h
        from_phi = {(0, 0): phi0(0.0), (1, 0): phi0(h1), (0, 1): phi1(0.0), (1, 1): phi1(h1)}
        from_psi = {(0, 0): psi0(0.0), (1, 0): psi1(0.0), (0, 1): psi0(h2), (1, 1): psi1(h2)}
        scale = max(1.0, max(float(np.max(np.abs(v))) for v in from_phi.values()))
        for key in from_phi:
            gap = float(np.max(np.abs(np.asarray(from_phi[key]) - from_psi[key])))
            if gap > corner_rtol * scale:
                raise IncompatibleCorners(
                    f"corner {key}: phi gives {from_phi[key]!r}, psi gives {from_psi[key]!r}"
                )
        # P[j][i] in the (s-index, t-index) sense: corner at (j*h1, i*h2)
        self.corners = {k: np.asarray(v, dtype=float) for k, v in from_phi.items()}

    def __call__(self, s, t):
        return coons_eval(self, s, t)


def coons_eval(patch: CoonsPatch, s, t):
    """Evaluate the Coons patch at local coordinates ``(s, t)``."""
    h1, h2 = patch.h
    s, t = _check_local(s, t, h1, h2)
    s, t = np.broadcast_arrays(s, t)
    u = s / h1
    v = t / h2
    c = patch.corners
    psi0, psi1 = patch.psi0(t), patch.psi1(t)
    phi0, phi1 = patch.phi0(s), patch.phi1(s)
    bil = _bilinear(c[0, 0], c[0, 1], c[1, 0], c[1, 1], u, v)
    return (
        _w(1 - u, psi0) * psi0 + _w(u, psi1) * psi1
        + _w(1 - v, phi0) * phi0 + _w(v, phi1) * phi1
        - bil
    )


def boundary_patch(F, R: Rect, corner_rtol=DEFAULT_CORNER_RTOL) -> CoonsPatch:
    """Coons patch interpolating the boundary traces of ``F`` on ``R`` (local coordinates)."""
    h1, h2 = R.h
    phi0 = UFunction(lambda s: F(R.a + s, np.full_like(s, R.c)), (0.0, h1))
    phi1 = UFunction(lambda s: F(R.a + s, np.full_like(s, R.d)), (0.0, h1))
    psi0 = UFunction(lambda t: F(np.full_like(t, R.a), R.c + t), (0.0, h2))
    psi1 = UFunction(lambda t: F(np.full_like(t, R.b), R.c + t), (0.0, h2))
    return CoonsPatch(phi0, phi1, psi0, psi1, (h1, h2), corner_rtol)


def coons_error_exact(F, R: Rect, s, t):
    """``F(s, t) - C(F|dR)(s, t)`` as a prefactor times four MSDDs.

    ``(s, t)`` are global coordinates in ``R``. On the boundary the prefactor
    vanishes and 0 is returned without evaluating the MSDDs.
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    s, t = np.broadcast_arrays(s, t)
    if np.any(~R.contains(s, t)):
        raise OutOfDomain("(s, t) outside the rectangle")
    a, b, c, d = R.a, R.b, R.c, R.d
    interior = (s > a) & (s < b) & (t > c) & (t < d)
    si = s[interior]
    ti = t[interior]
    A = np.full_like(si, a)
    B = np.full_like(si, b)
    C = np.full_like(ti, c)
    D = np.full_like(ti, d)
    combo = (
        msdd_of(F, B, si, D, ti)
        - msdd_of(F, si, A, D, ti)
        + msdd_of(F, si, A, ti, C)
        - msdd_of(F, B, si, ti, C)
    )
    pref = (si - a) * (si - b) * (ti - c) * (ti - d) / ((b - a) * (d - c))
    vals = _w(pref, combo) * combo
    out = np.zeros(s.shape + vals.shape[1:], dtype=float)
    out[interior] = vals
    return out[()] if out.ndim == 0 else out


def coons_error_bound(L: float, R: Rect) -> float:
    """Bound ``L (b-a)(d-c) / 4`` for a function with MSDDs bounded by ``L`` on ``R``."""
    if L < 0:
        raise ValueError("L must be non-negative")
    return L * (R.b - R.a) * (R.d - R.c) / 4.0


def linear_interp_error_bound(L: float, a: float, b: float) -> float:
    """Bound ``(b-a) L / 2`` on the linear interpolation error of an L-Lipschitz function."""
    if not a < b:
        raise ValueError("requires a < b")
    if L < 0:
        raise ValueError("L must be non-negative")
    return (b - a) * L / 2.0
