"""Nets of u-functions, piecewise Coons surfaces and corner cutting of nets.

A net lives on a finite window of a grid of lines: ``phi[j]`` is the
u-function along ``t = t_j`` (a function of ``s``) and ``psi[i]`` the one
along ``s = s_i`` (a function of ``t``). Refined nets are lazy traces of the
previous piecewise Coons surface, memoised per line and parameter.
"""
from __future__ import annotations

import os
import threading
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._validation import check_knots
from .exceptions import BudgetExceeded, CornerCutError, NotCertified, OutOfDomain
from .transfinite import DEFAULT_CORNER_RTOL, CoonsPatch, Rect, UFunction
from .weights import NETS_THRESHOLD, Certificate, WeightPair, WeightSchedule, certify_nets

BUDGET_ENV = "CORNERCUT_CACHE_BUDGET"
DEFAULT_BUDGET = 20_000_000
DEFAULT_BMSDD_SAMPLES = 32


def refine_knots(knots, pair: WeightPair) -> np.ndarray:
    """One corner cutting step on an open, strictly increasing knot sequence."""
    knots = np.asarray(knots, dtype=float)
    if len(knots) < 2:
        raise CornerCutError("need at least 2 knots to refine")
    alpha, beta = pair.at(np.arange(len(knots) - 1))
    lo, hi = knots[:-1], knots[1:]
    out = np.empty(2 * (len(knots) - 1))
    out[0::2] = (1 - alpha) * lo + alpha * hi
    out[1::2] = (1 - beta) * lo + beta * hi
    return out


@dataclass(frozen=True, eq=False)
class GridT:
    """Finite window of a grid of lines ``{s_i} x R  U  R x {t_j}``."""

    s: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        s = check_knots(self.s, name="s knots")
        t = check_knots(self.t, name="t knots")
        s.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "t", t)

    @classmethod
    def integer(cls, s_window, t_window) -> "GridT":
        """Integer knots covering ``[s0, s1] x [t0, t1]``."""
        s0, s1 = s_window
        t0, t1 = t_window
        return cls(np.arange(s0, s1 + 1, dtype=float), np.arange(t0, t1 + 1, dtype=float))

    @property
    def origin(self) -> tuple[float, float]:
        return float(self.s[0]), float(self.t[0])

    @property
    def h_s(self) -> float:
        return float(np.max(np.diff(self.s)))

    @property
    def h_t(self) -> float:
        return float(np.max(np.diff(self.t)))

    @property
    def rect(self) -> Rect:
        return Rect(float(self.s[0]), float(self.s[-1]), float(self.t[0]), float(self.t[-1]))

    def locate(self, s, t):
        """Cell indices for each point; knot ties go to the right cell, the last knot to the last cell."""
        i = np.clip(np.searchsorted(self.s, s, side="right") - 1, 0, len(self.s) - 2)
        j = np.clip(np.searchsorted(self.t, t, side="right") - 1, 0, len(self.t) - 2)
        return i, j


def refine_grid(grid: GridT, gs: WeightPair, gt: WeightPair) -> GridT:
    return GridT(refine_knots(grid.s, gs), refine_knots(grid.t, gt))


class EvalBudget:
    """Shared counter of fresh (non-memoised) trace evaluations."""

    def __init__(self, limit: int | None = None):
        if limit is None:
            limit = int(os.environ.get(BUDGET_ENV, DEFAULT_BUDGET))
        self.limit = limit
        self.used = 0
        self._lock = threading.Lock()

    def spend(self, n: int):
        with self._lock:
            self.used += n
            if self.used > self.limit:
                raise BudgetExceeded(
                    f"trace evaluation budget of {self.limit} exceeded "
                    f"(set {BUDGET_ENV} to raise it)"
                )


class MemoFunction(UFunction):
    """UFunction whose values are memoised by exact parameter value.

    Keys are canonical floats (``-0.0`` folded into ``0.0``), so equal
    parameters always hit the same entry; inserts are serialised by a lock.
    """

    def __init__(self, func, domain, tag="surface-trace", budget: EvalBudget | None = None):
        super().__init__(func, domain, tag)
        self.budget = budget
        self._memo: dict[float, np.ndarray] = {}
        self._lock = threading.Lock()

    def _evaluate(self, x):
        keys, inverse = np.unique(x + 0.0, return_inverse=True)
        memo = self._memo
        missing = [k for k in keys.tolist() if k not in memo]
        if missing:
            if self.budget is not None:
                self.budget.spend(len(missing))
            vals = np.asarray(self.func(np.array(missing)), dtype=float)
            with self._lock:
                for k, v in zip(missing, vals):
                    memo.setdefault(k, v)
        out = np.array([memo[k] for k in keys.tolist()], dtype=float)
        return out[inverse.reshape(-1)]

    @property
    def cache_size(self) -> int:
        return len(self._memo)


class NetOfFunctions:
    """A net of u-functions on a grid window.

    Parameters
    ----------
    grid : GridT
    phi : sequence of UFunction
        ``phi[j](s) = N(s, t_j)``; one per t-knot, defined on ``[s_0, s_last]``.
    psi : sequence of UFunction
        ``psi[i](t) = N(s_i, t)``; one per s-knot, defined on ``[t_0, t_last]``.
    """

    def __init__(self, grid: GridT, phi, psi, level: int = 0):
        phi = tuple(phi)
        psi = tuple(psi)
        if len(phi) != len(grid.t):
            raise ValueError(f"{len(phi)} phi functions for {len(grid.t)} t-knots")
        if len(psi) != len(grid.s):
            raise ValueError(f"{len(psi)} psi functions for {len(grid.s)} s-knots")
        for f in phi:
            if f.domain[0] > grid.s[0] or f.domain[1] < grid.s[-1]:
                raise OutOfDomain(f"phi domain {f.domain} does not cover the s window")
        for f in psi:
            if f.domain[0] > grid.t[0] or f.domain[1] < grid.t[-1]:
                raise OutOfDomain(f"psi domain {f.domain} does not cover the t window")
        self.grid = grid
        self.phi = phi
        self.psi = psi
        self.level = level

    @cached_property
    def corners(self) -> np.ndarray:
        """``N(s_i, t_j)`` taken from the phi functions; shape ``(ns, nt, ...)``."""
        cols = [np.asarray(f(self.grid.s)) for f in self.phi]
        return np.stack(cols, axis=1)

    def crossing_gaps(self) -> np.ndarray:
        """``|phi_j(s_i) - psi_i(t_j)|`` (max over components), shape ``(ns, nt)``."""
        from_psi = np.stack([np.asarray(f(self.grid.t)) for f in self.psi], axis=0)
        gap = np.abs(self.corners - from_psi)
        return gap.reshape(gap.shape[:2] + (-1,)).max(axis=2)

    @property
    def tags(self) -> set[str]:
        return {f.tag for f in self.phi + self.psi}

    def __repr__(self):
        return (
            f"NetOfFunctions(level={self.level}, {len(self.grid.s)}x{len(self.grid.t)} lines, "
            f"rect={self.grid.rect})"
        )


def net_from_function(F, grid: GridT, tag: str = "analytic") -> NetOfFunctions:
    """Net of the traces of a vectorised bivariate ``F`` along the lines of ``grid``."""
    s_dom = (grid.s[0], grid.s[-1])
    t_dom = (grid.t[0], grid.t[-1])

    def along_s(tj):
        return UFunction(lambda s: F(s, np.full_like(s, tj)), s_dom, tag)

    def along_t(si):
        return UFunction(lambda t: F(np.full_like(t, si), t), t_dom, tag)

    return NetOfFunctions(grid, [along_s(tj) for tj in grid.t], [along_t(si) for si in grid.s])


@dataclass(frozen=True)
class Crossing:
    i: int
    j: int
    phi_value: float
    psi_value: float
    gap: float


def check_c0(net: NetOfFunctions, tol: float = 1e-9) -> list[Crossing]:
    """Crossings where ``|phi_j(s_i) - psi_i(t_j)| > tol``; empty means compatible."""
    gaps = net.crossing_gaps()
    out = []
    for i, j in zip(*np.nonzero(gaps > tol)):
        phi_v = np.asarray(net.phi[j](net.grid.s[i]))
        psi_v = np.asarray(net.psi[i](net.grid.t[j]))
        out.append(Crossing(int(i), int(j), phi_v.tolist(), psi_v.tolist(), float(gaps[i, j])))
    return out


def _bw(weight, value):
    value = np.asarray(value)
    return weight.reshape(weight.shape + (1,) * (value.ndim - weight.ndim))


class PiecewiseCoonsSurface:
    """Cell-by-cell Coons patches filling a C0 net."""

    def __init__(self, net: NetOfFunctions, corner_rtol: float = DEFAULT_CORNER_RTOL):
        self.net = net
        self.corner_rtol = corner_rtol
        gaps = net.crossing_gaps()
        scale = max(1.0, float(np.max(np.abs(net.corners))))
        if np.any(gaps > corner_rtol * scale):
            i, j = np.unravel_index(np.argmax(gaps), gaps.shape)
            raise CornerCutError(
                f"net is not C0: crossing ({i}, {j}) mismatched by {gaps[i, j]!r}"
            )

    @property
    def grid(self) -> GridT:
        return self.net.grid

    @property
    def rect(self) -> Rect:
        return self.net.grid.rect

    def cell_patch(self, i: int, j: int) -> CoonsPatch:
        """The Coons patch of cell ``[s_i, s_i+1] x [t_j, t_j+1]`` in local coordinates."""
        g = self.grid
        s0, s1, t0, t1 = g.s[i], g.s[i + 1], g.t[j], g.t[j + 1]

        def shift(f, origin, length):
            return UFunction(lambda x: f(np.clip(origin + x, f.domain[0], f.domain[1])),
                             (0.0, length), f.tag)

        return CoonsPatch(
            shift(self.net.phi[j], s0, s1 - s0),
            shift(self.net.phi[j + 1], s0, s1 - s0),
            shift(self.net.psi[i], t0, t1 - t0),
            shift(self.net.psi[i + 1], t0, t1 - t0),
            (s1 - s0, t1 - t0),
            self.corner_rtol,
        )

    def __call__(self, s, t):
        return self.eval(s, t)

    def eval(self, s, t):
        """Evaluate at global ``(s, t)`` (broadcast arrays)."""
        s, t = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
        shape = s.shape
        s = s.reshape(-1)
        t = t.reshape(-1)
        if not np.all(self.rect.contains(s, t)):
            raise OutOfDomain(f"point outside the surface domain {self.rect}")
        g = self.grid
        net = self.net
        i, j = g.locate(s, t)
        u = (s - g.s[i]) / (g.s[i + 1] - g.s[i])
        v = (t - g.t[j]) / (g.t[j + 1] - g.t[j])

        C = net.corners
        vshape = C.shape[2:]
        left = np.empty((len(s),) + vshape)
        right = np.empty_like(left)
        bottom = np.empty_like(left)
        top = np.empty_like(left)
        for ii in np.unique(i):
            m = i == ii
            left[m] = net.psi[ii](t[m])
            right[m] = net.psi[ii + 1](t[m])
        for jj in np.unique(j):
            m = j == jj
            bottom[m] = net.phi[jj](s[m])
            top[m] = net.phi[jj + 1](s[m])
        P00, P01, P10, P11 = C[i, j], C[i, j + 1], C[i + 1, j], C[i + 1, j + 1]
        uu, vv = _bw(u, left), _bw(v, left)
        bil = (1 - uu) * ((1 - vv) * P00 + vv * P01) + uu * ((1 - vv) * P10 + vv * P11)
        out = (1 - uu) * left + uu * right + (1 - vv) * bottom + vv * top - bil
        return out.reshape(shape + vshape)


def surface_eval(surface: PiecewiseCoonsSurface, s, t):
    return surface.eval(s, t)


def _trace_along_s(surface, tj, domain, budget):
    return MemoFunction(lambda s: surface.eval(s, np.full_like(s, tj)), domain, budget=budget)


def _trace_along_t(surface, si, domain, budget):
    return MemoFunction(lambda t: surface.eval(np.full_like(t, si), t), domain, budget=budget)


def _resampled(f: UFunction, knots, per_cell: int) -> UFunction:
    frac = np.linspace(0.0, 1.0, per_cell + 1)[:-1]
    x = (knots[:-1, None] + np.diff(knots)[:, None] * frac[None, :]).reshape(-1)
    x = np.append(x, knots[-1])
    return UFunction.piecewise_linear(x, f(x))


def restrict_to_grid(surface: PiecewiseCoonsSurface, grid2: GridT, *, level: int | None = None,
                     budget: EvalBudget | None = None, resample: int | None = None
                     ) -> NetOfFunctions:
    """Net of the traces of ``surface`` along the lines of ``grid2``.

    With ``resample=M`` each trace is replaced by its piecewise-linear
    interpolant on ``M`` samples per cell of ``grid2``; this is an
    approximation of the exact traces.
    """
    R = surface.rect
    R2 = grid2.rect
    if R2.a < R.a or R2.b > R.b or R2.c < R.c or R2.d > R.d:
        raise OutOfDomain(f"grid {R2} not contained in the surface domain {R}")
    s_dom = (R2.a, R2.b)
    t_dom = (R2.c, R2.d)
    phi = [_trace_along_s(surface, float(tj), s_dom, budget) for tj in grid2.t]
    psi = [_trace_along_t(surface, float(si), t_dom, budget) for si in grid2.s]
    if resample is not None:
        if resample < 1:
            raise ValueError("resample must be >= 1")
        phi = [_resampled(f, grid2.s, resample) for f in phi]
        psi = [_resampled(f, grid2.t, resample) for f in psi]
    lvl = surface.net.level + 1 if level is None else level
    return NetOfFunctions(grid2, phi, psi, lvl)


def bc_step(net: NetOfFunctions, gs: WeightPair, gt: WeightPair, **kwargs) -> NetOfFunctions:
    """One refinement step: build the Coons surface, refine the grid, restrict."""
    surface = PiecewiseCoonsSurface(net)
    return restrict_to_grid(surface, refine_grid(net.grid, gs, gt), **kwargs)


def estimate_bmsdd(net: NetOfFunctions, samples_per_interval: int = DEFAULT_BMSDD_SAMPLES) -> float:
    """Sampled maximum of ``|MSDD|`` over adjacent-line configurations.

    Two knot-adjacent lines in one direction are paired with ``tau`` (or
    ``sigma``) pairs sampled inside one grid interval of the other direction.
    This is a lower estimate of the net's BMSDD constant.
    """
    if samples_per_interval < 2:
        raise ValueError("samples_per_interval must be >= 2")
    g = net.grid
    frac = np.linspace(0.0, 1.0, samples_per_interval)

    def adjacent_max(knots, cross_knots, funcs):
        # funcs[i] is the u-function on line knots[i], parametrised along cross_knots
        x = cross_knots[:-1, None] + np.diff(cross_knots)[:, None] * frac[None, :]
        dx = x[:, None, :] - x[:, :, None]
        off = ~np.eye(samples_per_interval, dtype=bool)
        vals = [np.asarray(f(x.reshape(-1))).reshape(x.shape + (-1,)) for f in funcs]
        best = 0.0
        for a in range(len(knots) - 1):
            D = vals[a + 1] - vals[a]
            dD = D[:, None, :, :] - D[:, :, None, :]
            q = np.abs(dD[:, off, :]) / (dx[:, off, None] * (knots[a + 1] - knots[a]))
            best = max(best, float(q.max()))
        return best

    case_a = adjacent_max(g.s, g.t, net.psi)
    case_b = adjacent_max(g.t, g.s, net.phi)
    return max(case_a, case_b)


def net_successive_bound(L: float, k: int, h_s: float, h_t: float) -> float:
    """``3^(k+1) L h_s h_t / 4`` with the level ``k+1`` mesh sizes."""
    return 3.0 ** (k + 1) * L * h_s * h_t / 4.0


def net_tail_bound(L: float, H: float, mu_star: float, k: int, force: bool = False) -> float:
    """``(3 L H / 4) (3 mu*^2)^k``."""
    if L < 0 or H < 0:
        raise ValueError("L and H must be non-negative")
    if not (0 < mu_star < NETS_THRESHOLD) and not force:
        raise NotCertified(f"mu* = {mu_star} outside (0, sqrt(3)/3)")
    return 3.0 * L * H / 4.0 * (3.0 * mu_star ** 2) ** k


@dataclass(eq=False)
class NetRun:
    nets: list[NetOfFunctions]
    surfaces: list[PiecewiseCoonsSurface]
    bmsdd_L: float
    bmsdd_exact: bool
    certificate: Certificate
    tail_bounds: list[float] | None
    forced: bool = False
    resampled: bool = False
    budget: EvalBudget | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def K(self) -> int:
        return len(self.nets) - 1

    @property
    def H(self) -> float:
        g = self.nets[0].grid
        return g.h_s * g.h_t

    def successive_bound(self, k: int) -> float:
        g = self.nets[k + 1].grid
        return net_successive_bound(self.bmsdd_L, k, g.h_s, g.h_t)


def run_nets(net0: NetOfFunctions, s_schedule: WeightSchedule, t_schedule: WeightSchedule,
             K: int, *, force: bool = False, bmsdd_L: float | None = None,
             bmsdd_samples: int = DEFAULT_BMSDD_SAMPLES, resample: int | None = None,
             budget: EvalBudget | None = None) -> NetRun:
    """Run ``K`` steps of corner cutting for nets.

    Without ``force``, requires ``mu* < sqrt(3)/3``. Forced runs with an
    uncertified ``mu*`` carry no tail bounds.
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    cert = certify_nets(s_schedule.truncated(max(K, 1)), t_schedule.truncated(max(K, 1)))
    if not cert.nets_convergent and not force:
        raise NotCertified(f"mu* = {cert.mu_sup} is not < sqrt(3)/3")
    budget = budget if budget is not None else EvalBudget()
    nets = [net0]
    surfaces = [PiecewiseCoonsSurface(net0)]
    for k in range(K):
        nxt = restrict_to_grid(
            surfaces[-1],
            refine_grid(nets[-1].grid, s_schedule.pair(k), t_schedule.pair(k)),
            level=k + 1, budget=budget, resample=resample,
        )
        nets.append(nxt)
        surfaces.append(PiecewiseCoonsSurface(nxt))
    notes = []
    exact = bmsdd_L is not None
    if bmsdd_L is None:
        bmsdd_L = estimate_bmsdd(net0, bmsdd_samples)
        notes.append(f"BMSDD constant estimated with {bmsdd_samples} samples per interval")
    if resample is not None:
        notes.append(f"traces resampled piecewise-linearly with {resample} samples per cell")
    g0 = net0.grid
    H = g0.h_s * g0.h_t
    tails = None
    if cert.nets_convergent:
        tails = [net_tail_bound(bmsdd_L, H, cert.mu_sup, k) for k in range(K)]
    return NetRun(
        nets=nets, surfaces=surfaces, bmsdd_L=float(bmsdd_L), bmsdd_exact=exact,
        certificate=cert, tail_bounds=tails, forced=force and not cert.nets_convergent,
        resampled=resample is not None, budget=budget, notes=notes,
    )


def sample_grid(R: Rect, samples: int):
    s = np.linspace(R.a, R.b, samples)
    t = np.linspace(R.c, R.d, samples)
    return np.meshgrid(s, t, indexing="ij")


def surface_distance(a: PiecewiseCoonsSurface, b: PiecewiseCoonsSurface, R: Rect,
                     samples: int) -> float:
    S, T = sample_grid(R, samples)
    return float(np.max(np.abs(a.eval(S, T) - b.eval(S, T))))


def net_successive_distance(run: NetRun, k: int, samples: int = 33) -> float:
    """Sampled ``||C(N^(k+1)) - C(N^k)||`` on the finest level's rectangle."""
    if not 0 <= k < run.K:
        raise IndexError(f"k must lie in [0, {run.K}), got {k}")
    if samples < 2:
        raise ValueError("samples must be >= 2")
    R = run.nets[-1].grid.rect
    return surface_distance(run.surfaces[k + 1], run.surfaces[k], R, samples)

