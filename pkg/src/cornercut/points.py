"""Corner cutting of point sequences and the associated polyline interpolants.

Each refinement level carries a strictly increasing parameter sequence ``u``
refined by the same convex combinations as the points, so that every new
point lies on the previous polyline at its own parameter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_knots, check_points
from .exceptions import CornerCutError, NotCertified, OutOfDomain
from .transfinite import linear_interp
from .weights import Certificate, WeightPair, WeightSchedule, certify


@dataclass(frozen=True, eq=False)
class PolylineLevel:
    """Points ``P`` (shape ``(m, n)``) at parameters ``u`` for one refinement level.

    For ``closed=True`` the sequence is cyclic: the edge after the last point
    returns to ``P[0]`` at parameter ``u[0] + period``.
    """

    level: int
    u: np.ndarray
    P: np.ndarray
    closed: bool = False
    period: float | None = None

    def __post_init__(self):
        u = check_knots(self.u, name="u")
        P = check_points(self.P)
        if len(P) != len(u):
            raise ValueError(f"{len(P)} points but {len(u)} parameters")
        if self.closed:
            if len(P) < 3:
                raise ValueError("a closed polyline needs at least 3 points")
            if self.period is None or not self.period > u[-1] - u[0]:
                raise ValueError("closed polyline needs period > u[-1] - u[0]")
            object.__setattr__(self, "period", float(self.period))
        elif self.period is not None:
            raise ValueError("period only applies to closed polylines")
        u.setflags(write=False)
        P.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "P", P)

    @property
    def n_edges(self) -> int:
        return len(self.u) if self.closed else len(self.u) - 1

    @property
    def dim(self) -> int:
        return self.P.shape[1]

    def knots_ext(self) -> np.ndarray:
        """Parameters with the closing knot appended for closed polylines."""
        if self.closed:
            return np.append(self.u, self.u[0] + self.period)
        return self.u

    def points_ext(self) -> np.ndarray:
        if self.closed:
            return np.vstack([self.P, self.P[:1]])
        return self.P

    @property
    def domain(self) -> tuple[float, float]:
        ext = self.knots_ext()
        return float(ext[0]), float(ext[-1])


def make_level(P, u=None, closed=False, level=0) -> PolylineLevel:
    """Build a level, defaulting ``u`` to ``0, 1, 2, ...``.

    For closed input ``u`` may carry one extra trailing entry, taken as the
    parameter at which the polyline returns to ``P[0]``.
    """
    P = check_points(P)
    m = len(P)
    if u is None:
        u = np.arange(m, dtype=float)
        period = float(m) if closed else None
    else:
        u = np.asarray(u, dtype=float).reshape(-1)
        period = None
        if closed:
            if len(u) == m + 1:
                period = float(u[-1] - u[0])
                u = u[:-1]
            else:
                raise ValueError("closed input needs len(u) == len(P) + 1 (closing knot)")
    return PolylineLevel(level, u, P, closed, period)


def corner_cut_step(level: PolylineLevel, pair: WeightPair) -> PolylineLevel:
    """Apply one corner cutting step to points and parameters alike."""
    if level.closed and level.n_edges % pair.period:
        # otherwise the cyclic sequence is not a periodic extension of the pair
        raise CornerCutError(
            f"closed polyline with {level.n_edges} edges is incompatible with "
            f"weight period {pair.period}"
        )
    if not level.closed and len(level.u) < 2:
        raise CornerCutError("open corner cutting needs at least 2 points")
    ext_u = level.knots_ext()
    ext_P = level.points_ext()
    i = np.arange(level.n_edges)
    alpha, beta = pair.at(i)
    u_lo, u_hi = ext_u[:-1], ext_u[1:]
    P_lo, P_hi = ext_P[:-1], ext_P[1:]
    m = level.n_edges
    u_new = np.empty(2 * m)
    u_new[0::2] = (1 - alpha) * u_lo + alpha * u_hi
    u_new[1::2] = (1 - beta) * u_lo + beta * u_hi
    P_new = np.empty((2 * m, level.dim))
    P_new[0::2] = (1 - alpha)[:, None] * P_lo + alpha[:, None] * P_hi
    P_new[1::2] = (1 - beta)[:, None] * P_lo + beta[:, None] * P_hi
    return PolylineLevel(level.level + 1, u_new, P_new, level.closed, level.period)


def polyline_eval(level: PolylineLevel, x) -> np.ndarray:
    """Evaluate the piecewise-linear interpolant of ``level`` at ``x``.

    Open polylines raise :class:`OutOfDomain` outside ``[u[0], u[-1]]``;
    closed ones wrap ``x`` periodically. Returns shape ``x.shape + (n,)``.
    """
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1)
    knots = level.knots_ext()
    pts = level.points_ext()
    lo, hi = knots[0], knots[-1]
    if level.closed:
        flat = lo + np.mod(flat - lo, level.period)
        # mod can round up to exactly the period
        flat = np.where(flat >= hi, lo, flat)
    elif np.any((flat < lo) | (flat > hi)):
        raise OutOfDomain(f"parameter outside [{lo}, {hi}]")
    i = np.clip(np.searchsorted(knots, flat, side="right") - 1, 0, len(knots) - 2)
    out = linear_interp(knots[i], knots[i + 1], pts[i], pts[i + 1], flat)
    return out.reshape(x.shape + (level.dim,))


def mesh_size(level: PolylineLevel) -> float:
    """Largest consecutive parameter gap (including the closing edge)."""
    return float(np.max(np.diff(level.knots_ext())))


def lipschitz_constant(level: PolylineLevel) -> float:
    """Lipschitz constant (infinity norm) of the polyline interpolant."""
    dP = np.abs(np.diff(level.points_ext(), axis=0)).max(axis=1)
    du = np.diff(level.knots_ext())
    return float(np.max(dP / du))


@dataclass(frozen=True, eq=False)
class PointsRun:
    levels: tuple[PolylineLevel, ...]
    certificate: Certificate
    lipschitz_L: float
    tail_bounds: tuple[float, ...]
    forced: bool = False
    mesh_sizes: tuple[float, ...] = field(default=())

    @property
    def K(self) -> int:
        return len(self.levels) - 1


def tail_bound(L: float, d0: float, mu: float, k: int) -> float:
    """``L d0 mu^(k+1) / (2 (1 - mu))``; infinite when ``mu >= 1``."""
    if mu >= 1:
        return math.inf
    return L * d0 * mu ** (k + 1) / (2.0 * (1.0 - mu))


def run_points(P0, u0=None, schedule: WeightSchedule | None = None, K: int = 0, *,
               closed: bool = False, force: bool = False) -> PointsRun:
    """Run ``K`` corner cutting steps on ``P0``.

    Raises :class:`NotCertified` when the schedule's contraction factor is not
    below 1, unless ``force`` is set.
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    schedule = schedule if schedule is not None else WeightSchedule.chaikin()
    level0 = P0 if isinstance(P0, PolylineLevel) else make_level(P0, u0, closed)
    used = schedule.truncated(max(K, 1))
    cert = certify(used)
    if not cert.points_convergent and not force:
        raise NotCertified(f"sup mu = {cert.mu_sup} is not < 1")
    levels = [level0]
    for k in range(K):
        levels.append(corner_cut_step(levels[-1], schedule.pair(k)))
    L = lipschitz_constant(level0)
    d0 = mesh_size(level0)
    tails = tuple(tail_bound(L, d0, cert.mu_sup, k) for k in range(K + 1))
    return PointsRun(
        levels=tuple(levels),
        certificate=cert,
        lipschitz_L=L,
        tail_bounds=tails,
        forced=force and not cert.points_convergent,
        mesh_sizes=tuple(mesh_size(lv) for lv in levels),
    )


def _sample_params(fine: PolylineLevel, coarse: PolylineLevel, samples_per_interval: int):
    """Sample grid on the fine level's domain: both levels' breakpoints plus interior points."""
    if samples_per_interval < 1:
        raise ValueError("samples_per_interval must be >= 1")
    knots = fine.knots_ext()
    lo, hi = knots[0], knots[-1]
    frac = np.linspace(0.0, 1.0, samples_per_interval + 1)
    grid = (knots[:-1, None] + np.diff(knots)[:, None] * frac[None, :]).reshape(-1)
    cknots = coarse.knots_ext()
    if coarse.closed:
        # coarse breakpoints shifted into the fine period window
        shifted = np.concatenate([cknots - coarse.period, cknots, cknots + coarse.period])
        extra = shifted[(shifted >= lo) & (shifted <= hi)]
    else:
        extra = cknots[(cknots >= lo) & (cknots <= hi)]
    return np.unique(np.concatenate([grid, extra, [lo, hi]]))


def sup_distance(a: PolylineLevel, b: PolylineLevel, samples_per_interval: int = 64) -> float:
    """Sampled ``sup |L_a - L_b|`` (infinity norm) on the finer level's domain."""
    fine, coarse = (a, b) if len(a.u) >= len(b.u) else (b, a)
    x = _sample_params(fine, coarse, samples_per_interval)
    diff = polyline_eval(fine, x) - polyline_eval(coarse, x)
    return float(np.max(np.abs(diff)))


def successive_sup_distance(run: PointsRun, k: int, samples_per_interval: int = 64) -> float:
    """Sampled distance between the polylines of levels ``k`` and ``k + 1``."""
    if not 0 <= k < run.K:
        raise IndexError(f"k must lie in [0, {run.K}), got {k}")
    return sup_distance(run.levels[k + 1], run.levels[k], samples_per_interval)


def approx_error_bound(run: PointsRun, k: int) -> float:
    """``L d^(k+1) / 2``, the bound on the level ``k`` to ``k + 1`` distance."""
    return 0.5 * run.lipschitz_L * mesh_size(run.levels[k + 1])
