"""Corner cutting weight pairs, schedules and convergence certificates.

A weight pair ``(alpha, beta)`` is stored as one period of a bi-infinite
sequence; index ``i`` maps to ``i mod period``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import ClassViolation, EmptySchedule, LengthMismatch, ScheduleExhausted

DEFAULT_MARGIN = 1e-12
#: Threshold on the contraction factor below which net refinement is certified.
NETS_THRESHOLD = math.sqrt(3.0) / 3.0


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class WeightPair:
    """One period of corner cutting weights.

    Use :func:`validate_weight_pair` to construct checked instances.
    """

    alpha: np.ndarray
    beta: np.ndarray
    margin: float = DEFAULT_MARGIN

    def __post_init__(self):
        object.__setattr__(self, "alpha", _frozen(self.alpha))
        object.__setattr__(self, "beta", _frozen(self.beta))

    @property
    def period(self) -> int:
        return len(self.alpha)

    def at(self, i):
        """Return ``(alpha_i, beta_i)`` under periodic extension (``i`` may be an array)."""
        idx = np.mod(i, self.period)
        return self.alpha[idx], self.beta[idx]

    def __repr__(self):
        return f"WeightPair(alpha={self.alpha.tolist()}, beta={self.beta.tolist()})"


def class_quantities(alpha, beta) -> dict[str, np.ndarray]:
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    return {"alpha": alpha, "1-beta": 1.0 - beta, "beta-alpha": beta - alpha}


def validate_weight_pair(alpha, beta, margin: float = DEFAULT_MARGIN) -> WeightPair:
    """Check that ``min{alpha_i, 1-beta_i, beta_i-alpha_i} > margin`` over one period.

    Raises
    ------
    LengthMismatch
        If ``alpha`` and ``beta`` differ in length or are empty.
    ClassViolation
        Reports the first failing quantity and its index.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    if alpha.ndim != 1 or beta.ndim != 1:
        raise LengthMismatch("alpha and beta must be one-dimensional")
    if len(alpha) != len(beta):
        raise LengthMismatch(f"alpha has {len(alpha)} entries, beta has {len(beta)}")
    if len(alpha) == 0:
        raise LengthMismatch("weight period must be non-empty")
    if margin < 0 or not np.isfinite(margin):
        raise ValueError(f"margin must be finite and >= 0, got {margin!r}")
    if not (np.all(np.isfinite(alpha)) and np.all(np.isfinite(beta))):
        raise ValueError("weights must be finite")
    for i in range(len(alpha)):
        for name, values in class_quantities(alpha, beta).items():
            if not values[i] > margin:
                raise ClassViolation(name, i, float(values[i]), margin)
    return WeightPair(alpha, beta, margin)


def class_slack(pair: WeightPair) -> float:
    """Smallest of the three class quantities over one period."""
    return float(min(v.min() for v in class_quantities(pair.alpha, pair.beta).values()))


def mu(pair: WeightPair) -> float:
    """Contraction factor ``max_i {beta_i - alpha_i, 1 - beta_{i-1} + alpha_i}``."""
    inner = pair.beta - pair.alpha
    across = 1.0 - np.roll(pair.beta, 1) + pair.alpha
    return float(max(inner.max(), across.max()))


class WeightSchedule:
    """Per-level weight pairs.

    Either a single pair reused at every level (``constant``) or an explicit
    list for levels ``0..K-1``.
    """

    def __init__(self, levels: Sequence[WeightPair], constant: bool = False):
        levels = tuple(levels)
        if constant and len(levels) != 1:
            raise ValueError("a constant schedule holds exactly one pair")
        self._levels = levels
        self.constant = constant

    @classmethod
    def constant_pair(cls, pair: WeightPair) -> "WeightSchedule":
        return cls([pair], constant=True)

    @classmethod
    def chaikin(cls) -> "WeightSchedule":
        return cls.constant_pair(validate_weight_pair([0.25], [0.75]))

    @property
    def levels(self) -> tuple[WeightPair, ...]:
        return self._levels

    def __len__(self):
        return len(self._levels)

    def pair(self, k: int) -> WeightPair:
        if not self._levels:
            raise EmptySchedule("weight schedule has no levels")
        if self.constant:
            return self._levels[0]
        if not 0 <= k < len(self._levels):
            raise ScheduleExhausted(
                f"schedule defines {len(self._levels)} levels, level {k} requested"
            )
        return self._levels[k]

    def covers(self, K: int) -> bool:
        return self.constant or len(self._levels) >= K

    def truncated(self, K: int) -> "WeightSchedule":
        """Schedule restricted to the levels actually used by a ``K``-step run."""
        if self.constant:
            return self
        if not self.covers(K):
            raise ScheduleExhausted(
                f"schedule defines {len(self._levels)} levels, {K} required"
            )
        return WeightSchedule(self._levels[:K])

    def __repr__(self):
        kind = "constant" if self.constant else f"{len(self)} levels"
        return f"WeightSchedule({kind})"


@dataclass(frozen=True)
class Certificate:
    mu_per_level: tuple[float, ...]
    mu_sup: float
    points_convergent: bool
    nets_convergent: bool
    margin: float
    notes: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "mu_per_level": list(self.mu_per_level),
            "mu_sup": self.mu_sup,
            "points_threshold": 1.0,
            "nets_threshold": NETS_THRESHOLD,
            "points_convergent": self.points_convergent,
            "nets_convergent": self.nets_convergent,
            "margin": self.margin,
            "notes": list(self.notes),
        }


_RELAXED_NOTE = (
    "relaxed summability conditions on the per-level factors are not certified"
)


def _certificate(mus, margin) -> Certificate:
    mus = tuple(float(m) for m in mus)
    if not mus:
        raise EmptySchedule("cannot certify an empty schedule")
    mu_sup = max(mus)
    return Certificate(
        mu_per_level=mus,
        mu_sup=mu_sup,
        points_convergent=mu_sup < 1.0,
        nets_convergent=mu_sup < NETS_THRESHOLD,
        margin=margin,
        notes=(_RELAXED_NOTE,),
    )


def certify(schedule: WeightSchedule) -> Certificate:
    """Certificate for refinement of points with ``schedule``."""
    if len(schedule) == 0:
        raise EmptySchedule("cannot certify an empty schedule")
    mus = [mu(p) for p in schedule.levels]
    margin = min(p.margin for p in schedule.levels)
    return _certificate(mus, margin)


def certify_nets(s_schedule: WeightSchedule, t_schedule: WeightSchedule) -> Certificate:
    """Certificate for net refinement: per level, the larger factor of both directions."""
    if len(s_schedule) == 0 or len(t_schedule) == 0:
        raise EmptySchedule("cannot certify an empty schedule")
    if s_schedule.constant and t_schedule.constant:
        mus = [max(mu(s_schedule.pair(0)), mu(t_schedule.pair(0)))]
    else:
        n = max(
            1 if s_schedule.constant else len(s_schedule),
            1 if t_schedule.constant else len(t_schedule),
        )
        mus = [max(mu(s_schedule.pair(k)), mu(t_schedule.pair(k))) for k in range(n)]
    margin = min(p.margin for p in s_schedule.levels + t_schedule.levels)
    return _certificate(mus, margin)
