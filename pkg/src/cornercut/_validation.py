"""Input validation helpers shared by the functional API and the estimators."""
from __future__ import annotations

import numpy as np


def check_points(P, *, min_points: int = 2) -> np.ndarray:
    """Return ``P`` as a float array of shape ``(m, n)``; 1-d input becomes ``(m, 1)``."""
    P = np.array(P, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    if P.ndim != 2:
        raise ValueError(f"points must be a 2-d array, got shape {P.shape}")
    if len(P) < min_points:
        raise ValueError(f"need at least {min_points} points, got {len(P)}")
    if not np.all(np.isfinite(P)):
        raise ValueError("points must be finite")
    return P


def check_knots(u, *, name: str = "knots", min_len: int = 2) -> np.ndarray:
    """Return ``u`` as a strictly increasing finite 1-d float array."""
    u = np.array(u, dtype=float)
    if u.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if len(u) < min_len:
        raise ValueError(f"{name} needs at least {min_len} entries, got {len(u)}")
    if not np.all(np.isfinite(u)):
        raise ValueError(f"{name} must be finite")
    if np.any(np.diff(u) <= 0):
        raise ValueError(f"{name} must be strictly increasing")
    return u


def check_positive_int(value, name: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)
