"""scikit-learn style wrappers around the point and net refinement runs."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import check_positive_int
from .nets import NetOfFunctions, run_nets
from .points import make_level, polyline_eval, run_points
from .weights import WeightSchedule, validate_weight_pair


def _schedule(alpha, beta, margin):
    return WeightSchedule.constant_pair(validate_weight_pair(alpha, beta, margin))


class CornerCuttingCurve(TransformerMixin, BaseEstimator):
    """Corner cutting of a polyline with a constant periodic weight pair.

    Parameters
    ----------
    alpha, beta : float or sequence of float
        One period of cut positions on each edge.
    n_levels : int
        Number of refinement steps.
    closed : bool
        Treat the input as a closed polygon.
    margin : float
        Strictness margin for the weight class check.
    force : bool
        Run even when the contraction factor is not below 1.

    Attributes
    ----------
    run_ : PointsRun
    levels_ : tuple of PolylineLevel
    certificate_ : Certificate
    lipschitz_ : float
    tail_bounds_ : tuple of float
    """

    def __init__(self, alpha=0.25, beta=0.75, n_levels=5, closed=False, margin=1e-12,
                 force=False):
        self.alpha = alpha
        self.beta = beta
        self.n_levels = n_levels
        self.closed = closed
        self.margin = margin
        self.force = force

    def _run(self, X, u=None):
        X = check_array(X, ensure_min_samples=3 if self.closed else 2)
        K = check_positive_int(self.n_levels, "n_levels")
        schedule = _schedule(self.alpha, self.beta, self.margin)
        level0 = make_level(X, u, closed=self.closed)
        return run_points(level0, schedule=schedule, K=K, force=self.force)

    def fit(self, X, y=None, u=None):
        run = self._run(X, u)
        self.run_ = run
        self.levels_ = run.levels
        self.certificate_ = run.certificate
        self.lipschitz_ = run.lipschitz_L
        self.tail_bounds_ = run.tail_bounds
        self.n_features_in_ = run.levels[0].dim
        return self

    def transform(self, X, u=None):
        """Refined points of ``X`` after ``n_levels`` steps."""
        check_is_fitted(self, "run_")
        return np.array(self._run(X, u).levels[-1].P)

    def predict(self, u):
        """Evaluate the finest fitted polyline at parameters ``u``."""
        check_is_fitted(self, "run_")
        u = np.asarray(u, dtype=float)
        return polyline_eval(self.levels_[-1], u)


class CoonsNetRefiner(BaseEstimator):
    """Corner cutting of a C0 net of u-functions via piecewise Coons surfaces.

    ``fit`` takes a :class:`NetOfFunctions`; ``predict`` evaluates the finest
    piecewise Coons surface at rows ``(s, t)``.
    """

    def __init__(self, alpha_s=0.25, beta_s=0.75, alpha_t=0.25, beta_t=0.75, n_levels=3,
                 margin=1e-12, force=False, bmsdd=None, bmsdd_samples=32, resample=None):
        self.alpha_s = alpha_s
        self.beta_s = beta_s
        self.alpha_t = alpha_t
        self.beta_t = beta_t
        self.n_levels = n_levels
        self.margin = margin
        self.force = force
        self.bmsdd = bmsdd
        self.bmsdd_samples = bmsdd_samples
        self.resample = resample

    def fit(self, X: NetOfFunctions, y=None):
        if not isinstance(X, NetOfFunctions):
            raise TypeError("CoonsNetRefiner.fit expects a NetOfFunctions")
        K = check_positive_int(self.n_levels, "n_levels")
        run = run_nets(
            X,
            _schedule(self.alpha_s, self.beta_s, self.margin),
            _schedule(self.alpha_t, self.beta_t, self.margin),
            K,
            force=self.force,
            bmsdd_L=self.bmsdd,
            bmsdd_samples=self.bmsdd_samples,
            resample=self.resample,
        )
        self.run_ = run
        self.nets_ = run.nets
        self.surface_ = run.surfaces[-1]
        self.certificate_ = run.certificate
        self.bmsdd_ = run.bmsdd_L
        return self

    def predict(self, X):
        check_is_fitted(self, "run_")
        X = check_array(X)
        if X.shape[1] != 2:
            raise ValueError("predict expects rows (s, t)")
        return self.surface_.eval(X[:, 0], X[:, 1])
