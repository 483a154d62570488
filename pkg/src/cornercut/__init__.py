"""Non-uniform corner cutting for point sequences and nets of functions."""

__version__ = "0.1.0"

from .exceptions import (  # noqa: E402
    BudgetExceeded, ClassViolation, ConfigError, CornerCutError, EmptySchedule,
    IncompatibleCorners, LengthMismatch, NotCertified, OutOfDomain, ScheduleExhausted,
)
from .weights import (  # noqa: E402
    Certificate, WeightPair, WeightSchedule, certify, certify_nets, mu, validate_weight_pair,
)
from .points import (  # noqa: E402
    PointsRun, PolylineLevel, corner_cut_step, lipschitz_constant, make_level, mesh_size,
    polyline_eval, run_points, successive_sup_distance, sup_distance,
)
from .transfinite import (  # noqa: E402
    CoonsPatch, Rect, UFunction, bilinear_patch, boundary_patch, coons_error_bound,
    coons_error_exact, coons_eval, divided_diff2, linear_interp, linear_interp_error_bound, msdd,
)
from .nets import (  # noqa: E402
    GridT, NetOfFunctions, NetRun, PiecewiseCoonsSurface, check_c0, estimate_bmsdd,
    net_from_function, net_successive_distance, net_tail_bound, refine_grid, restrict_to_grid,
    run_nets, surface_eval,
)
from .estimators import CoonsNetRefiner, CornerCuttingCurve  # noqa: E402
