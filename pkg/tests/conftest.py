import numpy as np
import pytest

from cornercut.weights import validate_weight_pair

SQUARE = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]


def random_pair(rng, period=None, slack=0.02):
    """Random admissible weight pair with every class quantity above ``slack``."""
    period = period or int(rng.integers(1, 4))
    alpha = rng.uniform(slack, 1 - 2 * slack, period)
    beta = np.array([rng.uniform(a + slack, 1 - slack) for a in alpha])
    return validate_weight_pair(alpha, beta)


def naive_corner_cut(P, u, alpha, beta, period=None):
    """Loop-based reference for one corner cutting step.

    ``period`` set means a closed polygon whose last edge returns to ``P[0]``
    at parameter ``u[0] + period``.
    """
    P = [np.asarray(p, dtype=float) for p in P]
    m = len(P)
    closed = period is not None
    Q, v = [], []
    for i in range(m if closed else m - 1):
        a = alpha[i % len(alpha)]
        b = beta[i % len(beta)]
        p0, p1 = P[i], P[(i + 1) % m]
        u0 = u[i]
        u1 = u[i + 1] if i + 1 < m else u[0] + period
        Q.append((1 - a) * p0 + a * p1)
        Q.append((1 - b) * p0 + b * p1)
        v.append((1 - a) * u0 + a * u1)
        v.append((1 - b) * u0 + b * u1)
    return np.array(Q), np.array(v)


def naive_polyline(knots, values, x):
    """Reference piecewise-linear evaluation by scanning the intervals."""
    for i in range(len(knots) - 1):
        a, b = knots[i], knots[i + 1]
        if a <= x <= b:
            return (x - a) / (b - a) * np.asarray(values[i + 1]) + (b - x) / (b - a) * np.asarray(values[i])
    raise ValueError(x)


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
