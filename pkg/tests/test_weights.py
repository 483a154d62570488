import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cornercut.exceptions import ClassViolation, EmptySchedule, LengthMismatch, ScheduleExhausted
from cornercut.weights import (
    NETS_THRESHOLD, WeightSchedule, certify, certify_nets, class_slack, mu, validate_weight_pair,
)


def test_chaikin_pair_is_valid():
    pair = validate_weight_pair([0.25], [0.75], margin=0)
    assert class_slack(pair) == 0.25


def test_equal_alpha_beta_rejected():
    with pytest.raises(ClassViolation) as exc:
        validate_weight_pair([0.5], [0.5])
    assert exc.value.quantity == "beta-alpha"
    assert exc.value.index == 0


def test_two_period_min():
    # quantities: alpha .1 .2, 1-beta .4 .1, beta-alpha .5 .7
    pair = validate_weight_pair([0.1, 0.2], [0.6, 0.9])
    assert class_slack(pair) == pytest.approx(0.1)


@pytest.mark.parametrize("alpha, beta, quantity, index", [
    ([0.0], [0.5], "alpha", 0),
    ([0.1, 0.2], [0.5, 1.0], "1-beta", 1),
    ([0.3, 0.6], [0.5, 0.4], "beta-alpha", 1),
])
def test_violation_reports_quantity_and_index(alpha, beta, quantity, index):
    with pytest.raises(ClassViolation) as exc:
        validate_weight_pair(alpha, beta)
    assert (exc.value.quantity, exc.value.index) == (quantity, index)


def test_margin_is_enforced():
    validate_weight_pair([0.01], [0.5], margin=0.005)
    with pytest.raises(ClassViolation):
        validate_weight_pair([0.01], [0.5], margin=0.02)


def test_length_mismatch():
    with pytest.raises(LengthMismatch):
        validate_weight_pair([0.1, 0.2], [0.5])
    with pytest.raises(LengthMismatch):
        validate_weight_pair([], [])


@pytest.mark.parametrize("alpha, beta, expected", [
    ([0.25], [0.75], 0.5),
    ([0.1], [0.9], 0.8),
    # {0.3, 0.4, 1-0.8+0.2, 1-0.5+0.4}
    ([0.2, 0.4], [0.5, 0.8], 0.9),
])
def test_mu_values(alpha, beta, expected):
    assert mu(validate_weight_pair(alpha, beta)) == pytest.approx(expected, abs=1e-15)


def test_certify_chaikin():
    cert = certify(WeightSchedule.chaikin())
    assert cert.mu_sup == 0.5
    assert cert.points_convergent and cert.nets_convergent
    assert 0.5 < NETS_THRESHOLD < 0.58


def test_certify_wide_cut():
    cert = certify(WeightSchedule.constant_pair(validate_weight_pair([0.05], [0.95])))
    assert cert.mu_sup == pytest.approx(0.9)
    assert cert.points_convergent
    assert not cert.nets_convergent


def test_certify_empty_schedule():
    with pytest.raises(EmptySchedule):
        certify(WeightSchedule([]))


def test_per_level_schedule():
    pairs = [validate_weight_pair([0.25], [0.75]), validate_weight_pair([0.1], [0.9])]
    sched = WeightSchedule(pairs)
    cert = certify(sched)
    assert cert.mu_per_level == (0.5, pytest.approx(0.8))
    assert cert.mu_sup == pytest.approx(0.8)
    assert sched.pair(1) is pairs[1]
    with pytest.raises(ScheduleExhausted):
        sched.pair(2)


def test_certify_nets_takes_max_direction():
    s = WeightSchedule.chaikin()
    t = WeightSchedule.constant_pair(validate_weight_pair([0.2], [0.7]))
    cert = certify_nets(s, t)
    assert cert.mu_sup == pytest.approx(0.5)
    t2 = WeightSchedule.constant_pair(validate_weight_pair([0.1], [0.8]))
    assert certify_nets(s, t2).mu_sup == pytest.approx(0.7)
    assert not certify_nets(s, t2).nets_convergent


@st.composite
def weight_pairs(draw):
    n = draw(st.integers(1, 5))
    alpha, beta = [], []
    for _ in range(n):
        a = draw(st.floats(0.001, 0.99))
        b = draw(st.floats(a + 0.001, 0.999)) if a + 0.001 < 0.999 else 0.999
        alpha.append(a)
        beta.append(b)
    return alpha, beta


def _brute_mu(alpha, beta, reps=3):
    # sup over a window of the periodic extension
    n = len(alpha)
    vals = []
    for i in range(-n * reps, n * reps):
        vals.append(beta[i % n] - alpha[i % n])
        vals.append(1 - beta[(i - 1) % n] + alpha[i % n])
    return max(vals)


@settings(max_examples=200, deadline=None)
@given(weight_pairs())
def test_mu_matches_periodic_sup(ab):
    alpha, beta = ab
    try:
        pair = validate_weight_pair(alpha, beta, margin=0)
    except ClassViolation:
        return
    m = mu(pair)
    assert m == pytest.approx(_brute_mu(alpha, beta), abs=1e-15)
    assert m >= max(b - a for a, b in zip(alpha, beta)) > 0
    assert (m < 1) == (_brute_mu(alpha, beta) < 1)


@settings(max_examples=100, deadline=None)
@given(weight_pairs(), st.integers(0, 4))
def test_mu_invariant_under_cyclic_shift(ab, shift):
    alpha, beta = ab
    try:
        pair = validate_weight_pair(alpha, beta, margin=0)
    except ClassViolation:
        return
    shifted = validate_weight_pair(np.roll(alpha, shift), np.roll(beta, shift), margin=0)
    assert mu(shifted) == mu(pair)


def test_mu_at_least_half():
    # beta_i - alpha_i + (1 - beta_i + alpha_{i+1}) >= 1 for a constant pair
    for a, b in [(0.1, 0.3), (0.4, 0.6), (0.3, 0.9)]:
        assert mu(validate_weight_pair([a], [b])) >= 0.5 - 1e-15
