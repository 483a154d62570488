import numpy as np
import pytest

from cornercut.exceptions import BudgetExceeded, CornerCutError, NotCertified, OutOfDomain
from cornercut.nets import (
    EvalBudget, GridT, MemoFunction, NetOfFunctions, PiecewiseCoonsSurface, bc_step, check_c0,
    estimate_bmsdd, net_from_function, net_successive_bound, net_successive_distance,
    net_tail_bound, refine_grid, refine_knots, restrict_to_grid, run_nets, surface_distance,
    surface_eval,
)
from cornercut.registry import polynomial
from cornercut.transfinite import UFunction, coons_eval
from cornercut.weights import WeightSchedule, mu, validate_weight_pair

CHAIKIN = validate_weight_pair([0.25], [0.75])
SINCOS = lambda s, t: np.sin(s) * np.cos(t)


def naive_coons(net, s, t):
    """Loop oracle: locate the cell and blend its four boundary curves."""
    g = net.grid
    i = min(max(np.searchsorted(g.s, s, side="right") - 1, 0), len(g.s) - 2)
    j = min(max(np.searchsorted(g.t, t, side="right") - 1, 0), len(g.t) - 2)
    u = (s - g.s[i]) / (g.s[i + 1] - g.s[i])
    v = (t - g.t[j]) / (g.t[j + 1] - g.t[j])
    f = lambda fn, x: float(np.asarray(fn(np.array([x])))[0])
    left, right = f(net.psi[i], t), f(net.psi[i + 1], t)
    bottom, top = f(net.phi[j], s), f(net.phi[j + 1], s)
    c00, c01 = f(net.phi[j], g.s[i]), f(net.phi[j + 1], g.s[i])
    c10, c11 = f(net.phi[j], g.s[i + 1]), f(net.phi[j + 1], g.s[i + 1])
    bil = (1 - u) * (1 - v) * c00 + (1 - u) * v * c01 + u * (1 - v) * c10 + u * v * c11
    return (1 - u) * left + u * right + (1 - v) * bottom + v * top - bil


# -- grids ---------------------------------------------------------------------

def test_refine_knots_examples():
    assert np.array_equal(refine_knots([0, 1, 2, 3], CHAIKIN),
                          [0.25, 0.75, 1.25, 1.75, 2.25, 2.75])
    g = refine_grid(GridT.integer((0, 3), (0, 3)), CHAIKIN,
                    validate_weight_pair([0.2], [0.7]))
    assert np.allclose(np.diff(g.s), 0.5)
    assert np.allclose(np.diff(g.t), 0.5)
    assert np.allclose(g.t[:2], [0.2, 0.7])
    with pytest.raises(CornerCutError):
        refine_knots([1.0], CHAIKIN)


def test_grid_validation_and_locate():
    with pytest.raises(ValueError):
        GridT([0.0, 0.0, 1.0], [0.0, 1.0])
    g = GridT([0.0, 1.0, 3.0], [0.0, 2.0])
    assert g.h_s == 2.0 and g.h_t == 2.0
    i, j = g.locate(np.array([0.0, 1.0, 3.0]), np.array([0.0, 1.0, 2.0]))
    assert i.tolist() == [0, 1, 1] and j.tolist() == [0, 0, 0]


def test_grid_contraction(rng):
    for _ in range(10):
        gs = validate_weight_pair(*np.sort(rng.uniform(0.05, 0.95, 2))[:, None])
        gt = validate_weight_pair(*np.sort(rng.uniform(0.05, 0.95, 2))[:, None])
        g = GridT(np.cumsum(rng.uniform(0.5, 2, 5)), np.cumsum(rng.uniform(0.5, 2, 4)))
        for _ in range(3):
            g2 = refine_grid(g, gs, gt)
            assert g2.h_s <= mu(gs) * g.h_s * (1 + 1e-12)
            assert g2.h_t <= mu(gt) * g.h_t * (1 + 1e-12)
            g = g2


# -- nets and C0 -----------------------------------------------------------------

def test_net_shapes_and_repr():
    net = net_from_function(SINCOS, GridT.integer((0, 3), (0, 2)))
    assert len(net.phi) == 3 and len(net.psi) == 4
    assert net.corners.shape == (4, 3)
    assert net.corners[2, 1] == pytest.approx(np.sin(2) * np.cos(1))
    assert "3x3" not in repr(net) and "4x3" in repr(net)
    with pytest.raises(ValueError):
        NetOfFunctions(net.grid, net.phi[:2], net.psi)


def test_check_c0_reports_perturbed_crossing():
    g = GridT.integer((0, 3), (0, 3))
    net = net_from_function(SINCOS, g)
    bump = lambda s: 1e-3 * np.maximum(0.0, 1 - np.abs(s - 2.0) / 0.5)
    phi = list(net.phi)
    phi[1] = UFunction(lambda s: SINCOS(s, np.full_like(s, 1.0)) + bump(s), (0.0, 3.0))
    bad = NetOfFunctions(g, phi, net.psi)
    found = check_c0(bad, tol=1e-6)
    assert [(c.i, c.j) for c in found] == [(2, 1)]
    assert found[0].gap == pytest.approx(1e-3)
    assert check_c0(bad, tol=1.0) == []
    assert check_c0(net) == []
    with pytest.raises(CornerCutError):
        PiecewiseCoonsSurface(bad)


def test_surface_eval_examples():
    g = GridT.integer((0, 2), (0, 2))
    surf = PiecewiseCoonsSurface(net_from_function(lambda s, t: s * t, g))
    assert surface_eval(surf, 0.5, 1.5) == pytest.approx(0.75)
    prod = PiecewiseCoonsSurface(net_from_function(lambda s, t: s ** 2 * t ** 2,
                                                   GridT.integer((0, 1), (0, 1))))
    assert surface_eval(prod, 0.5, 0.5) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(OutOfDomain):
        surf.eval(2.5, 0.0)


def test_surface_interpolates_net(rng):
    g = GridT(np.cumsum(rng.uniform(0.3, 1, 5)), np.cumsum(rng.uniform(0.3, 1, 4)))
    net = net_from_function(SINCOS, g)
    surf = PiecewiseCoonsSurface(net)
    for j, tj in enumerate(g.t):
        s = np.linspace(g.s[0], g.s[-1], 65)
        assert np.abs(surf.eval(s, tj) - net.phi[j](s)).max() <= 1e-13
    for i, si in enumerate(g.s):
        t = np.linspace(g.t[0], g.t[-1], 65)
        assert np.abs(surf.eval(si, t) - net.psi[i](t)).max() <= 1e-13


def test_surface_matches_loop_oracle(rng):
    g = GridT(np.cumsum(rng.uniform(0.3, 1, 4)), np.cumsum(rng.uniform(0.3, 1, 4)))
    net = net_from_function(lambda s, t: np.exp(s - t) + s ** 3 * t, g)
    surf = PiecewiseCoonsSurface(net)
    s = rng.uniform(g.s[0], g.s[-1], 40)
    t = rng.uniform(g.t[0], g.t[-1], 40)
    ref = np.array([naive_coons(net, a, b) for a, b in zip(s, t)])
    assert np.allclose(surf.eval(s, t), ref, rtol=0, atol=1e-12)


def test_surface_continuity_across_cells():
    net = net_from_function(lambda s, t: np.exp(s * t), GridT.integer((0, 3), (0, 3)))
    surf = PiecewiseCoonsSurface(net)
    eps = 1e-9
    # one-sided values differ by at most 2 eps times the slope; |grad exp(st)| <= 3 e^9
    tol = 2 * eps * 3 * np.exp(9) * 1.01
    t = np.linspace(0, 3, 31)
    for si in (1.0, 2.0):
        jump = np.abs(surf.eval(si - eps, t) - surf.eval(si + eps, t)).max()
        assert jump <= tol
    s = np.linspace(0, 3, 31)
    for tj in (1.0, 2.0):
        assert np.abs(surf.eval(s, tj - eps) - surf.eval(s, tj + eps)).max() <= tol


def test_vector_valued_net():
    F = lambda s, t: np.stack([s, t, s * t], axis=-1)
    net = net_from_function(F, GridT.integer((0, 2), (0, 2)))
    surf = PiecewiseCoonsSurface(net)
    out = surf.eval(np.array([0.5, 1.5]), np.array([0.25, 1.75]))
    assert out.shape == (2, 3)
    assert np.allclose(out, F(np.array([0.5, 1.5]), np.array([0.25, 1.75])))


# -- refinement -----------------------------------------------------------------

def test_restrict_same_grid_reproduces_net():
    g = GridT.integer((0, 3), (0, 3))
    net = net_from_function(SINCOS, g)
    again = restrict_to_grid(PiecewiseCoonsSurface(net), g)
    s = np.linspace(0, 3, 65)
    for j in range(len(g.t)):
        assert np.abs(again.phi[j](s) - net.phi[j](s)).max() <= 1e-14
    assert again.level == 1
    assert again.tags == {"surface-trace"}


def test_bilinear_net_is_fixed():
    F = lambda s, t: 1 + 2 * s - t + 0.5 * s * t
    g = GridT.integer((0, 3), (0, 3))
    net = bc_step(net_from_function(F, g), CHAIKIN, CHAIKIN)
    g1 = net.grid
    s = np.linspace(g1.s[0], g1.s[-1], 33)
    for j, tj in enumerate(g1.t):
        assert np.abs(net.phi[j](s) - F(s, tj)).max() <= 1e-13


def test_chaikin_step_matches_direct_coons(rng):
    g = GridT.integer((0, 3), (0, 2))
    net0 = net_from_function(SINCOS, g)
    net1 = bc_step(net0, CHAIKIN, CHAIKIN)
    for j, tj in enumerate(net1.grid.t):
        for s in rng.uniform(net1.grid.s[0], net1.grid.s[-1], 5):
            assert float(net1.phi[j](np.array([s]))[0]) == pytest.approx(
                naive_coons(net0, s, tj), abs=1e-13)
    for i, si in enumerate(net1.grid.s):
        for tj in net1.grid.t:
            assert float(net1.psi[i](np.array([tj]))[0]) == pytest.approx(
                naive_coons(net0, si, tj), abs=1e-13)


def test_restrict_outside_domain():
    surf = PiecewiseCoonsSurface(net_from_function(SINCOS, GridT.integer((0, 2), (0, 2))))
    with pytest.raises(OutOfDomain):
        restrict_to_grid(surf, GridT.integer((0, 3), (0, 2)))


def test_nesting_of_surfaces():
    run = run_nets(net_from_function(SINCOS, GridT.integer((0, 4), (0, 4))),
                   WeightSchedule.chaikin(), WeightSchedule.chaikin(), 3, bmsdd_L=1.0)
    for k in range(run.K):
        g = run.nets[k + 1].grid
        s = np.linspace(g.s[0], g.s[-1], 65)
        t = np.linspace(g.t[0], g.t[-1], 65)
        for tj in g.t:
            d = run.surfaces[k + 1].eval(s, tj) - run.surfaces[k].eval(s, tj)
            assert np.abs(d).max() <= 1e-10
        for si in g.s:
            d = run.surfaces[k + 1].eval(si, t) - run.surfaces[k].eval(si, t)
            assert np.abs(d).max() <= 1e-10


def test_memo_function_caches(rng):
    calls = []

    def f(x):
        calls.append(len(x))
        return x ** 2

    budget = EvalBudget(limit=100)
    m = MemoFunction(f, (0.0, 1.0), budget=budget)
    x = np.array([0.0, 0.5, -0.0, 0.5])
    assert np.array_equal(m(x), [0.0, 0.25, 0.0, 0.25])
    assert m.cache_size == 2 and budget.used == 2
    m(np.array([0.5, 1.0]))
    assert calls == [2, 1] and budget.used == 3


def test_budget_exceeded(monkeypatch):
    net0 = net_from_function(SINCOS, GridT.integer((0, 3), (0, 3)))
    with pytest.raises(BudgetExceeded):
        run_nets(net0, WeightSchedule.chaikin(), WeightSchedule.chaikin(), 3,
                 bmsdd_L=1.0, budget=EvalBudget(limit=10))
    monkeypatch.setenv("CORNERCUT_CACHE_BUDGET", "7")
    assert EvalBudget().limit == 7


def test_resample_mode_is_close():
    net0 = net_from_function(SINCOS, GridT.integer((0, 3), (0, 3)))
    exact = run_nets(net0, WeightSchedule.chaikin(), WeightSchedule.chaikin(), 2, bmsdd_L=1.0)
    approx = run_nets(net0, WeightSchedule.chaikin(), WeightSchedule.chaikin(), 2, bmsdd_L=1.0,
                      resample=16)
    assert approx.resampled and not exact.resampled
    assert any("resampled" in n for n in approx.notes)
    R = exact.nets[-1].grid.rect
    assert surface_distance(exact.surfaces[-1], approx.surfaces[-1], R, 33) <= 1e-3
    with pytest.raises(ValueError):
        run_nets(net0, WeightSchedule.chaikin(), WeightSchedule.chaikin(), 1, bmsdd_L=1.0,
                 resample=0)


# -- BMSDD and bounds -------------------------------------------------------------

def naive_bmsdd(net, n):
    g = net.grid
    best = 0.0
    for knots, cross, funcs in ((g.s, g.t, net.psi), (g.t, g.s, net.phi)):
        for a in range(len(knots) - 1):
            for b in range(len(cross) - 1):
                xs = np.linspace(cross[b], cross[b + 1], n)
                for x1 in xs:
                    for x2 in xs:
                        if x1 == x2:
                            continue
                        val = lambda f, x: float(np.asarray(f(np.array([x])))[0])
                        d = (val(funcs[a + 1], x1) - val(funcs[a], x1)
                             - val(funcs[a + 1], x2) + val(funcs[a], x2))
                        best = max(best, abs(d) / abs((x1 - x2) * (knots[a + 1] - knots[a])))
    return best


def test_estimate_bmsdd_examples():
    g = GridT.integer((0, 2), (0, 2))
    assert estimate_bmsdd(net_from_function(lambda s, t: s * t, g)) == pytest.approx(1.0)
    assert estimate_bmsdd(net_from_function(lambda s, t: s + t, g)) == pytest.approx(0, abs=1e-12)
    # on the unit cell the adjacent lines sit at 0 and 1, so |MSDD| = |t1 + t2| < 2
    unit = net_from_function(lambda s, t: s ** 2 * t ** 2, GridT.integer((0, 1), (0, 1)))
    est = estimate_bmsdd(unit, 32)
    assert 2 - 2 / 31 - 1e-12 <= est < 2
    with pytest.raises(ValueError):
        estimate_bmsdd(unit, 1)


def test_estimate_bmsdd_matches_loop_oracle(rng):
    g = GridT(np.cumsum(rng.uniform(0.3, 1, 4)), np.cumsum(rng.uniform(0.3, 1, 3)))
    net = net_from_function(lambda s, t: np.sin(2 * s * t) + s ** 2 * t, g)
    assert estimate_bmsdd(net, 6) == pytest.approx(naive_bmsdd(net, 6), rel=1e-12)


def test_bound_formulas():
    assert net_tail_bound(1.0, 1.0, 0.5, 0) == 0.75
    assert net_tail_bound(1.0, 1.0, 0.5, 1) == pytest.approx(0.5625)
    assert net_successive_bound(1.0, 0, 0.5, 0.5) == pytest.approx(3 / 16)
    with pytest.raises(NotCertified):
        net_tail_bound(1.0, 1.0, 0.6, 0)
    assert net_tail_bound(1.0, 1.0, 0.6, 0, force=True) == 0.75
    with pytest.raises(ValueError):
        net_tail_bound(-1.0, 1.0, 0.5, 0)


def test_run_nets_cauchy_and_bounds():
    net0 = net_from_function(SINCOS, GridT.integer((0, 4), (0, 4)))
    run = run_nets(net0, WeightSchedule.chaikin(), WeightSchedule.chaikin(), 3, bmsdd_L=1.0)
    assert run.K == 3 and run.H == 1.0 and run.bmsdd_exact
    d = [net_successive_distance(run, k, 33) for k in range(3)]
    assert d[0] > d[1] > d[2] > 0
    for k in range(3):
        assert d[k] <= run.successive_bound(k)
        assert d[k] <= run.tail_bounds[k]
    with pytest.raises(IndexError):
        net_successive_distance(run, 3)


def test_run_nets_uncertified():
    net0 = net_from_function(SINCOS, GridT.integer((0, 2), (0, 2)))
    wide = WeightSchedule.constant_pair(validate_weight_pair([0.1], [0.9]))
    with pytest.raises(NotCertified):
        run_nets(net0, wide, wide, 1)
    run = run_nets(net0, wide, wide, 1, force=True)
    assert run.forced and run.tail_bounds is None and not run.bmsdd_exact


def test_cell_patches_agree_on_shared_edges(rng):
    g = GridT(np.cumsum(rng.uniform(0.3, 1, 4)), np.cumsum(rng.uniform(0.3, 1, 4)))
    net = net_from_function(lambda s, t: np.exp(s * t) - s ** 2, g)
    surf = PiecewiseCoonsSurface(net)
    scale = max(1.0, float(np.abs(net.corners).max()))
    for i in range(len(g.s) - 2):
        for j in range(len(g.t) - 1):
            left, right = surf.cell_patch(i, j), surf.cell_patch(i + 1, j)
            v = np.linspace(0, g.t[j + 1] - g.t[j], 33)
            a = coons_eval(left, g.s[i + 1] - g.s[i], v)
            b = coons_eval(right, 0.0, v)
            assert np.abs(a - b).max() <= 1e-12 * scale
    for i in range(len(g.s) - 1):
        for j in range(len(g.t) - 2):
            low, high = surf.cell_patch(i, j), surf.cell_patch(i, j + 1)
            u = np.linspace(0, g.s[i + 1] - g.s[i], 33)
            a = coons_eval(low, u, g.t[j + 1] - g.t[j])
            b = coons_eval(high, u, 0.0)
            assert np.abs(a - b).max() <= 1e-12 * scale


def test_bmsdd_growth_random_polynomials(rng):
    for _ in range(5):
        c = np.zeros((4, 4))
        c[:, :] = rng.normal(size=(4, 4))
        fn = polynomial(c.tolist())
        g = GridT.integer((0, 3), (0, 3))
        L = fn.bmsdd((0, 3), (0, 3))
        run = run_nets(net_from_function(fn.F, g), WeightSchedule.chaikin(),
                       WeightSchedule.chaikin(), 2, bmsdd_L=L)
        assert estimate_bmsdd(run.nets[0], 16) <= L * (1 + 1e-6)
        for k in (1, 2):
            assert estimate_bmsdd(run.nets[k], 8) <= 3 ** k * L * (1 + 1e-6)
