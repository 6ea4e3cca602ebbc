import math

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

from bayesel.elcore import (SolverOptions, check_feasibility, solve_el, solve_el_grouped,
                            solve_el_reference, solve_el_separate)
from bayesel.errors import DimensionError, NonFiniteError

from .oracles import bisection_el

SETTINGS = settings(max_examples=60, deadline=None,
                    suppress_health_check=[HealthCheck.too_slow])


def _instance(seed, n, m, spread=1.0):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal((n, m))
    # pull the cloud part-way towards the origin so most instances are feasible
    return c - spread * c.mean(axis=0)


# -- examples -----------------------------------------------------------------


def test_no_constraints_gives_uniform():
    sol = solve_el(np.zeros((4, 0)))
    assert sol.feasible
    np.testing.assert_allclose(sol.weights, 0.25)
    assert sol.log_el == pytest.approx(-4 * math.log(4), abs=1e-12)


def test_constraint_holding_at_uniform():
    x = np.array([1.0, 2.0, 3.0])
    sol = solve_el(x - 2.0)
    np.testing.assert_allclose(sol.weights, 1 / 3, atol=1e-12)
    np.testing.assert_allclose(sol.multipliers, 0.0, atol=1e-12)
    assert sol.log_el == pytest.approx(-3 * math.log(3), abs=1e-12)


def test_shifted_mean_matches_bisection():
    c = np.array([1.0, 2.0, 3.0]) - 2.5
    sol = solve_el(c)
    w, log_el = bisection_el(c)
    np.testing.assert_allclose(sol.weights, w, atol=1e-8)
    assert sol.log_el == pytest.approx(log_el, abs=1e-8)


def test_mean_outside_hull_is_infeasible():
    sol = solve_el(np.array([1.0, 2.0, 3.0]) - 5.0)
    assert not sol.feasible
    assert sol.log_el == -np.inf
    assert sol.weights is None


def test_feasibility_one_column():
    assert check_feasibility(np.array([-1.0, 0.5, 2.0]))
    assert not check_feasibility(np.array([0.1, 0.5, 2.0]))


def test_feasibility_triangle():
    tri = np.array([[-1.0, -1.0], [2.0, -0.5], [-0.5, 2.0], [0.3, 0.2]])
    assert check_feasibility(tri)
    assert not check_feasibility(tri + 3.0)


# -- errors -------------------------------------------------------------------


def test_too_many_constraints():
    with pytest.raises(DimensionError):
        solve_el(np.ones((3, 3)))


def test_empty_data():
    with pytest.raises(DimensionError):
        solve_el(np.zeros((0, 1)))


@pytest.mark.parametrize("bad", [np.nan, np.inf])
def test_non_finite(bad):
    c = np.array([[1.0], [-1.0], [bad]])
    with pytest.raises(NonFiniteError):
        solve_el(c)


# -- oracles ------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(40))
def test_bisection_oracle_small(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    c = rng.standard_normal(n) + rng.uniform(-1, 1)
    sol = solve_el(c)
    if not (c.min() < 0 < c.max()):
        assert not sol.feasible
        return
    w, log_el = bisection_el(c)
    assert sol.feasible
    assert sol.log_el == pytest.approx(log_el, abs=1e-8)
    np.testing.assert_allclose(sol.weights, w, atol=1e-8)


def test_hull_oracle_2d():
    checked = 0
    for seed in range(60):
        rng = np.random.default_rng(seed)
        pts = rng.standard_normal((12, 2)) + rng.uniform(-2.5, 2.5, size=2)
        # facet equations a.x + b <= 0 inside, so b is the origin's value
        offsets = ConvexHull(pts).equations[:, -1]
        if np.min(np.abs(offsets)) < 1e-3:
            continue
        assert check_feasibility(pts) == bool(np.all(offsets < 0)), seed
        checked += 1
    assert checked >= 50


def test_compiled_matches_reference():
    for seed in range(50):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(5, 40))
        m = int(rng.integers(1, min(n - 1, 6) + 1))
        c = _instance(seed, n, m, rng.uniform(0.2, 1.0))
        a, b = solve_el(c), solve_el_reference(c)
        assert a.feasible == b.feasible
        if a.feasible:
            assert a.log_el == pytest.approx(b.log_el, abs=1e-8)
            np.testing.assert_allclose(a.weights, b.weights, atol=1e-9)


def test_grouped_matches_dense():
    rng = np.random.default_rng(5)
    G, r, b, s = 4, 6, 2, 1
    local = rng.standard_normal((G, r, b))
    local -= 0.8 * local.mean(axis=1, keepdims=True)
    shared = rng.standard_normal((G, r, s))
    shared -= 0.8 * shared.mean(axis=(0, 1))
    dense = np.zeros((G * r, G * b + s))
    for g in range(G):
        dense[g * r:(g + 1) * r, g * b:(g + 1) * b] = local[g]
    dense[:, G * b:] = shared.reshape(G * r, s)
    a, d = solve_el_grouped(local, shared), solve_el(dense)
    assert a.feasible and d.feasible
    assert a.log_el == pytest.approx(d.log_el, abs=1e-8)
    np.testing.assert_allclose(a.weights, d.weights, atol=1e-9)


def test_separate_blocks_factorise():
    rng = np.random.default_rng(9)
    G, r = 5, 5
    local = rng.standard_normal((G, r, 2))
    local -= 0.7 * local.mean(axis=1, keepdims=True)
    feas, u, log_el, _ = solve_el_separate(local)
    for g in range(G):
        sol = solve_el(local[g])
        assert feas[g] == sol.feasible
        if sol.feasible:
            np.testing.assert_allclose(u[g], sol.weights, atol=1e-9)
            assert log_el[g] == pytest.approx(sol.log_el, abs=1e-8)


# -- properties ---------------------------------------------------------------


sizes = st.tuples(st.integers(0, 2**32 - 1), st.integers(4, 25), st.integers(1, 3),
                  st.floats(0.3, 1.0))


@SETTINGS
@given(sizes)
def test_dual_primal_consistency(params):
    seed, n, m, spread = params
    c = _instance(seed, n, m, spread)
    sol = solve_el(c)
    assume(sol.feasible)
    resid = sol.weights * n * (1 + c @ sol.multipliers) - 1
    assert np.abs(resid).max() <= 1e-8
    assert sol.log_el <= -n * math.log(n) + 1e-12
    np.testing.assert_allclose(sol.weights @ c, 0.0, atol=1e-8)


@SETTINGS
@given(sizes, st.floats(-50.0, 50.0).filter(lambda v: abs(v) > 1e-2))
def test_scale_invariance(params, factor):
    seed, n, m, spread = params
    c = _instance(seed, n, m, spread)
    sol = solve_el(c)
    assume(sol.feasible)
    c2 = c.copy()
    c2[:, 0] *= factor
    sol2 = solve_el(c2)
    assert sol2.feasible
    assert sol2.log_el == pytest.approx(sol.log_el, abs=1e-8)
    np.testing.assert_allclose(sol2.weights, sol.weights, atol=1e-8)


@SETTINGS
@given(sizes)
def test_adding_a_column_never_helps(params):
    seed, n, m, spread = params
    assume(m + 1 < n)
    c = _instance(seed, n, m + 1, spread)
    small, big = solve_el(c[:, :m]), solve_el(c)
    assume(small.feasible)
    assert big.log_el <= small.log_el + 1e-10


@SETTINGS
@given(sizes)
def test_deterministic(params):
    c = _instance(*params[:3], params[3])
    a, b = solve_el(c), solve_el(c)
    assert a.feasible == b.feasible
    assert a.log_el == b.log_el or (math.isinf(a.log_el) and math.isinf(b.log_el))
    if a.feasible:
        assert np.array_equal(a.weights, b.weights)


def test_options_are_respected():
    c = _instance(1, 30, 3, 0.9)
    loose = solve_el(c, SolverOptions(tol=1e-3))
    tight = solve_el(c)
    assert loose.grad_norm <= 1e-3
    assert tight.grad_norm <= 1e-8
