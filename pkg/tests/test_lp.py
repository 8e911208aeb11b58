import numpy as np
import pytest
from scipy.optimize import linprog

from conftest import random_instance
from tidetri.candidates import enumerate_candidates
from tidetri.cost import SQUARED, cost_table
from tidetri.ilp import LPRelaxation, build_model, solve_lp
from tidetri.ilp.lp import INFEASIBLE, OPTIMAL, UNBOUNDED, presolve


def reference(c, A, b, lo, hi):
    res = linprog(c, A_eq=A, b_eq=b, bounds=list(zip(lo, hi)), method="highs")
    return res


def random_lp(r, m, n):
    A = r.integers(-3, 4, (m, n)).astype(float)
    x0 = r.random(n) * 2
    b = A @ x0
    c = r.normal(size=n)
    return c, A, b, np.zeros(n), np.full(n, 2.0)


@pytest.mark.parametrize("seed", range(30))
def test_random_bounded_lps_match_reference(seed):
    r = np.random.default_rng(seed)
    c, A, b, lo, hi = random_lp(r, int(r.integers(1, 8)), int(r.integers(2, 15)))
    got = solve_lp(c, A, b, lo, hi)
    ref = reference(c, A, b, lo, hi)
    assert got.status == OPTIMAL and ref.status == 0
    assert got.objective == pytest.approx(ref.fun, rel=1e-7, abs=1e-7)
    assert np.allclose(A @ got.x, b, atol=1e-7)
    assert (got.x >= lo - 1e-9).all() and (got.x <= hi + 1e-9).all()


def test_infeasible_and_unbounded():
    A = np.array([[1.0, 1.0]])
    assert solve_lp([1, 1], A, [5.0], [0, 0], [1, 1]).status == INFEASIBLE
    assert solve_lp([1, 1], np.array([[1.0, 1.0], [1.0, 1.0]]), [1.0, 2.0],
                    [0, 0], [5, 5]).status == INFEASIBLE
    got = solve_lp([-1.0, 0.0], np.array([[1.0, -1.0]]), [0.0], [0, 0], [np.inf, np.inf])
    assert got.status == UNBOUNDED


def test_presolve_fixes_forced_variables():
    A = np.array([[1.0, 0.0, 0.0], [1.0, 1.0, 1.0]])
    b = np.array([1.0, 1.0])
    lo, hi, rows = presolve(A, b, np.zeros(3), np.ones(3))
    assert lo.tolist() == [1.0, 0.0, 0.0] and hi.tolist() == [1.0, 0.0, 0.0]
    assert presolve(np.array([[1.0, 1.0]]), np.array([3.0]), np.zeros(2), np.ones(2)) is None


def test_degenerate_assignment_lp():
    # assignment polytope: massively degenerate, all vertices integral
    r = np.random.default_rng(7)
    k = 8
    n = k * k
    A = np.zeros((2 * k, n))
    for i in range(k):
        A[i, i * k:(i + 1) * k] = 1
        A[k + i, i::k] = 1
    c = r.integers(0, 3, n).astype(float)
    got = solve_lp(c, A, np.ones(2 * k), np.zeros(n), np.ones(n))
    ref = reference(c, A, np.ones(2 * k), np.zeros(n), np.ones(n))
    assert got.objective == pytest.approx(ref.fun, abs=1e-9)


@pytest.mark.parametrize("seed", range(4))
def test_warm_resolve_matches_cold_reference(seed):
    inst = random_instance(np.random.default_rng(seed), 12)
    cands = enumerate_candidates(inst.points)
    table = cost_table(cands.triangles, inst.h, inst.grid, SQUARED, inst.assigner)
    model = build_model(cands, table, inst.points)
    A, b = model.matrix()
    c = model.costs
    n = model.n_vars
    relax = LPRelaxation(c, A, b, np.zeros(n), np.ones(n))
    ref = reference(c, A, b, np.zeros(n), np.ones(n))
    assert relax.root.objective == pytest.approx(ref.fun, rel=1e-9, abs=1e-9)
    state = relax.state()
    r = np.random.default_rng(seed)
    for _ in range(20):
        lo, hi = np.zeros(n), np.ones(n)
        for j in r.choice(n, size=3, replace=False):
            if r.random() < 0.5:
                lo[j] = 1.0
            else:
                hi[j] = 0.0
        got = relax.resolve(lo, hi, state)
        ref = reference(c, A, b, lo, hi)
        if ref.status == 2:
            assert got.status == INFEASIBLE
            continue
        assert got.status == OPTIMAL
        assert got.objective == pytest.approx(ref.fun, rel=1e-8, abs=1e-8)
        state = relax.state() if r.random() < 0.5 else state


@pytest.mark.parametrize("seed", range(10))
def test_infinite_upper_bounds(seed):
    r = np.random.default_rng(50 + seed)
    c, A, b, lo, _ = random_lp(r, 4, 9)
    c = np.abs(c)
    hi = np.full(9, np.inf)
    got = solve_lp(c, A, b, lo, hi)
    ref = reference(c, A, b, lo, hi)
    assert got.status == OPTIMAL
    assert got.objective == pytest.approx(ref.fun, rel=1e-7, abs=1e-7)
