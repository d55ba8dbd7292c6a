"""LP engine checks: hand cases, randomized comparison against scipy, cycling."""

import numpy as np
import pytest
from scipy.optimize import linprog

from titlmars.simplex import solve_lp


def test_trivial_bounds_only():
    res = solve_lp([1.0, -2.0], [], [], [], [0.0, 0.0], [4.0, 5.0])
    assert res.status == "optimal"
    assert res.obj == pytest.approx(-10.0)
    assert res.x == pytest.approx([0.0, 5.0])


def test_simple_le():
    # max x+y st x+y<=1 -> min -(x+y)
    res = solve_lp([-1.0, -1.0], [[1.0, 1.0]], ["<="], [1.0], [0.0, 0.0], [2.0, 2.0])
    assert res.status == "optimal"
    assert res.obj == pytest.approx(-1.0)


def test_equality_row():
    res = solve_lp(
        [1.0, 1.0], [[1.0, 2.0]], ["="], [4.0], [0.0, 0.0], [10.0, 10.0]
    )
    assert res.status == "optimal"
    assert res.obj == pytest.approx(2.0)  # x=0, y=2


def test_ge_row():
    res = solve_lp([2.0, 3.0], [[1.0, 1.0]], [">="], [5.0], [0.0, 0.0], [10.0, 10.0])
    assert res.status == "optimal"
    assert res.obj == pytest.approx(10.0)  # all weight on the cheaper variable


def test_infeasible():
    res = solve_lp([1.0], [[1.0], [1.0]], ["<=", ">="], [1.0, 3.0], [0.0], [10.0])
    assert res.status == "infeasible"


def test_infeasible_by_bounds():
    res = solve_lp([1.0], [[1.0]], ["<="], [5.0], [2.0], [1.0])
    assert res.status == "infeasible"


def test_fixed_variable():
    res = solve_lp(
        [1.0, 1.0], [[1.0, 1.0]], [">="], [3.0], [2.0, 0.0], [2.0, 9.0]
    )
    assert res.status == "optimal"
    assert res.x == pytest.approx([2.0, 1.0])


def test_beale_cycling_example():
    # classic degenerate instance; Bland fallback must terminate
    c = [-0.75, 150.0, -0.02, 6.0]
    A = [
        [0.25, -60.0, -1.0 / 25.0, 9.0],
        [0.5, -90.0, -1.0 / 50.0, 3.0],
        [0.0, 0.0, 1.0, 0.0],
    ]
    b = [0.0, 0.0, 1.0]
    res = solve_lp(c, A, ["<=", "<=", "<="], b, [0.0] * 4, [np.inf] * 4)
    assert res.status == "optimal"
    assert res.obj == pytest.approx(-0.05)


def test_negative_lower_bounds():
    res = solve_lp(
        [1.0, 1.0], [[1.0, -1.0]], ["<="], [0.5], [-3.0, -2.0], [3.0, 2.0]
    )
    assert res.status == "optimal"
    assert res.obj == pytest.approx(-5.0)


@pytest.mark.parametrize("seed", range(40))
def test_random_against_scipy(seed):
    rng = np.random.default_rng(1000 + seed)
    n = int(rng.integers(2, 9))
    m = int(rng.integers(1, 8))
    A = rng.normal(size=(m, n))
    senses = [str(rng.choice(["<=", ">=", "="])) for _ in range(m)]
    lo = rng.uniform(-3.0, 0.0, size=n)
    hi = lo + rng.uniform(0.5, 4.0, size=n)
    x_feas = rng.uniform(lo, hi)
    slackiness = rng.uniform(0.0, 1.0, size=m)
    b = A @ x_feas
    for i, s in enumerate(senses):
        if s == "<=":
            b[i] += slackiness[i]
        elif s == ">=":
            b[i] -= slackiness[i]
    c = rng.normal(size=n)

    res = solve_lp(c, A, senses, b, lo, hi)
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for i, s in enumerate(senses):
        if s == "<=":
            A_ub.append(A[i]); b_ub.append(b[i])
        elif s == ">=":
            A_ub.append(-A[i]); b_ub.append(-b[i])
        else:
            A_eq.append(A[i]); b_eq.append(b[i])
    ref = linprog(
        c,
        A_ub=np.array(A_ub) if A_ub else None,
        b_ub=np.array(b_ub) if b_ub else None,
        A_eq=np.array(A_eq) if A_eq else None,
        b_eq=np.array(b_eq) if b_eq else None,
        bounds=list(zip(lo, hi)),
        method="highs",
    )
    assert ref.status == 0, "construction guarantees feasibility"
    assert res.status == "optimal"
    assert res.obj == pytest.approx(ref.fun, rel=1e-7, abs=1e-7)
    # returned point must satisfy every row and its bounds
    assert (res.x >= lo - 1e-7).all() and (res.x <= hi + 1e-7).all()
    r = A @ res.x
    for i, s in enumerate(senses):
        if s == "<=":
            assert r[i] <= b[i] + 1e-6
        elif s == ">=":
            assert r[i] >= b[i] - 1e-6
        else:
            assert r[i] == pytest.approx(b[i], abs=1e-6)


@pytest.mark.parametrize("seed", range(15))
def test_random_infeasible_detected(seed):
    rng = np.random.default_rng(500 + seed)
    n = int(rng.integers(2, 6))
    lo = np.zeros(n)
    hi = np.ones(n)
    # sum(x) <= -1 is impossible for x >= 0
    A = [np.ones(n), rng.normal(size=n)]
    senses = ["<=", "<="]
    b = [-1.0, float(rng.normal())]
    res = solve_lp(rng.normal(size=n), A, senses, b, lo, hi)
    assert res.status == "infeasible"
