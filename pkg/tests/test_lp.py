import math
import random

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from gridclear.lp import LinearProgram, LpBuilder, LpRow, solve

INF = math.inf


def build_random_lp(rng: random.Random, max_vars: int = 30):
    """Feasible bounded LP: constraints are anchored on a known interior point
    and every variable has a finite upper bound."""
    n = rng.randint(1, max_vars)
    m = rng.randint(1, max(2, n))
    b = LpBuilder()
    x0 = []
    for j in range(n):
        hi = rng.uniform(1.0, 25.0)
        b.var(f"x{j}", 0.0, hi, rng.uniform(0.0, 10.0))
        x0.append(rng.uniform(0.0, hi / 2))
    for k in range(m):
        support = rng.sample(range(n), rng.randint(1, n))
        coeffs = {j: rng.uniform(-4.0, 4.0) for j in support}
        lhs = sum(v * x0[j] for j, v in coeffs.items())
        rel = rng.choice(["<=", ">=", "="])
        margin = rng.uniform(0.0, 3.0)
        rhs = lhs + margin if rel == "<=" else lhs - margin if rel == ">=" else lhs
        b.row(coeffs, rel, rhs, f"r{k}")
    return b.build()


def dual_objective(lp: LinearProgram, sol) -> float:
    """Dual objective under the rhs-derivative convention, with variable bound
    multipliers recovered from the reduced costs."""
    val = sum(sol.duals[r.label] * r.rhs for r in lp.rows)
    for j, name in enumerate(lp.var_names):
        rc = sol.reduced_costs[name]
        if rc > 0 and lp.var_lower[j] > -INF:
            val += rc * lp.var_lower[j]
        elif rc < 0 and lp.var_upper[j] < INF:
            val += rc * lp.var_upper[j]
    return val


def check_kkt(lp: LinearProgram, sol, tol=1e-6):
    assert sol.status == "optimal"
    x = [sol.primal[n] for n in lp.var_names]
    for j in range(len(x)):
        assert lp.var_lower[j] - tol <= x[j] <= lp.var_upper[j] + tol
    for r in lp.rows:
        lhs = sum(v * x[j] for j, v in r.coeffs)
        slack = r.rhs - lhs
        y = sol.duals[r.label]
        if r.rel == "<=":
            assert slack >= -tol
            assert abs(y) * max(slack, 0.0) <= tol * (1 + abs(r.rhs))
            assert y <= tol  # relaxing a <= row cannot raise a minimum
        elif r.rel == ">=":
            assert slack <= tol
            assert abs(y) * max(-slack, 0.0) <= tol * (1 + abs(r.rhs))
            assert y >= -tol
        else:
            assert abs(slack) <= tol
    gap = abs(sol.objective_value - dual_objective(lp, sol))
    assert gap <= 1e-6 * (1.0 + abs(sol.objective_value))


def test_lower_bound_row_dual_is_one():
    b = LpBuilder()
    x = b.var("x", -INF, INF, 1.0)
    b.row({x: 1.0}, ">=", 3.0, "lb")
    sol = solve(b.build())
    assert sol.status == "optimal"
    assert sol.primal["x"] == pytest.approx(3.0)
    assert sol.duals["lb"] == pytest.approx(1.0)


def test_two_variable_balance_and_cap():
    # min 10a + 40b s.t. a + b = 100, a <= 60
    b = LpBuilder()
    a = b.var("a", 0.0, INF, 10.0)
    c = b.var("b", 0.0, INF, 40.0)
    b.row({a: 1.0, c: 1.0}, "=", 100.0, "balance")
    b.row({a: 1.0}, "<=", 60.0, "cap")
    sol = solve(b.build())
    assert sol.primal["a"] == pytest.approx(60.0)
    assert sol.primal["b"] == pytest.approx(40.0)
    assert sol.duals["balance"] == pytest.approx(40.0)
    assert sol.duals["cap"] == pytest.approx(-30.0)
    assert sol.objective_value == pytest.approx(2200.0)


def test_infeasible_is_reported_not_raised():
    b = LpBuilder()
    a = b.var("a", 0.0, 5.0, 1.0)
    b.row({a: 1.0}, ">=", 10.0, "r")
    assert solve(b.build()).status == "infeasible"


def test_unbounded_is_reported():
    b = LpBuilder()
    a = b.var("a", -INF, INF, -1.0)
    b.row({a: 1.0}, ">=", 0.0, "r")
    assert solve(b.build()).status == "unbounded"


def test_redundant_row_gets_zero_dual():
    b = LpBuilder()
    a = b.var("a", 0.0, 10.0, 2.0)
    b.row({a: 1.0}, "=", 4.0, "r1")
    b.row({a: 2.0}, "=", 8.0, "r2")
    sol = solve(b.build())
    assert sol.status == "optimal"
    assert sol.primal["a"] == pytest.approx(4.0)
    assert sol.duals["r1"] * 1 + sol.duals["r2"] * 2 == pytest.approx(2.0)


def test_duplicate_labels_rejected():
    with pytest.raises(ValueError, match="unique"):
        LinearProgram(
            (1.0,), (0.0,), (1.0,),
            (LpRow(((0, 1.0),), "<=", 1.0, "r"), LpRow(((0, 1.0),), "<=", 2.0, "r")),
            ("x",),
        )


def test_degenerate_cycling_guard():
    # Beale's classical cycling example; Bland's rule must terminate
    b = LpBuilder()
    x1 = b.var("x1", 0.0, INF, -0.75)
    x2 = b.var("x2", 0.0, INF, 150.0)
    x3 = b.var("x3", 0.0, INF, -0.02)
    x4 = b.var("x4", 0.0, INF, 6.0)
    b.row({x1: 0.25, x2: -60.0, x3: -0.04, x4: 9.0}, "<=", 0.0, "r1")
    b.row({x1: 0.5, x2: -90.0, x3: -0.02, x4: 3.0}, "<=", 0.0, "r2")
    b.row({x3: 1.0}, "<=", 1.0, "r3")
    sol = solve(b.build())
    assert sol.status == "optimal"
    assert sol.objective_value == pytest.approx(-0.05)


def test_fixed_variable_handled():
    b = LpBuilder()
    a = b.var("a", 5.0, 5.0, 3.0)
    c = b.var("c", 0.0, 10.0, 1.0)
    b.row({a: 1.0, c: 1.0}, ">=", 8.0, "need")
    sol = solve(b.build())
    assert sol.primal["a"] == 5.0
    assert sol.primal["c"] == pytest.approx(3.0)


def test_determinism_identical_runs():
    rng = random.Random(42)
    lp = build_random_lp(rng)
    a = solve(lp)
    b = solve(lp)
    assert repr(a) == repr(b)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_random_lp_kkt(seed):
    rng = random.Random(seed)
    lp = build_random_lp(rng, max_vars=12)
    sol = solve(lp)
    if sol.status == "optimal":
        check_kkt(lp, sol)
