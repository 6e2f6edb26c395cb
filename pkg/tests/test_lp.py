import numpy as np
import pytest
from scipy.optimize import linprog

from busemann_lab.lp import LinearProgram, Status, lp_solve, simplex_standard
from lp_cases import CASES


def _program(case):
    return LinearProgram(case["c"], case["A"], case["b"], case["lo"], case["hi"])


@pytest.mark.parametrize("case", CASES, ids=[c["name"] for c in CASES])
def test_hand_derived_programs(case):
    sol = lp_solve(_program(case))
    if isinstance(case["expected"], str):
        assert sol.status.value == case["expected"]
        return
    assert sol.status is Status.OPTIMAL
    assert sol.value == pytest.approx(case["expected"], abs=1e-8)
    assert sol.max_violation <= 1e-9
    if case["point"] is not None:
        np.testing.assert_allclose(sol.point, case["point"], atol=1e-8)


@pytest.mark.parametrize("case", [c for c in CASES if not isinstance(c["expected"], str)],
                         ids=lambda c: c["name"])
def test_duals_reproduce_objective(case):
    p = _program(case)
    sol = lp_solve(p)
    assert np.all(sol.duals >= -1e-12)
    np.testing.assert_allclose(p.A.T @ sol.duals + sol.box_duals, p.objective, atol=1e-9)
    # strong duality
    box = sol.box_duals
    bound = np.where(box > 0, p.upper, p.lower)
    dual_value = sol.duals @ p.b + sum(d * v for d, v in zip(box, bound) if d != 0)
    assert dual_value == pytest.approx(sol.value, abs=1e-8)


def test_repeated_runs_are_bytewise_identical():
    for case in CASES:
        a, b = lp_solve(_program(case)), lp_solve(_program(case))
        assert a.status is b.status
        if a.point is not None:
            assert a.point.tobytes() == b.point.tobytes()
            assert a.duals.tobytes() == b.duals.tobytes()


def test_agrees_with_highs_on_random_programs():
    rng = np.random.default_rng(7)
    for _ in range(60):
        n = int(rng.integers(2, 7))
        m = int(rng.integers(1, 40))
        A = rng.standard_normal((m, n))
        b = rng.uniform(0.1, 2.0, m)  # origin feasible
        c = rng.standard_normal(n)
        box = rng.uniform(1.0, 5.0, n)
        sol = lp_solve(LinearProgram(c, A, b, -box, box))
        ref = linprog(-c, A_ub=A, b_ub=b, bounds=list(zip(-box, box)), method="highs")
        assert sol.status is Status.OPTIMAL and ref.status == 0
        assert sol.value == pytest.approx(-ref.fun, abs=1e-8, rel=1e-9)


def test_many_rows_few_variables():
    # the shape the envelope code produces: thousands of cuts, six variables
    rng = np.random.default_rng(3)
    A = rng.standard_normal((3000, 6))
    b = np.abs(rng.standard_normal(3000)) + 0.1
    c = rng.standard_normal(6)
    sol = lp_solve(LinearProgram(c, A, b, -10.0, 10.0))
    ref = linprog(-c, A_ub=A, b_ub=b, bounds=[(-10, 10)] * 6, method="highs")
    assert sol.value == pytest.approx(-ref.fun, abs=1e-8)


def test_nan_data_is_rejected():
    with pytest.raises(FloatingPointError):
        LinearProgram([1.0, np.nan], [[1.0, 1.0]], [1.0], 0.0, 1.0)


def test_inverted_box_is_rejected():
    with pytest.raises(ValueError):
        LinearProgram([1.0], [[1.0]], [1.0], [2.0], [1.0])


def test_standard_form_phase_one_detects_infeasibility():
    status, x, _, _ = simplex_standard(np.array([[1.0, 1.0]]), np.array([-1.0]), np.zeros(2))
    assert status is Status.INFEASIBLE and x is None


def test_from_constraints_matches_matrix_form():
    p = LinearProgram.from_constraints([1.0, 1.0], [([1.0, 2.0], 4.0), ([3.0, 1.0], 6.0)], 0.0, np.inf)
    assert lp_solve(p).value == pytest.approx(2.8, abs=1e-12)
