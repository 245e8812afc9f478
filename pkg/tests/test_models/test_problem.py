import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from neuro_qp.exceptions import DimensionMismatchError
from neuro_qp.models.problem import (
    Box,
    QpProblem,
    Sense,
    Solution,
    evaluate_cost,
    evaluate_violation,
    project_box,
    validate,
)
from neuro_qp.models.sparse import SparseMatrix
from tests.conftest import dense_problem


def test_evaluate_cost():
    problem = dense_problem([[2, 0], [0, 2]], [-2, -4])
    assert evaluate_cost(problem, [1.0, 2.0]) == pytest.approx(-5.0)


def test_evaluate_cost_dimension_mismatch():
    problem = dense_problem([[2, 0], [0, 2]], [-2, -4])
    with pytest.raises(DimensionMismatchError):
        evaluate_cost(problem, [1.0, 2.0, 3.0])


def test_violation_feasible_point(two_var_problem):
    norm, residuals = evaluate_violation(two_var_problem, [0.5, 0.0])
    assert norm == 0.0
    assert np.array_equal(residuals, [0.0])


def test_violation_infeasible_point(two_var_problem):
    norm, residuals = evaluate_violation(two_var_problem, [3.0, 0.0])
    assert norm == pytest.approx(2.0)
    assert np.array_equal(residuals, [2.0])


def test_violation_equality_rows_are_two_sided(equality_problem):
    """Equality rows count overshoot in both directions."""
    below, _ = evaluate_violation(equality_problem, [0.0, 0.0])
    above, _ = evaluate_violation(equality_problem, [2.0, 2.0])
    assert below == pytest.approx(2.0)
    assert above == pytest.approx(2.0)


def test_violation_without_constraints():
    problem = dense_problem(np.eye(3), [0, 0, 0])
    norm, residuals = evaluate_violation(problem, [9.0, 9.0, 9.0])
    assert norm == 0.0
    assert residuals.size == 0


def test_senses_default_to_inequality(two_var_problem):
    assert two_var_problem.senses == (Sense.INEQ,)
    assert np.array_equal(two_var_problem.ineq_mask, [True])


def test_project_box():
    box = Box([0.0, 0.0], [1.0, 1.0])
    assert np.array_equal(project_box(np.array([-1.0, 2.0]), box), [0.0, 1.0])
    x = np.array([-1.0, 2.0])
    assert project_box(x, None) is x


def test_validate_accepts_valid_problem(two_var_problem):
    report = validate(two_var_problem)
    assert report.is_valid
    assert len(report) == 0


def test_validate_asymmetric_q():
    problem = dense_problem([[1, 2], [0, 1]], [0, 0])
    report = validate(problem)
    assert not report.is_valid
    assert "Q not symmetric" in report


def test_validate_non_psd_q():
    problem = dense_problem([[1, 0], [0, -1]], [0, 0])
    assert "Q not positive semidefinite" in validate(problem)


def test_validate_dimension_mismatch():
    problem = QpProblem(SparseMatrix.identity(2), np.zeros(3), SparseMatrix.zeros(0, 2), np.zeros(0))
    report = validate(problem)
    assert "dimension mismatch: p length is 3, expected 2" in report


def test_validate_non_finite_vector():
    problem = dense_problem(np.eye(2), [0.0, np.nan])
    assert "p has non-finite values" in validate(problem)


def test_validate_inverted_box():
    problem = dense_problem(np.eye(2), [0, 0], box=Box([0.0, 2.0], [1.0, 1.0]))
    report = validate(problem)
    assert "box lower bound exceeds upper bound" in report
    assert report.violations[0].indices == (1,)


def test_validate_duplicate_entries():
    Q = SparseMatrix(2, 2, [0, 0, 1], [0, 0, 1], [1.0, 1.0, 1.0])
    problem = QpProblem(Q, np.zeros(2), SparseMatrix.zeros(0, 2), np.zeros(0))
    assert "Q has duplicate (row, col) entries" in validate(problem)


def test_validate_collects_several_violations():
    """Validation reports every problem it finds, not just the first."""
    problem = QpProblem(SparseMatrix.from_dense([[1, 2], [0, 1]]), np.array([np.inf, 0.0]),
                        SparseMatrix.zeros(0, 2), np.zeros(0))
    report = validate(problem)
    assert len(report) == 2


def test_lp_is_valid():
    """A zero Q is allowed and marks the problem as an LP."""
    problem = dense_problem(np.zeros((2, 2)), [1, 1], [[-1, 0], [0, -1]], [0, 0])
    assert problem.is_lp
    assert validate(problem).is_valid


def test_problem_equality_sees_the_box(two_var_problem):
    """Problems differing only in their box compare unequal."""
    boxed = dataclasses.replace(two_var_problem, box=Box([0, 0], [1, 1]))
    assert boxed != two_var_problem
    assert boxed == dataclasses.replace(two_var_problem, box=Box([0, 0], [1, 1]))


def test_solution_from_x(two_var_problem):
    solution = Solution.from_x(two_var_problem, [2.0, 0.0], iterations=7, converged=False)
    assert solution.cost == pytest.approx(4.0)
    assert solution.violation == pytest.approx(1.0)
    assert solution.to_dict()['x'] == [2.0, 0.0]


small_floats = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (4, 4), elements=small_floats), arrays(np.float64, 4, elements=small_floats))
def test_cost_ignores_antisymmetric_part(Q, x):
    """Replacing Q by (Q + Q')/2 leaves the cost unchanged."""
    p = np.linspace(-1.0, 1.0, 4)
    raw = evaluate_cost(dense_problem(Q, p), x)
    symmetric = evaluate_cost(dense_problem(0.5 * (Q + Q.T), p), x)
    assert raw == pytest.approx(symmetric, rel=1e-12, abs=1e-9)


small_ints = st.integers(-3, 3)


@settings(max_examples=100, deadline=None)
@given(arrays(np.int64, (3, 4), elements=small_ints), arrays(np.int64, 4, elements=small_ints),
       arrays(np.int64, 3, elements=st.integers(-2, 2)), st.lists(st.booleans(), min_size=3, max_size=3))
def test_violation_is_zero_exactly_on_feasible_points(A, x, slack, eq_rows):
    """A zero violation norm coincides with every row passing a direct check."""
    k = A @ x + slack
    senses = ['eq' if eq else 'ineq' for eq in eq_rows]
    problem = dense_problem(np.eye(4), np.zeros(4), A, k, senses)
    residual = A @ x - k
    feasible = all(r == 0 if eq else r <= 0 for r, eq in zip(residual, eq_rows))
    norm, _ = evaluate_violation(problem, x.astype(np.float64))
    assert (norm == 0.0) == feasible
