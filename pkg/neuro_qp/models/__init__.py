"""Data models for neuro_qp."""

from neuro_qp.models.problem import (
    Box,
    QpProblem,
    Sense,
    Solution,
    ValidationReport,
    Violation,
    evaluate_cost,
    evaluate_violation,
    project_box,
    validate,
)
from neuro_qp.models.sparse import SparseMatrix, spmv
from neuro_qp.models.stage import StageModel
from neuro_qp.models.trace import ConvergenceTrace, TraceRecord

__all__ = [
    'Box', 'QpProblem', 'Sense', 'Solution', 'ValidationReport', 'Violation',
    'evaluate_cost', 'evaluate_violation', 'project_box', 'validate',
    'SparseMatrix', 'spmv', 'StageModel', 'ConvergenceTrace', 'TraceRecord',
]
