"""QP/LP problem model: minimize 1/2 x'Qx + p'x subject to Ax (<=|=) k, x in box."""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np

from neuro_qp.exceptions import DimensionMismatchError
from neuro_qp.models.sparse import SparseMatrix, spmv

logger = logging.getLogger(__name__)

SYMMETRY_RTOL = 1e-9
PSD_RTOL = 1e-7
PSD_DENSE_LIMIT = 512


class Sense(str, Enum):
    INEQ = 'ineq'
    EQ = 'eq'


@dataclass(frozen=True, eq=False)
class Box:
    """Per-variable bounds defining the simple feasible set."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'lower', np.asarray(self.lower, dtype=np.float64))
        object.__setattr__(self, 'upper', np.asarray(self.upper, dtype=np.float64))

    def to_dict(self) -> Dict[str, list]:
        return {'lower': self.lower.tolist(), 'upper': self.upper.tolist()}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Box):
            return NotImplemented
        return np.array_equal(self.lower, other.lower) and np.array_equal(self.upper, other.upper)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class QpProblem:
    Q: SparseMatrix
    p: np.ndarray
    A: SparseMatrix
    k: np.ndarray
    senses: Tuple[Sense, ...] = ()
    box: Optional[Box] = None

    def __post_init__(self):
        object.__setattr__(self, 'p', np.asarray(self.p, dtype=np.float64))
        object.__setattr__(self, 'k', np.asarray(self.k, dtype=np.float64))
        senses = self.senses
        if not senses and self.A.n_rows:
            senses = (Sense.INEQ,) * self.A.n_rows
        object.__setattr__(self, 'senses', tuple(Sense(s) for s in senses))

    @property
    def n_vars(self) -> int:
        return self.Q.n_cols

    @property
    def n_cons(self) -> int:
        return self.A.n_rows

    @property
    def eq_mask(self) -> np.ndarray:
        return np.array([s is Sense.EQ for s in self.senses], dtype=bool)

    @property
    def ineq_mask(self) -> np.ndarray:
        return ~self.eq_mask

    @property
    def is_lp(self) -> bool:
        return self.Q.nnz == 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'version': 1,
            'L': self.n_vars,
            'M': self.n_cons,
            'Q': self.Q.to_dict(),
            'p': self.p.tolist(),
            'A': self.A.to_dict(),
            'k': self.k.tolist(),
            'senses': [s.value for s in self.senses],
            'box': self.box.to_dict() if self.box is not None else None,
        }

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QpProblem):
            return NotImplemented
        return (self.Q == other.Q and self.A == other.A
                and np.array_equal(self.p, other.p) and np.array_equal(self.k, other.k)
                and self.senses == other.senses and self.box == other.box)

    __hash__ = None


@dataclass(frozen=True)
class Violation:
    invariant: str
    message: str
    indices: Tuple[int, ...] = ()


@dataclass
class ValidationReport:
    """Result of ``validate``: an empty report means the problem is well-formed."""

    violations: List[Violation] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        return not self.violations

    def messages(self) -> List[str]:
        return [v.message for v in self.violations]

    def __len__(self) -> int:
        return len(self.violations)

    def __iter__(self) -> Iterator[Violation]:
        return iter(self.violations)

    def __contains__(self, text: object) -> bool:
        return any(str(text) in v.message for v in self.violations)


@dataclass(frozen=True, eq=False)
class Solution:
    x: np.ndarray
    cost: float
    violation: float
    iterations: int
    converged: bool
    v: Optional[np.ndarray] = field(default=None, repr=False)
    w: Optional[np.ndarray] = field(default=None, repr=False)

    @classmethod
    def from_x(cls, problem: QpProblem, x: Any, iterations: int, converged: bool) -> 'Solution':
        x = np.asarray(x, dtype=np.float64)
        norm, _ = evaluate_violation(problem, x)
        return cls(x=x, cost=evaluate_cost(problem, x), violation=norm,
                   iterations=iterations, converged=converged)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'cost': self.cost,
            'violation': self.violation,
            'iterations': self.iterations,
            'converged': bool(self.converged),
            'x': self.x.tolist(),
        }


def _check_length(what: str, x: Any, expected: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != expected:
        raise DimensionMismatchError(what, expected, x.size)
    return x


def evaluate_cost(problem: QpProblem, x: Any) -> float:
    """Return 1/2 x'Qx + p'x."""
    x = _check_length('x', x, problem.n_vars)
    return float(0.5 * x @ spmv(problem.Q, x) + problem.p @ x)


def constraint_residuals(problem: QpProblem, r: np.ndarray) -> np.ndarray:
    """Map raw residuals Ax - k to violations (relu on inequality rows, abs on equality rows)."""
    return np.where(problem.eq_mask, np.abs(r), np.maximum(r, 0.0))


def evaluate_violation(problem: QpProblem, x: Any) -> Tuple[float, np.ndarray]:
    """Return the L2 violation norm and the per-row residuals at x."""
    x = _check_length('x', x, problem.n_vars)
    if problem.n_cons == 0:
        return 0.0, np.zeros(0)
    residuals = constraint_residuals(problem, spmv(problem.A, x) - problem.k)
    return float(np.linalg.norm(residuals)), residuals


def project_box(x: np.ndarray, box: Optional[Box]) -> np.ndarray:
    """Projection onto the box; identity when the problem has none."""
    if box is None:
        return x
    return np.clip(x, box.lower, box.upper)


def _check_matrix_indices(name: str, m: SparseMatrix, report: ValidationReport) -> bool:
    bad = np.flatnonzero((m.rows < 0) | (m.rows >= m.n_rows) | (m.cols < 0) | (m.cols >= m.n_cols))
    if bad.size:
        report.violations.append(Violation('index_range', f"{name} has out-of-range indices", tuple(bad.tolist())))
        return False
    pairs = m.rows * max(m.n_cols, 1) + m.cols
    if np.unique(pairs).size != pairs.size:
        report.violations.append(Violation('duplicates', f"{name} has duplicate (row, col) entries"))
        return False
    if not np.all(np.isfinite(m.vals)):
        report.violations.append(
            Violation('finite', f"{name} has non-finite values", tuple(np.flatnonzero(~np.isfinite(m.vals)).tolist()))
        )
        return False
    return True


def _check_dimensions(problem: QpProblem, report: ValidationReport) -> bool:
    L = problem.n_vars
    M = problem.n_cons
    checks = [
        ('Q rows', problem.Q.n_rows, L),
        ('A columns', problem.A.n_cols, L),
        ('p length', problem.p.size, L),
        ('k length', problem.k.size, M),
        ('senses length', len(problem.senses), M),
    ]
    if problem.box is not None:
        checks.append(('box lower length', problem.box.lower.size, L))
        checks.append(('box upper length', problem.box.upper.size, L))
    ok = True
    for what, got, expected in checks:
        if got != expected:
            report.violations.append(
                Violation('dimensions', f"dimension mismatch: {what} is {got}, expected {expected}")
            )
            ok = False
    return ok


def _check_symmetry(Q: SparseMatrix, report: ValidationReport) -> bool:
    csr = Q.to_csr()
    diff = (csr - csr.T).tocoo()
    if diff.nnz == 0:
        return True
    magnitude = np.maximum(np.abs(csr[diff.row, diff.col]).A1, np.abs(csr[diff.col, diff.row]).A1)
    bad = np.abs(diff.data) > SYMMETRY_RTOL * magnitude
    if np.any(bad):
        pairs = sorted({(int(min(i, j)), int(max(i, j))) for i, j in zip(diff.row[bad], diff.col[bad])})
        report.violations.append(
            Violation('symmetry', "Q not symmetric", tuple(i for pair in pairs[:10] for i in pair))
        )
        return False
    return True


def _check_psd(Q: SparseMatrix, report: ValidationReport) -> None:
    if Q.n_cols > PSD_DENSE_LIMIT:
        report.warnings.append(f"PSD check skipped for L={Q.n_cols} > {PSD_DENSE_LIMIT}")
        logger.warning("PSD check skipped for L=%d (dense eigensolve limit %d)", Q.n_cols, PSD_DENSE_LIMIT)
        return
    if Q.nnz == 0:
        return
    eig = np.linalg.eigvalsh(Q.to_dense())
    scale = max(abs(eig[0]), abs(eig[-1]))
    if eig[0] < -PSD_RTOL * scale:
        report.violations.append(
            Violation('psd', f"Q not positive semidefinite (smallest eigenvalue {eig[0]:.3e})")
        )


def validate(problem: QpProblem, check_psd: bool = True) -> ValidationReport:
    """Check every QpProblem invariant and report the ones that fail. Never raises."""
    report = ValidationReport()
    dims_ok = _check_dimensions(problem, report)
    q_ok = _check_matrix_indices('Q', problem.Q, report)
    a_ok = _check_matrix_indices('A', problem.A, report)
    for name, vec in (('p', problem.p), ('k', problem.k)):
        if not np.all(np.isfinite(vec)):
            report.violations.append(
                Violation('finite', f"{name} has non-finite values", tuple(np.flatnonzero(~np.isfinite(vec)).tolist()))
            )
    if problem.box is not None and dims_ok:
        inverted = np.flatnonzero(problem.box.lower > problem.box.upper)
        if inverted.size:
            report.violations.append(
                Violation('box', "box lower bound exceeds upper bound", tuple(inverted.tolist()))
            )
    if dims_ok and q_ok and a_ok and problem.Q.n_rows == problem.Q.n_cols:
        if _check_symmetry(problem.Q, report) and check_psd:
            _check_psd(problem.Q, report)
    return report
