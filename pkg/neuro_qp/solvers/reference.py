"""Full-precision reference dynamics: gradient descent, constraint-corrected
gradient descent and the primal-dual PIPG iteration.

The alpha/beta schedule mirrors the fixed-point network: alpha halves every
``alpha_decay_period`` iterations, beta doubles every ``beta_growth_period``
iterations up to ``beta_cap_factor * beta0``.
"""

import dataclasses
import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg

from neuro_qp.exceptions import DimensionMismatchError, DivergenceError
from neuro_qp.models.problem import (
    QpProblem,
    Sense,
    Solution,
    evaluate_cost,
    evaluate_violation,
    project_box,
)
from neuro_qp.models.sparse import spmv
from neuro_qp.models.trace import ConvergenceTrace, TraceRecord

logger = logging.getLogger(__name__)

NO_SCHEDULE = 1 << 62
POWER_ITERATIONS = 50


@dataclass(frozen=True)
class HyperParams:
    alpha0: float
    beta0: float = 1.0
    alpha_decay_period: int = 100
    beta_growth_period: int = 100
    max_iters: int = 1000
    conv_tol: float = 1e-6
    beta_cap_factor: float = 1024.0
    lambda_max: Optional[float] = None
    sigma_max: Optional[float] = None

    def __post_init__(self):
        if self.alpha0 <= 0 or self.beta0 <= 0:
            raise ValueError(f"alpha0 and beta0 must be positive, got {self.alpha0}, {self.beta0}")
        if self.alpha_decay_period < 1 or self.beta_growth_period < 1:
            raise ValueError("schedule periods must be >= 1")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")

    @classmethod
    def constant(cls, alpha0: float, beta0: float = 1.0, **kwargs: Any) -> 'HyperParams':
        """Schedule-free parameters (alpha and beta never shift)."""
        return cls(alpha0, beta0, alpha_decay_period=NO_SCHEDULE, beta_growth_period=NO_SCHEDULE, **kwargs)

    def alpha_at(self, t: int) -> float:
        return self.alpha0 * 2.0 ** -(t // self.alpha_decay_period)

    def beta_at(self, t: int) -> float:
        return min(self.beta0 * 2.0 ** min(t // self.beta_growth_period, 64), self.beta0 * self.beta_cap_factor)

    def is_stable(self) -> bool:
        """alpha0 * lambda_max < 2 (gradient-descent stability) when lambda_max is known."""
        return self.lambda_max is None or self.alpha0 * self.lambda_max < 2.0

    def replace(self, **changes: Any) -> 'HyperParams':
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)


@dataclass
class SolverState:
    x: np.ndarray
    v: np.ndarray
    w: np.ndarray
    alpha: float
    beta: float
    iter: int = 0

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.w)))


def _eq_mask(senses: Union[Sequence[Sense], np.ndarray], size: int) -> np.ndarray:
    if isinstance(senses, np.ndarray) and senses.dtype == bool:
        return senses
    mask = np.array([Sense(s) is Sense.EQ for s in senses], dtype=bool)
    if mask.size != size:
        raise DimensionMismatchError('senses', size, mask.size)
    return mask


def relu_gate(r: Any, senses: Union[Sequence[Sense], np.ndarray]) -> np.ndarray:
    """max(r, 0) on inequality rows; equality rows pass through unchanged."""
    r = np.asarray(r, dtype=np.float64)
    return np.where(_eq_mask(senses, r.size), r, np.maximum(r, 0.0))


def _initial(what: str, value: Optional[Any], size: int) -> np.ndarray:
    if value is None:
        return np.zeros(size)
    value = np.array(value, dtype=np.float64)
    if value.shape != (size,):
        raise DimensionMismatchError(what, size, value.size)
    return value


def _record(trace: ConvergenceTrace, problem: QpProblem, x: np.ndarray, t: int, snapshot_every: int) -> TraceRecord:
    norm, _ = evaluate_violation(problem, x)
    snapshot = x.copy() if snapshot_every and t % snapshot_every == 0 else None
    record = TraceRecord(iter=t, cost=evaluate_cost(problem, x), violation=norm, x=snapshot)
    trace.append(record)
    return record


def _run_primal(name: str, problem: QpProblem, hp: HyperParams, x0: Optional[Any], snapshot_every: int,
                correction: Callable[[np.ndarray, int], np.ndarray]) -> Tuple[Solution, ConvergenceTrace]:
    if not hp.is_stable():
        logger.warning("%s: alpha0=%.4g is not below 2/lambda_max=%.4g; iterates may oscillate or diverge",
                       name, hp.alpha0, 2.0 / hp.lambda_max)
    x = _initial('x0', x0, problem.n_vars)
    trace = ConvergenceTrace()
    _record(trace, problem, x, 0, snapshot_every)
    converged = False
    t = 0
    while t < hp.max_iters:
        alpha = hp.alpha_at(t)
        x_next = x - alpha * (spmv(problem.Q, x) + problem.p) - correction(x, t)
        t += 1
        if not np.all(np.isfinite(x_next)):
            raise DivergenceError(name, t)
        change = float(np.max(np.abs(x_next - x))) if x.size else 0.0
        x = x_next
        _record(trace, problem, x, t, snapshot_every)
        if change <= hp.conv_tol:
            converged = True
            break
    solution = Solution.from_x(problem, x, iterations=t, converged=converged)
    trace.solution = solution
    logger.info("%s finished: %d iterations, cost=%.6g, converged=%s", name, t, solution.cost, converged)
    return solution, trace


def solve_gd(problem: QpProblem, hp: HyperParams, x0: Optional[Any] = None, snapshot_every: int = 0,
             ignore_constraints: bool = False) -> Tuple[Solution, ConvergenceTrace]:
    """Unconstrained gradient descent x <- (I - alpha Q) x - alpha p."""
    if problem.n_cons and not ignore_constraints:
        raise ValueError("solve_gd handles unconstrained problems; pass ignore_constraints=True to drop A")
    zeros = np.zeros(problem.n_vars)
    return _run_primal('solve_gd', problem, hp, x0, snapshot_every, lambda x, t: zeros)


def solve_gdcc(problem: QpProblem, hp: HyperParams, x0: Optional[Any] = None,
               snapshot_every: int = 0) -> Tuple[Solution, ConvergenceTrace]:
    """Gradient descent with the relu-gated constraint correction -beta A' relu(Ax - k)."""
    eq_mask = problem.eq_mask
    zeros = np.zeros(problem.n_vars)

    def correction(x: np.ndarray, t: int) -> np.ndarray:
        if not problem.n_cons:
            return zeros
        gated = relu_gate(spmv(problem.A, x) - problem.k, eq_mask)
        return hp.beta_at(t) * spmv(problem.A.T, gated)

    return _run_primal('solve_gdcc', problem, hp, x0, snapshot_every, correction)


def solve_pipg(problem: QpProblem, hp: HyperParams, x0: Optional[Any] = None, v0: Optional[Any] = None,
               w0: Optional[Any] = None, snapshot_every: int = 0) -> Tuple[Solution, ConvergenceTrace]:
    """Primal-dual iteration with projection and an integrating dual accumulator.

    x <- proj(x - alpha (Qx + p + A'v)); w <- w + beta (Ax - k); v <- relu_gate(w).
    Stops when the relative cost change and the violation are <= conv_tol and
    the step moved neither x nor v by more than conv_tol (infinity norm); a
    primal fixed point alone is not enough while the dual is still integrating.
    """
    eq_mask = problem.eq_mask
    AT = problem.A.T
    x = _initial('x0', x0, problem.n_vars)
    w = _initial('w0', w0, problem.n_cons)
    v = relu_gate(w, eq_mask) if v0 is None else _initial('v0', v0, problem.n_cons)
    state = SolverState(x=x, v=v, w=w, alpha=hp.alpha0, beta=hp.beta0)

    trace = ConvergenceTrace()
    previous = _record(trace, problem, state.x, 0, snapshot_every)
    converged = False
    while state.iter < hp.max_iters:
        t = state.iter
        state.alpha, state.beta = hp.alpha_at(t), hp.beta_at(t)
        x_prev, v_prev = state.x, state.v
        grad = spmv(problem.Q, state.x) + problem.p
        if problem.n_cons:
            grad = grad + spmv(AT, state.v)
        state.x = project_box(state.x - state.alpha * grad, problem.box)
        if problem.n_cons:
            state.w = state.w + state.beta * (spmv(problem.A, state.x) - problem.k)
            state.v = relu_gate(state.w, eq_mask)
        state.iter += 1
        if not state.is_finite():
            raise DivergenceError('solve_pipg', state.iter)
        current = _record(trace, problem, state.x, state.iter, snapshot_every)
        primal_change = float(np.max(np.abs(state.x - x_prev))) if problem.n_vars else 0.0
        dual_change = float(np.max(np.abs(state.v - v_prev))) if problem.n_cons else 0.0
        cost_change = abs(current.cost - previous.cost) / max(1.0, abs(previous.cost))
        previous = current
        if (cost_change <= hp.conv_tol and current.violation <= hp.conv_tol
                and max(primal_change, dual_change) <= hp.conv_tol):
            converged = True
            break

    base = Solution.from_x(problem, state.x, iterations=state.iter, converged=converged)
    solution = dataclasses.replace(base, v=state.v.copy(), w=state.w.copy())
    trace.solution = solution
    logger.info("solve_pipg finished: %d iterations, cost=%.6g, violation=%.3g, converged=%s",
                state.iter, solution.cost, solution.violation, converged)
    return solution, trace


def solve_kkt(problem: QpProblem) -> Solution:
    """Exact optimum of an equality-constrained, unboxed QP via a sparse KKT solve."""
    if problem.box is not None or np.any(problem.ineq_mask):
        raise ValueError("solve_kkt requires equality-only constraints and no box")
    L, M = problem.n_vars, problem.n_cons
    Q = problem.Q.to_csr()
    if M:
        A = problem.A.to_csr()
        kkt = sparse.bmat([[Q, A.T], [A, None]], format='csc')
        rhs = np.concatenate([-problem.p, problem.k])
    else:
        kkt = sparse.csc_matrix(Q)
        rhs = -problem.p
    solution = np.atleast_1d(sparse_linalg.spsolve(kkt, rhs))
    if not np.all(np.isfinite(solution)):
        raise ValueError("KKT system is singular")
    x, v = solution[:L], solution[L:]
    base = Solution.from_x(problem, x, iterations=0, converged=True)
    return dataclasses.replace(base, v=v, w=v.copy())


def _power_iteration(apply: Callable[[np.ndarray], np.ndarray], size: int, rng: np.random.Generator,
                     steps: int) -> float:
    if size == 0:
        return 0.0
    vec = rng.standard_normal(size)
    vec /= np.linalg.norm(vec)
    estimate = 0.0
    for _ in range(steps):
        image = apply(vec)
        estimate = float(np.linalg.norm(image))
        if estimate == 0.0:
            return 0.0
        vec = image / estimate
    return estimate


def estimate_hyperparams(problem: QpProblem, seed: int = 0, alpha_period: int = 100, beta_period: int = 100,
                         max_iters: int = 1000, conv_tol: float = 1e-6) -> HyperParams:
    """Curvature-based step sizes from power-iteration estimates of lambda_max(Q) and sigma_max(A).

    beta0 = 1 / max(sigma_max, 1) and alpha0 = 1 / (lambda_max + sigma_max * beta0);
    both default to 1 when Q and A are zero.
    """
    rng = np.random.default_rng(seed)
    lambda_max = 0.0
    if not problem.is_lp:
        lambda_max = _power_iteration(lambda v: spmv(problem.Q, v), problem.n_vars, rng, POWER_ITERATIONS)
    sigma_sq = 0.0
    if problem.A.nnz:
        AT = problem.A.T
        sigma_sq = _power_iteration(lambda v: spmv(AT, spmv(problem.A, v)), problem.n_vars, rng, POWER_ITERATIONS)
    sigma_max = float(np.sqrt(sigma_sq))
    beta0 = 1.0 / max(sigma_max, 1.0)
    denominator = lambda_max + sigma_max * beta0
    alpha0 = 1.0 / denominator if denominator > 0 else 1.0
    return HyperParams(alpha0=alpha0, beta0=beta0, alpha_decay_period=alpha_period,
                       beta_growth_period=beta_period, max_iters=max_iters, conv_tol=conv_tol,
                       lambda_max=lambda_max, sigma_max=sigma_max)
