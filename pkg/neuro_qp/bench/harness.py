"""Benchmark harness: gap, scaling and warm-start studies over (problem, solver) cells.

Every cell solves the preconditioned problem, maps each iterate back to the
original variables and measures it against a high-accuracy float optimum.
"""

import dataclasses
import logging
import math
import os
import time
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd

from neuro_qp.bench.spec import BenchSpec, ProblemSource, SolverSpec
from neuro_qp.exceptions import BenchSpecError, DivergenceError
from neuro_qp.models.problem import QpProblem, Solution, evaluate_cost, evaluate_violation, validate
from neuro_qp.models.stage import StageModel
from neuro_qp.models.trace import ConvergenceTrace
from neuro_qp.mpc.generator import GeneratorSpec, generate_random, perturb, perturbation_chain, tile
from neuro_qp.solvers.network import EventStats, Network, NetworkConfig, build_network
from neuro_qp.solvers.partition import partition
from neuro_qp.solvers.precond import (
    Scaling,
    apply_scaling,
    ruiz_equilibrate,
    scale_dual,
    scale_primal,
    stacked_norms,
    unscale_dual,
    unscale_solution,
)
from neuro_qp.solvers.reference import (
    HyperParams,
    estimate_hyperparams,
    solve_gd,
    solve_gdcc,
    solve_kkt,
    solve_pipg,
)
from neuro_qp.utils.files import SCHEMA_VERSION, load_problem, read_json, write_json

logger = logging.getLogger(__name__)

CSV_COLUMNS = ['iter', 'cost', 'gap', 'violation', 'messages', 'mac_ops', 'saturations']
CSV_FILE_COLUMNS = ['version'] + CSV_COLUMNS
SUMMARY_FILE = 'summary.json'
REFERENCE_TOL = 1e-9
ZERO_OPTIMUM = 1e-12
ZERO_DIFFERENCE = 1e-9


@dataclass(frozen=True)
class PreparedProblem:
    label: str
    source: Dict[str, Any]
    original: QpProblem
    scaled: QpProblem
    scaling: Scaling
    condition_estimate: Optional[float] = None
    equilibrated_norms: Optional[Tuple[float, float]] = None


@dataclass(frozen=True)
class ReferenceResult:
    f_star: float
    method: str
    converged: bool
    iterations: int = 0


@dataclass(frozen=True)
class CellSettings:
    budget: int
    gap_target: float
    precondition: bool = True
    neurons_per_core: int = 256
    sync_cost: int = 64

    @classmethod
    def from_spec(cls, spec: BenchSpec) -> 'CellSettings':
        return cls(spec.budget, spec.gap_target, spec.precondition, spec.neurons_per_core, spec.sync_cost)


@dataclass(frozen=True)
class CellMetrics:
    iterations_to_gap: Optional[int]
    best_gap: float
    terminal_violation: float
    mac_ops_to_gap: int
    messages_to_gap: int


@dataclass
class SolverRun:
    solution: Solution
    trace: ConvergenceTrace
    stats: Optional[EventStats] = None
    network: Optional[Network] = None


@dataclass
class CellResult:
    """One (problem, solver) measurement; ``metadata`` is enough to re-run it."""

    problem: str
    solver: str
    status: str
    budget: int
    gap_target: float
    n_vars: int
    iterations: int = 0
    iterations_to_gap: Optional[int] = None
    terminal_gap: float = math.inf
    terminal_violation: float = math.inf
    mac_ops_to_gap: int = 0
    messages_to_gap: int = 0
    model_cost_to_gap: Optional[float] = None
    event_stats: Optional[Dict[str, Any]] = None
    partition: Optional[Dict[str, Any]] = None
    wall_time: float = 0.0
    metadata: Dict[str, Any] = field(default_factory=dict)
    frame: Optional[pd.DataFrame] = field(default=None, repr=False)
    final_state: Optional[Dict[str, Optional[np.ndarray]]] = field(default=None, repr=False)

    @property
    def reached(self) -> bool:
        return self.iterations_to_gap is not None

    @property
    def arm(self) -> Optional[str]:
        return self.metadata.get('arm')

    @property
    def cell_id(self) -> str:
        parts = [self.problem, self.solver]
        if self.arm is not None:
            parts.append(self.arm)
        return '__'.join(parts)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'problem': self.problem,
            'solver': self.solver,
            'status': self.status,
            'budget': self.budget,
            'gap_target': self.gap_target,
            'n_vars': self.n_vars,
            'iterations': self.iterations,
            'iterations_to_gap': self.iterations_to_gap,
            'terminal_gap': _finite_or_none(self.terminal_gap),
            'terminal_violation': _finite_or_none(self.terminal_violation),
            'mac_ops_to_gap': self.mac_ops_to_gap,
            'messages_to_gap': self.messages_to_gap,
            'model_cost_to_gap': self.model_cost_to_gap,
            'event_stats': self.event_stats,
            'partition': self.partition,
            'wall_time': self.wall_time,
            'metadata': self.metadata,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'CellResult':
        values = {key: data[key] for key in data if key in cls.__dataclass_fields__}
        for key in ('terminal_gap', 'terminal_violation'):
            if values.get(key) is None:
                values[key] = math.inf
        return cls(**values)


def _finite_or_none(value: float) -> Optional[float]:
    return float(value) if math.isfinite(value) else None


def materialize(source: Dict[str, Any]) -> Tuple[QpProblem, Optional[StageModel]]:
    """Load or regenerate a problem (replaying recorded perturbations)."""
    if 'path' in source:
        return load_problem(source['path']), None
    model = generate_random(GeneratorSpec.from_dict(source['generate']))
    for step in source.get('perturbations', []):
        model = perturb(model, step['magnitude'], step['seed'])
    return tile(model), model


def prepare(source: Dict[str, Any], label: str, precondition: bool) -> PreparedProblem:
    problem, model = materialize(source)
    report = validate(problem, check_psd=model is None)
    if not report.is_valid:
        raise BenchSpecError(f"{label}: invalid problem: {'; '.join(report.messages())}")
    norms = None
    if precondition:
        scaled, scaling = ruiz_equilibrate(problem)
        norms = equilibrated_norm_range(problem, scaling)
    else:
        scaled, scaling = problem, Scaling.identity(problem.n_vars, problem.n_cons)
    condition = model.condition_estimate() if model is not None else None
    return PreparedProblem(label, source, problem, scaled, scaling, condition, norms)


def equilibrated_norm_range(problem: QpProblem, scaling: Scaling) -> Optional[Tuple[float, float]]:
    """Smallest and largest nonzero column norm of the D/E-scaled KKT pattern (cost scalar left out)."""
    norms = stacked_norms(apply_scaling(problem, dataclasses.replace(scaling, c=1.0)))
    nonzero = norms[norms > 0]
    if not nonzero.size:
        return None
    return float(nonzero.min()), float(nonzero.max())


def reference_optimum(prepared: PreparedProblem, method: str = 'auto',
                      max_iters: int = 20000) -> ReferenceResult:
    """Gap denominator: a direct KKT solve for equality-only problems, else PIPG run to 1e-9."""
    problem = prepared.original
    direct = problem.box is None and not np.any(problem.ineq_mask)
    if method == 'kkt' and not direct:
        raise BenchSpecError(f"{prepared.label}: kkt reference needs equality-only problems without a box")
    if method in ('auto', 'kkt') and direct:
        try:
            return ReferenceResult(solve_kkt(problem).cost, 'kkt', True)
        except ValueError as e:
            if method == 'kkt':
                raise
            logger.debug("%s: KKT reference failed (%s); falling back to PIPG", prepared.label, e)
    estimate = estimate_hyperparams(prepared.scaled)
    hp = HyperParams.constant(estimate.alpha0, estimate.beta0, max_iters=max_iters, conv_tol=REFERENCE_TOL)
    try:
        solution, _ = solve_pipg(prepared.scaled, hp)
    except DivergenceError as e:
        logger.warning("%s: reference diverged (%s); problem unusable", prepared.label, e)
        return ReferenceResult(math.nan, 'pipg', False, e.iteration)
    x = unscale_solution(solution.x, prepared.scaling)
    if not solution.converged:
        logger.warning("%s: reference did not converge in %d iterations; problem unusable",
                       prepared.label, max_iters)
    return ReferenceResult(evaluate_cost(problem, x), 'pipg', solution.converged, solution.iterations)


def optimality_gap(cost: Any, f_star: float) -> np.ndarray:
    """|f - f*| / |f*|; absolute difference when f* is (numerically) zero."""
    cost = np.asarray(cost, dtype=np.float64)
    diff = np.abs(cost - f_star)
    if abs(f_star) < ZERO_OPTIMUM:
        return np.where(diff < ZERO_DIFFERENCE, 0.0, diff)
    return diff / abs(f_star)


def run_solver(problem: QpProblem, mode: str, hp: HyperParams, cfg: Optional[NetworkConfig] = None,
               budget: Optional[int] = None, x0: Optional[Any] = None, v0: Optional[Any] = None,
               w0: Optional[Any] = None, snapshot_every: int = 0) -> SolverRun:
    """Dispatch one solve by mode name (float-gd, float-gdcc, float-pipg or fxp)."""
    if mode == 'fxp':
        network = build_network(problem, hp, cfg)
        if x0 is not None or v0 is not None or w0 is not None:
            network.warm_start(x0, v0, w0)
        solution, trace, stats = network.solve(budget, snapshot_every)
        return SolverRun(solution, trace, stats, network)
    if budget is not None:
        hp = hp.replace(max_iters=budget)
    if mode == 'float-pipg':
        solution, trace = solve_pipg(problem, hp, x0, v0, w0, snapshot_every)
    elif mode == 'float-gdcc':
        solution, trace = solve_gdcc(problem, hp, x0, snapshot_every)
    elif mode == 'float-gd':
        solution, trace = solve_gd(problem, hp, x0, snapshot_every, ignore_constraints=True)
    else:
        raise ValueError(f"Unknown solver mode '{mode}'")
    return SolverRun(solution, trace)


def metrics_from_frame(frame: pd.DataFrame, gap_target: float) -> CellMetrics:
    gaps = frame['gap'].to_numpy(dtype=np.float64)
    violations = frame['violation'].to_numpy(dtype=np.float64)
    hit = np.flatnonzero((gaps <= gap_target) & (violations <= gap_target))
    stop = int(hit[0]) + 1 if hit.size else len(frame)
    return CellMetrics(
        iterations_to_gap=int(frame['iter'].iloc[hit[0]]) if hit.size else None,
        best_gap=float(gaps.min()) if gaps.size else math.inf,
        terminal_violation=float(violations[-1]) if violations.size else math.inf,
        mac_ops_to_gap=int(frame['mac_ops'].iloc[:stop].sum()),
        messages_to_gap=int(frame['messages'].iloc[:stop].sum()),
    )


def _trace_frame(prepared: PreparedProblem, run: SolverRun, f_star: float) -> pd.DataFrame:
    original, scaling = prepared.original, prepared.scaling
    x_final = unscale_solution(run.solution.x, scaling)
    norm = float(np.linalg.norm(x_final))
    denominator = norm if norm > ZERO_OPTIMUM else 1.0
    snapshots = run.trace.snapshots()
    rows = []
    for record in run.trace.records:
        x = unscale_solution(snapshots[record.iter], scaling)
        violation, _ = evaluate_violation(original, x)
        rows.append((record.iter, evaluate_cost(original, x), violation / denominator,
                     record.messages, record.mac_ops, record.saturations))
    frame = pd.DataFrame(rows, columns=['iter', 'cost', 'violation', 'messages', 'mac_ops', 'saturations'])
    frame.insert(2, 'gap', optimality_gap(frame['cost'].to_numpy(), f_star))
    return frame[CSV_COLUMNS]


def _scaled_warm_state(warm: Optional[Dict[str, Any]], scaling: Scaling) -> Dict[str, Optional[np.ndarray]]:
    if warm is None:
        return {}
    state: Dict[str, Optional[np.ndarray]] = {'x0': scale_primal(warm['x'], scaling)}
    for key, target in (('v', 'v0'), ('w', 'w0')):
        if warm.get(key) is not None:
            state[target] = scale_dual(warm[key], scaling)
    return state


def _final_state(solution: Solution, scaling: Scaling) -> Dict[str, Optional[np.ndarray]]:
    return {
        'x': unscale_solution(solution.x, scaling),
        'v': unscale_dual(solution.v, scaling) if solution.v is not None else None,
        'w': unscale_dual(solution.w, scaling) if solution.w is not None else None,
    }


def run_cell(prepared: PreparedProblem, solver: SolverSpec, settings: CellSettings, reference: ReferenceResult,
             warm: Optional[Dict[str, Any]] = None, extra: Optional[Dict[str, Any]] = None) -> CellResult:
    """Solve one (problem, solver) cell and measure every iterate against ``reference``."""
    scaled = prepared.scaled
    hp = estimate_hyperparams(scaled, alpha_period=solver.alpha_period, beta_period=solver.beta_period,
                              max_iters=settings.budget)
    cfg = None
    if solver.is_fxp:
        cfg = solver.network_config(settings.budget, settings.neurons_per_core, settings.sync_cost)
    start = time.perf_counter()
    run = run_solver(scaled, solver.mode, hp, cfg, settings.budget, snapshot_every=1,
                     **_scaled_warm_state(warm, prepared.scaling))
    wall_time = time.perf_counter() - start

    frame = _trace_frame(prepared, run, reference.f_star)
    metrics = metrics_from_frame(frame, settings.gap_target)
    report = partition(run.network, settings.neurons_per_core, settings.sync_cost) if run.network else None
    model_cost = None
    if report is not None:
        spent = metrics.iterations_to_gap if metrics.iterations_to_gap is not None else run.solution.iterations
        model_cost = report.per_iteration_cost * max(spent, 1)

    metadata: Dict[str, Any] = {
        'source': prepared.source,
        'solver': solver.to_dict(),
        'budget': settings.budget,
        'gap_target': settings.gap_target,
        'precondition': settings.precondition,
        'neurons_per_core': settings.neurons_per_core,
        'sync_cost': settings.sync_cost,
        'scaling': {k: v for k, v in prepared.scaling.to_dict().items() if k not in ('d', 'e')},
        'hyperparams': hp.to_dict(),
        'network': cfg.to_dict() if cfg is not None else None,
        'reference_method': reference.method,
        'reference_converged': reference.converged,
        'f_star': reference.f_star,
        'L': prepared.original.n_vars,
        'M': prepared.original.n_cons,
        'condition_estimate': prepared.condition_estimate,
        'equilibrated_norms': None if prepared.equilibrated_norms is None else list(prepared.equilibrated_norms),
        'effective_hyperparams': run.network.effective_hyperparams().to_dict() if run.network else None,
        'warm_start': None if warm is None else {
            key: (np.asarray(value).tolist() if value is not None else None) for key, value in warm.items()
        },
    }
    metadata.update(extra or {})
    status = 'ok' if reference.converged else 'unusable'
    result = CellResult(
        problem=prepared.label,
        solver=solver.name,
        status=status,
        budget=settings.budget,
        gap_target=settings.gap_target,
        n_vars=prepared.original.n_vars,
        iterations=run.solution.iterations,
        iterations_to_gap=metrics.iterations_to_gap,
        terminal_gap=metrics.best_gap,
        terminal_violation=metrics.terminal_violation,
        mac_ops_to_gap=metrics.mac_ops_to_gap,
        messages_to_gap=metrics.messages_to_gap,
        model_cost_to_gap=model_cost,
        event_stats=run.stats.to_dict() if run.stats is not None else None,
        partition=report.to_dict() if report is not None else None,
        wall_time=wall_time,
        metadata=metadata,
        frame=frame,
        final_state=_final_state(run.solution, prepared.scaling),
    )
    logger.info("%s: iterations_to_gap=%s best gap=%.4g (%s)", result.cell_id, result.iterations_to_gap,
                result.terminal_gap, status)
    return result


def replay(record: CellResult) -> CellResult:
    """Re-run a cell from its recorded metadata; the trace must come out bit-identical."""
    meta = record.metadata
    prepared = prepare(meta['source'], record.problem, meta['precondition'])
    settings = CellSettings(meta['budget'], meta['gap_target'], meta['precondition'],
                            meta['neurons_per_core'], meta['sync_cost'])
    reference = ReferenceResult(meta['f_star'], meta['reference_method'], meta['reference_converged'])
    warm = meta.get('warm_start')
    if warm is not None:
        warm = {key: (np.asarray(value, dtype=np.float64) if value is not None else None)
                for key, value in warm.items()}
    extra = {key: meta[key] for key in ('study', 'chain', 'link', 'arm') if key in meta}
    return run_cell(prepared, SolverSpec.from_dict(meta['solver']), settings, reference, warm, extra)


def _reference(prepared: PreparedProblem, spec: BenchSpec) -> ReferenceResult:
    return reference_optimum(prepared, spec.reference, spec.reference_iters)


def _sources(spec: BenchSpec) -> Iterable[ProblemSource]:
    for source in spec.problems:
        repetitions = spec.repetitions if source.generate is not None else 1
        for rep in range(repetitions):
            yield source.with_seed_offset(rep)


def _run_cells(spec: BenchSpec) -> List[CellResult]:
    settings = CellSettings.from_spec(spec)
    results = []
    for source in _sources(spec):
        prepared = prepare(source.to_dict(), source.label, spec.precondition)
        reference = _reference(prepared, spec)
        for solver in spec.solvers:
            results.append(run_cell(prepared, solver, settings, reference, extra={'study': spec.study}))
    return results


def run_gap_study(spec: BenchSpec) -> List[CellResult]:
    return _run_cells(spec)


def run_scaling_study(spec: BenchSpec) -> List[CellResult]:
    """One gap study per problem size; ``summarize`` fits the log-log slope of MACs vs. L."""
    results = _run_cells(spec)
    sizes = sorted({r.n_vars for r in results})
    logger.info("scaling study over L=%s", sizes)
    return results


def run_warmstart_study(spec: BenchSpec) -> List[CellResult]:
    """Chains of perturbed problems solved cold and warm-started from the previous link."""
    if spec.warmstart is None or spec.warmstart.chain_length < 2:
        raise BenchSpecError("warm-start study needs chain_length >= 2")
    ws = spec.warmstart
    settings = CellSettings.from_spec(spec)
    results = []
    for chain_index, source in enumerate(_sources(spec)):
        if source.generate is None:
            raise BenchSpecError("warm-start study needs generator-sourced problems")
        chain_label = source.label
        models = perturbation_chain(generate_random(source.generate), ws.magnitude, ws.chain_length,
                                    ws.seed + chain_index * ws.chain_length)
        links = []
        for i, model in enumerate(models):
            link_source = {**source.to_dict(), 'perturbations': list(model.metadata.get('perturbations', []))}
            prepared = prepare(link_source, f"{chain_label}_l{i}", spec.precondition)
            links.append((prepared, _reference(prepared, spec)))
        for solver in spec.solvers:
            warm_state = None
            for i, (prepared, reference) in enumerate(links):
                meta = {'study': spec.study, 'chain': chain_label, 'link': i}
                cold = run_cell(prepared, solver, settings, reference, extra={**meta, 'arm': 'cold'})
                if warm_state is None:
                    warm = dataclasses.replace(cold, metadata={**cold.metadata, 'arm': 'warm'})
                else:
                    warm = run_cell(prepared, solver, settings, reference, warm_state, {**meta, 'arm': 'warm'})
                results.extend([cold, warm])
                warm_state = warm.final_state
    return results


def _slope(points: List[Tuple[float, float]]) -> Optional[float]:
    points = [(x, y) for x, y in points if x > 0 and y > 0]
    if len({x for x, _ in points}) < 2:
        return None
    xs, ys = np.log([p[0] for p in points]), np.log([p[1] for p in points])
    return float(np.polyfit(xs, ys, 1)[0])


def summarize(results: List[CellResult]) -> Dict[str, Any]:
    """Per-solver means (not-reached cells count as the budget), scaling slopes and warm-start tallies."""
    usable = [r for r in results if r.status == 'ok']
    groups: Dict[str, List[CellResult]] = {}
    for r in usable:
        key = r.solver if r.arm is None else f"{r.solver}/{r.arm}"
        groups.setdefault(key, []).append(r)

    solvers: Dict[str, Any] = {}
    for key, cells in sorted(groups.items()):
        iterations = [c.iterations_to_gap if c.reached else c.budget for c in cells]
        by_size: Dict[int, List[CellResult]] = {}
        for c in cells:
            by_size.setdefault(c.n_vars, []).append(c)
        sizes = sorted(by_size)
        mean_macs = [float(np.mean([c.mac_ops_to_gap for c in by_size[n]])) for n in sizes]
        model_costs = [c.model_cost_to_gap for c in cells if c.model_cost_to_gap is not None]
        solvers[key] = {
            'cells': len(cells),
            'reached': sum(c.reached for c in cells),
            'mean_iterations_to_gap': float(np.mean(iterations)),
            'median_iterations_to_gap': float(np.median(iterations)),
            'mean_best_gap': float(np.mean([c.terminal_gap for c in cells])),
            'mean_terminal_violation': float(np.mean([c.terminal_violation for c in cells])),
            'sizes': sizes,
            'mean_mac_ops_to_gap': mean_macs,
            'mean_model_cost_to_gap': [
                float(np.mean([c.model_cost_to_gap for c in by_size[n]])) for n in sizes
            ] if len(model_costs) == len(cells) else None,
            'mac_ops_slope': _slope(list(zip(map(float, sizes), mean_macs))),
        }

    summary: Dict[str, Any] = {
        'cells': len(results),
        'unusable': len(results) - len(usable),
        'solvers': solvers,
    }
    chains = _warmstart_tally(usable)
    if chains:
        summary['warmstart'] = chains
    return summary


def _warmstart_tally(cells: List[CellResult]) -> Dict[str, Any]:
    per_chain: Dict[Tuple[str, str], Dict[str, List[int]]] = {}
    for c in cells:
        if c.arm is None:
            continue
        arms = per_chain.setdefault((c.solver, c.metadata.get('chain', '')), {'cold': [], 'warm': []})
        arms[c.arm].append(c.iterations_to_gap if c.reached else c.budget)
    tally: Dict[str, Any] = {}
    for (solver, chain), arms in sorted(per_chain.items()):
        entry = tally.setdefault(solver, {'chains': 0, 'warm_not_worse': 0, 'per_chain': {}})
        cold_mean, warm_mean = float(np.mean(arms['cold'])), float(np.mean(arms['warm']))
        entry['chains'] += 1
        entry['warm_not_worse'] += int(warm_mean <= cold_mean)
        entry['per_chain'][chain] = {'cold_mean': cold_mean, 'warm_mean': warm_mean}
    return tally


def _csv_name(cell: CellResult) -> str:
    return f"{cell.cell_id}.csv"


def write_results(results: List[CellResult], spec: BenchSpec, output_dir: Optional[str] = None) -> str:
    """One CSV trace per cell plus summary.json; returns the summary path."""
    output_dir = output_dir or spec.output_dir
    os.makedirs(output_dir, exist_ok=True)
    cells = []
    for cell in results:
        entry = cell.to_dict()
        if cell.frame is not None:
            name = _csv_name(cell)
            frame = cell.frame.assign(version=SCHEMA_VERSION)[CSV_FILE_COLUMNS]
            frame.to_csv(os.path.join(output_dir, name), index=False)
            entry['trace'] = name
        cells.append(entry)
    path = os.path.join(output_dir, SUMMARY_FILE)
    write_json({
        'version': SCHEMA_VERSION,
        'study': spec.study,
        'spec': spec.to_dict(),
        'cells': cells,
        'summary': summarize(results),
    }, path)
    logger.info("wrote %d cells to %s", len(cells), output_dir)
    return path


def load_results(output_dir: str) -> Dict[str, Any]:
    data = read_json(os.path.join(output_dir, SUMMARY_FILE), 'bench summary')
    if data.get('version') != SCHEMA_VERSION:
        raise BenchSpecError(f"unsupported summary version {data.get('version')!r}")
    return data


def read_trace_csv(path: str) -> pd.DataFrame:
    """Load one per-cell trace, checking its version column."""
    frame = pd.read_csv(path, float_precision='round_trip')
    if list(frame.columns) != CSV_FILE_COLUMNS:
        raise BenchSpecError(f"{path}: unexpected trace columns {list(frame.columns)}")
    versions = set(frame['version'].unique().tolist())
    if versions and versions != {SCHEMA_VERSION}:
        raise BenchSpecError(f"{path}: unsupported trace version {sorted(versions)}")
    return frame[CSV_COLUMNS]


def summarize_from_csv(output_dir: str) -> Dict[str, Any]:
    """Recompute the summary from the CSV traces alone (cell identity comes from summary.json)."""
    data = load_results(output_dir)
    cells = []
    for entry in data['cells']:
        cell = CellResult.from_dict(entry)
        if 'trace' in entry:
            frame = read_trace_csv(os.path.join(output_dir, entry['trace']))
            metrics = metrics_from_frame(frame, cell.gap_target)
            cell.iterations_to_gap = metrics.iterations_to_gap
            cell.terminal_gap = metrics.best_gap
            cell.terminal_violation = metrics.terminal_violation
            cell.mac_ops_to_gap = metrics.mac_ops_to_gap
            cell.messages_to_gap = metrics.messages_to_gap
            if cell.partition is not None:
                spent = cell.iterations_to_gap if cell.reached else cell.iterations
                cell.model_cost_to_gap = cell.partition['per_iteration_cost'] * max(spent, 1)
        cells.append(cell)
    return summarize(cells)


STUDY_RUNNERS = {
    'gap': run_gap_study,
    'scaling': run_scaling_study,
    'warmstart': run_warmstart_study,
}


def run_bench(spec: BenchSpec, output_dir: Optional[str] = None) -> Tuple[List[CellResult], str]:
    results = STUDY_RUNNERS[spec.study](spec)
    return results, write_results(results, spec, output_dir)
