"""Command-line interface for neuro_qp."""

import argparse
import json
import logging
import sys
from typing import List, Optional

from rich.console import Console
from rich.table import Table

from neuro_qp import __version__
from neuro_qp.bench.harness import run_bench, run_solver
from neuro_qp.bench.spec import MODES, load_bench_spec
from neuro_qp.exceptions import NeuroQpError, ProblemFileError
from neuro_qp.fxp.formats import as_format
from neuro_qp.models.problem import evaluate_cost, evaluate_violation, validate
from neuro_qp.mpc.generator import GeneratorSpec, generate_random, tile
from neuro_qp.mpc.resources import LADDER_HORIZONS, chip_footprint, size_ladder
from neuro_qp.solvers.network import NetworkConfig
from neuro_qp.solvers.partition import halving_sweep, partition
from neuro_qp.solvers.precond import Scaling, ruiz_equilibrate, unscale_solution
from neuro_qp.solvers.reference import estimate_hyperparams
from neuro_qp.utils.config import Settings, load_environment
from neuro_qp.utils.files import load_problem, save_generated, write_json
from neuro_qp.utils.log import setup_logging

console = Console()

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2


class CliArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with status 1 instead of argparse's 2 (reserved for I/O failures)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        console.print(f"[bold red]Error:[/] {message}")
        sys.exit(EXIT_INVALID)


def positive_int(value: str) -> int:
    """argparse type for counts and periods that must be at least 1."""
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid int value: {value!r}")
    if number < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {number}")
    return number


def _print_core_sweep(reports) -> None:
    table = Table(title="Core sweep (partition cost model)")
    table.add_column("Cores", style="cyan")
    table.add_column("Neurons/core", style="magenta")
    table.add_column("Total cost", style="green")
    table.add_column("Speedup", style="green")
    for report in reports:
        table.add_row(str(report.n_cores), str(report.neurons_per_core), f"{report.total_cost:,.0f}",
                      f"{report.speedup:.2f}")
    console.print(table)


def solve_cli(args, settings: Settings) -> int:
    """
    Solve one problem file with a float reference solver or the fixed-point network.
    """
    problem = load_problem(args.problem)
    report = validate(problem)
    if not report.is_valid:
        for violation in report:
            console.print(f"[bold red]Error:[/] {violation.message}")
        return EXIT_INVALID
    for warning in report.warnings:
        console.print(f"[yellow]Warning:[/] {warning}")

    if args.core_sweep is not None and args.mode != 'fxp':
        raise ValueError("--core-sweep needs --mode fxp")
    if args.precondition:
        scaled, scaling = ruiz_equilibrate(problem)
    else:
        scaled, scaling = problem, Scaling.identity(problem.n_vars, problem.n_cons)

    iters = settings.iters if args.iters is None else args.iters
    alpha_period = settings.alpha_period if args.alpha_period is None else args.alpha_period
    beta_period = settings.beta_period if args.beta_period is None else args.beta_period
    hp = estimate_hyperparams(scaled, alpha_period=alpha_period, beta_period=beta_period, max_iters=iters)
    cfg = None
    if args.mode == 'fxp':
        cfg = NetworkConfig.from_settings(
            settings,
            state_fmt=as_format(args.fmt) if args.fmt else None,
            weight_bits=args.weight_bits,
            alpha_period=alpha_period,
            beta_period=beta_period,
            max_iters=iters,
            event_threshold=args.event_threshold,
        )
    run = run_solver(scaled, args.mode, hp, cfg, budget=iters)

    x = unscale_solution(run.solution.x, scaling)
    violation, _ = evaluate_violation(problem, x)
    result = {
        'mode': args.mode,
        'cost': evaluate_cost(problem, x),
        'violation': violation,
        'iterations': run.solution.iterations,
        'converged': run.solution.converged,
    }
    if run.stats is not None:
        result['event_stats'] = {k: v for k, v in run.stats.to_dict().items() if k != 'breakdown'}
        result['partition'] = partition(run.network).to_dict()
        if args.core_sweep is not None:
            sweep = halving_sweep(run.network, args.core_sweep)
            result['core_sweep'] = [
                {'n_cores': r.n_cores, 'neurons_per_core': r.neurons_per_core, 'total_cost': r.total_cost,
                 'speedup': r.speedup} for r in sweep
            ]
            _print_core_sweep(sweep)
    print(json.dumps(result, indent=2))

    if args.out:
        write_json({
            'version': 1,
            **result,
            'x': x.tolist(),
            'hyperparams': hp.to_dict(),
            'network': cfg.to_dict() if cfg is not None else None,
            'scaling': scaling.to_dict(),
            'trace': run.trace.to_dict()['records'],
        }, args.out)
        console.print(f"[bold green]Results written to {args.out}[/]")
    return EXIT_OK


def generate_cli(args, settings: Settings) -> int:
    """
    Generate seeded MPC problems and write them with a manifest.
    """
    models, problems = [], []
    for i in range(args.count):
        spec = GeneratorSpec(
            horizon=args.horizon,
            n_states=args.states,
            n_controls=args.controls,
            seed=args.seed + i,
            delta=args.delta,
            eps=args.eps,
        )
        model = generate_random(spec)
        models.append(model)
        problems.append(tile(model))
    manifest = save_generated(models, problems, args.out)

    table = Table(title="Generated Problems")
    table.add_column("Seed", style="cyan")
    table.add_column("L", style="magenta")
    table.add_column("M", style="magenta")
    table.add_column("nnz(Q)", style="green")
    table.add_column("nnz(A)", style="green")
    for model, problem in zip(models, problems):
        table.add_row(str(model.metadata['generator']['seed']), str(problem.n_vars), str(problem.n_cons),
                      str(problem.Q.nnz), str(problem.A.nnz))
    console.print(table)
    console.print(f"[bold green]Manifest written to {manifest}[/]")
    return EXIT_OK


def bench_cli(args, settings: Settings) -> int:
    """
    Run a benchmark spec and write per-cell CSV traces plus summary.json.
    """
    spec = load_bench_spec(args.spec)
    results, summary_path = run_bench(spec, args.out)

    table = Table(title=f"Benchmark ({spec.study})")
    table.add_column("Problem", style="cyan")
    table.add_column("Solver", style="magenta")
    table.add_column("Iterations to gap", style="green")
    table.add_column("Best gap", style="green")
    table.add_column("Violation", style="green")
    table.add_column("Status")
    for cell in results:
        solver = cell.solver if cell.arm is None else f"{cell.solver} ({cell.arm})"
        reached = str(cell.iterations_to_gap) if cell.reached else f">{cell.budget}"
        table.add_row(cell.problem, solver, reached, f"{cell.terminal_gap:.4g}",
                      f"{cell.terminal_violation:.3g}", cell.status)
    console.print(table)
    console.print(f"[bold green]Summary written to {summary_path}[/]")
    return EXIT_OK


def resources_cli(args, settings: Settings) -> int:
    """
    Print neuron/synapse counts and the chip footprint over a horizon ladder.
    """
    table = Table(title=f"Resources (n_states={args.states}, n_controls={args.controls})")
    table.add_column("N", style="cyan")
    table.add_column("Decision neurons", style="magenta")
    table.add_column("Total neurons", style="magenta")
    table.add_column("Synapses", style="green")
    table.add_column("Cores", style="green")
    table.add_column("Single chip")
    for horizon, resources in size_ladder(args.horizons, args.states, args.controls):
        footprint = chip_footprint(resources)
        table.add_row(str(horizon), str(resources.n_neurons_decision), str(resources.n_neurons_total),
                      f"{resources.n_synapses:,}", str(footprint.cores),
                      "yes" if footprint.fits_single_chip else "no")
    console.print(table)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = CliArgumentParser(
        prog='nqp',
        description='neuro-qp - event-based fixed-point QP solving and benchmarking'
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('--verbose', action='store_true', help='Enable debug logging')
    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    # Solve command
    solve_parser = subparsers.add_parser('solve', help='Solve a problem file')
    solve_parser.add_argument('problem', help='Path to the problem JSON file')
    solve_parser.add_argument('--mode', choices=MODES, default='fxp', help='Solver to run')
    solve_parser.add_argument('--fmt', default=None, help='State format for fxp mode (e.g. Q17.6)')
    solve_parser.add_argument('--weight-bits', type=int, default=None, help='Weight width for fxp mode')
    solve_parser.add_argument('--iters', type=positive_int, default=None, help='Iteration budget')
    solve_parser.add_argument('--alpha-period', type=positive_int, default=None, help='Iterations between alpha halvings')
    solve_parser.add_argument('--beta-period', type=positive_int, default=None, help='Iterations between beta doublings')
    solve_parser.add_argument('--event-threshold', type=int, default=None,
                              help='Minimum |raw state| that triggers a message (fxp mode)')
    solve_parser.add_argument('--precondition', action='store_true', help='Apply Ruiz equilibration first')
    solve_parser.add_argument('--core-sweep', type=positive_int, default=None, metavar='MAX_CORES',
                              help='fxp mode: partition cost for 1, 2, 4, ... up to MAX_CORES cores')
    solve_parser.add_argument('--out', default=None, help='Write full results JSON to this path')
    solve_parser.set_defaults(func=solve_cli)

    # Generate command
    generate_parser = subparsers.add_parser('generate', help='Generate seeded MPC problems')
    generate_parser.add_argument('--horizon', type=positive_int, default=5, help='MPC horizon N')
    generate_parser.add_argument('--states', type=positive_int, default=24, help='State dimension')
    generate_parser.add_argument('--controls', type=positive_int, default=24, help='Control dimension')
    generate_parser.add_argument('--seed', type=int, default=0, help='Seed of the first problem')
    generate_parser.add_argument('--count', type=positive_int, default=1, help='Number of problems (consecutive seeds)')
    generate_parser.add_argument('--delta', type=float, default=0.05, help='Dynamics perturbation size')
    generate_parser.add_argument('--eps', type=float, default=1e-3, help='Cost block regularization')
    generate_parser.add_argument('--out', default='problems', help='Output directory')
    generate_parser.set_defaults(func=generate_cli)

    # Bench command
    bench_parser = subparsers.add_parser('bench', help='Run a benchmark spec')
    bench_parser.add_argument('spec', help='Path to the bench spec JSON file')
    bench_parser.add_argument('--out', default=None, help='Output directory (overrides the spec)')
    bench_parser.set_defaults(func=bench_cli)

    # Resources command
    resources_parser = subparsers.add_parser('resources', help='Neuron and synapse counts over a horizon ladder')
    resources_parser.add_argument('--horizons', type=positive_int, nargs='+', default=list(LADDER_HORIZONS),
                                  help='Horizons to tabulate')
    resources_parser.add_argument('--states', type=positive_int, default=24, help='State dimension')
    resources_parser.add_argument('--controls', type=positive_int, default=24, help='Control dimension')
    resources_parser.set_defaults(func=resources_cli)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = load_environment()
    except ValueError as e:
        console.print(f"[bold red]Error:[/] {e}")
        return EXIT_INVALID
    setup_logging(logging.DEBUG if args.verbose else settings.log_level)

    if not hasattr(args, 'func'):
        parser.print_help()
        return EXIT_INVALID

    try:
        return args.func(args, settings)
    except (OSError, ProblemFileError) as e:
        console.print(f"[bold red]Error:[/] {e}")
        return EXIT_IO
    except (NeuroQpError, ValueError) as e:
        console.print(f"[bold red]Error:[/] {e}")
        return EXIT_INVALID


if __name__ == '__main__':
    sys.exit(main())
