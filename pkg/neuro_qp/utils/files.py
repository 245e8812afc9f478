"""Problem-file I/O (versioned JSON) and generator output."""

import json
import logging
import os
from typing import Any, Dict, List, Optional

from neuro_qp.exceptions import ProblemFileError, SchemaVersionError
from neuro_qp.models.problem import Box, QpProblem, Sense
from neuro_qp.models.sparse import SparseMatrix
from neuro_qp.models.stage import StageModel

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
REQUIRED_FIELDS = ('L', 'M', 'Q', 'p', 'A', 'k')


def read_json(path: str, what: str = 'file') -> Any:
    """Parse a JSON file; syntax errors become ProblemFileError with line and column."""
    with open(path, 'r', encoding='utf-8') as f:
        text = f.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ProblemFileError(f"{path}: invalid JSON in {what} at line {e.lineno}, column {e.colno}: {e.msg}") from e


def write_json(data: Any, path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2)
        f.write('\n')


def check_version(data: Dict[str, Any], path: str) -> None:
    version = data.get('version')
    if version is None:
        raise ProblemFileError(f"{path}: missing field 'version'", field='version')
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(
            f"{path}: schema version {version} is not supported (expected {SCHEMA_VERSION})", field='version'
        )


def _field(data: Dict[str, Any], name: str, path: str) -> Any:
    if name not in data:
        raise ProblemFileError(f"{path}: missing field '{name}'", field=name)
    return data[name]


def problem_from_dict(data: Any, path: str = '<problem>') -> QpProblem:
    """Build a QpProblem from the problem-file object; errors name the offending field."""
    if not isinstance(data, dict):
        raise ProblemFileError(f"{path}: top level must be a JSON object")
    check_version(data, path)
    for name in REQUIRED_FIELDS:
        _field(data, name, path)

    def parse(name: str, build):
        try:
            return build()
        except ProblemFileError:
            raise
        except (KeyError, TypeError, ValueError) as e:
            raise ProblemFileError(f"{path}: invalid field '{name}': {e}", field=name) from e

    L = parse('L', lambda: int(data['L']))
    M = parse('M', lambda: int(data['M']))
    Q = parse('Q', lambda: SparseMatrix.from_dict(data['Q'], L, L))
    A = parse('A', lambda: SparseMatrix.from_dict(data['A'], M, L))
    p = parse('p', lambda: [float(v) for v in data['p']])
    k = parse('k', lambda: [float(v) for v in data['k']])
    senses = parse('senses', lambda: tuple(Sense(s) for s in data.get('senses') or ()))
    box = None
    if data.get('box') is not None:
        box = parse('box', lambda: Box(data['box']['lower'], data['box']['upper']))
    return QpProblem(Q=Q, p=p, A=A, k=k, senses=senses, box=box)


def load_problem(path: str) -> QpProblem:
    problem = problem_from_dict(read_json(path, 'problem file'), path)
    logger.debug("loaded %s: L=%d, M=%d", path, problem.n_vars, problem.n_cons)
    return problem


def save_problem(problem: QpProblem, path: str) -> None:
    write_json(problem.to_dict(), path)


def problem_filename(horizon: int, seed: int) -> str:
    return f"mpc_N{horizon}_seed{seed}.json"


def save_generated(models: List[StageModel], problems: List[QpProblem], out_dir: str,
                   manifest_name: str = 'manifest.json') -> str:
    """Write one problem file per model plus a manifest (generator settings, sizes, condition estimates)."""
    os.makedirs(out_dir, exist_ok=True)
    entries = []
    for model, problem in zip(models, problems):
        generator: Dict[str, Any] = model.metadata.get('generator', {})
        name = problem_filename(model.horizon, generator.get('seed', 0))
        save_problem(problem, os.path.join(out_dir, name))
        entries.append({
            'file': name,
            'generator': generator,
            'L': problem.n_vars,
            'M': problem.n_cons,
            'nnz_Q': problem.Q.nnz,
            'nnz_A': problem.A.nnz,
            'condition_estimate': model.condition_estimate(),
        })
    manifest_path = os.path.join(out_dir, manifest_name)
    write_json({'version': SCHEMA_VERSION, 'problems': entries}, manifest_path)
    logger.info("wrote %d problems to %s", len(entries), out_dir)
    return manifest_path


def resolve_relative(path: str, base: Optional[str]) -> str:
    """Paths inside a spec file are relative to the spec's directory."""
    if base is None or os.path.isabs(path):
        return path
    return os.path.join(os.path.dirname(base), path)
