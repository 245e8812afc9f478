import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neuro_qp.exceptions import ProblemFileError, SchemaVersionError
from neuro_qp.models.problem import Box, Sense
from neuro_qp.mpc.generator import GeneratorSpec, generate_random, tile
from neuro_qp.utils.files import (
    load_problem,
    problem_filename,
    problem_from_dict,
    read_json,
    save_generated,
    save_problem,
    write_json,
)
from tests.conftest import dense_problem


def _problem_dict(**overrides):
    data = dense_problem([[2, 0], [0, 2]], [0, 0], [[1, 0]], [1]).to_dict()
    data.update(overrides)
    return data


def test_save_and_load(tmp_path):
    problem = dense_problem([[2, 0.5], [0.5, 1]], [1e-17, -3.25], [[1, 1]], [2], senses=['eq'],
                            box=Box([-1, -1], [1, 1]))
    path = tmp_path / "nested" / "problem.json"
    save_problem(problem, str(path))
    assert load_problem(str(path)) == problem


def test_senses_default_to_inequalities():
    data = _problem_dict()
    del data['senses']
    assert problem_from_dict(data).senses == (Sense.INEQ,)


def test_missing_field_is_named():
    data = _problem_dict()
    del data['k']
    with pytest.raises(ProblemFileError, match="missing field 'k'") as excinfo:
        problem_from_dict(data, 'toy.json')
    assert excinfo.value.field == 'k'


def test_missing_version():
    data = _problem_dict()
    del data['version']
    with pytest.raises(ProblemFileError) as excinfo:
        problem_from_dict(data)
    assert excinfo.value.field == 'version'


def test_unsupported_version():
    with pytest.raises(SchemaVersionError):
        problem_from_dict(_problem_dict(version=7))


@pytest.mark.parametrize("field, value", [
    ('L', 'two'),
    ('Q', {'rows': [0], 'cols': [5], 'vals': [1.0]}),
    ('A', {'rows': [0], 'vals': [1.0]}),
    ('p', ['a', 'b']),
    ('senses', ['maybe']),
    ('box', {'lower': [0, 0]}),
])
def test_invalid_field_is_named(field, value):
    """Load errors name the offending field."""
    with pytest.raises(ProblemFileError, match=f"invalid field '{field}'") as excinfo:
        problem_from_dict(_problem_dict(**{field: value}))
    assert excinfo.value.field == field


def test_top_level_must_be_object():
    with pytest.raises(ProblemFileError):
        problem_from_dict([1, 2, 3])


def test_read_json_reports_position(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "L": 2,\n  "M": \n}')
    with pytest.raises(ProblemFileError, match="line 4"):
        read_json(str(path))


def test_missing_file_raises_os_error(tmp_path):
    with pytest.raises(OSError):
        load_problem(str(tmp_path / "absent.json"))


def test_write_json_ends_with_newline(tmp_path):
    path = tmp_path / "out.json"
    write_json({'a': 1}, str(path))
    assert path.read_text().endswith('}\n')


def test_problem_filename():
    assert problem_filename(100, 3) == "mpc_N100_seed3.json"


def test_save_generated_writes_manifest(tmp_path):
    """Test saving generated problems alongside a manifest."""
    models = [generate_random(GeneratorSpec(horizon=2, n_states=3, n_controls=2, seed=s)) for s in (4, 5)]
    problems = [tile(m) for m in models]
    manifest_path = save_generated(models, problems, str(tmp_path / "gen"))
    manifest = json.loads((tmp_path / "gen" / "manifest.json").read_text())
    assert manifest_path == str(tmp_path / "gen" / "manifest.json")
    assert [e['file'] for e in manifest['problems']] == ["mpc_N2_seed4.json", "mpc_N2_seed5.json"]
    entry = manifest['problems'][0]
    assert (entry['L'], entry['M']) == (13, 9)
    assert entry['generator']['seed'] == 4
    assert entry['condition_estimate'] >= 1.0
    loaded = load_problem(str(tmp_path / "gen" / entry['file']))
    assert loaded == problems[0]
    assert np.array_equal(loaded.k, problems[0].k)


def _random_problem(seed: int):
    rng = np.random.default_rng(seed)
    L = int(rng.integers(1, 7))
    M = int(rng.integers(0, 5))
    B = rng.standard_normal((L, L)) * (rng.random((L, L)) < 0.6)
    A = rng.standard_normal((M, L)) * (rng.random((M, L)) < 0.6)
    senses = [Sense.EQ if flag else Sense.INEQ for flag in rng.random(M) < 0.3]
    box = None
    if rng.random() < 0.5:
        lower = -rng.random(L) * 10
        box = Box(lower, lower + rng.random(L) * 10)
    return dense_problem(B @ B.T, rng.standard_normal(L), A, rng.standard_normal(M), senses, box)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_problem_json_round_trip_is_lossless(seed):
    """Random problems survive to_dict, JSON text and problem_from_dict unchanged."""
    problem = _random_problem(seed)
    restored = problem_from_dict(json.loads(json.dumps(problem.to_dict())))
    assert restored == problem
    assert restored.n_vars == problem.n_vars and restored.n_cons == problem.n_cons
