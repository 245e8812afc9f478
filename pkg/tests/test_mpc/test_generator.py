import numpy as np
import pytest

from neuro_qp.models.problem import Sense, evaluate_violation, validate
from neuro_qp.models.stage import StageModel, stage_offset
from neuro_qp.mpc.generator import GeneratorSpec, generate_random, perturb, perturbation_chain, tile
from neuro_qp.mpc.resources import LADDER_HORIZONS, count_resources


def _scalar_model():
    one = [np.ones((1, 1))]
    return StageModel(
        n_states=1, n_controls=1, horizon=1,
        S=[np.eye(1)], K=[np.zeros((1, 1))], T=[np.eye(1)],
        q=[np.zeros(1)], r=[np.zeros(1)], E=one, F=one, c=[np.array([0.5])],
        S_terminal=np.eye(1), q_terminal=np.zeros(1), x_init=np.array([2.0]),
    )


def test_scalar_tiling_layout():
    """One state and one control tile into the expected equality rows."""
    problem = tile(_scalar_model())
    assert np.array_equal(problem.A.to_dense(), [[1, 0, 0], [1, 1, -1]])
    assert problem.k.tolist() == [2.0, -0.5]
    assert problem.senses == (Sense.EQ, Sense.EQ)
    assert np.array_equal(problem.Q.to_dense(), np.eye(3))


def test_default_horizon_sizes():
    problem = tile(generate_random(GeneratorSpec(horizon=5)))
    assert (problem.n_vars, problem.n_cons) == (264, 144)
    assert all(s is Sense.EQ for s in problem.senses)


def test_generated_problem_is_valid():
    problem = tile(generate_random(GeneratorSpec(horizon=3, n_states=6, n_controls=4, seed=7)))
    assert validate(problem).is_valid


def test_block_structure():
    """Stage Hessians sit on the diagonal with nothing beside them."""
    model = generate_random(GeneratorSpec(horizon=4, n_states=3, n_controls=2, seed=1))
    Q = tile(model).Q.to_dense()
    size = model.n_states + model.n_controls
    for j in range(model.horizon):
        start = stage_offset(model, j)
        assert np.allclose(Q[start:start + size, start:start + size], model.stage_hessian(j))
        assert not Q[start:start + size, start + size:].any()


def test_stage_blocks_are_psd():
    model = generate_random(GeneratorSpec(horizon=3, n_states=5, n_controls=5, seed=2))
    for j in range(model.horizon):
        H = model.stage_hessian(j)
        assert np.allclose(H, H.T)
        assert np.linalg.eigvalsh(H)[0] >= 1e-3 * (1 - 1e-9)


def test_rolled_out_point_is_feasible():
    """Rolling the dynamics forward from x_init satisfies every equality row."""
    model = generate_random(GeneratorSpec(horizon=6, n_states=4, n_controls=3, seed=5))
    violation, _ = evaluate_violation(tile(model), model.feasible_point())
    assert violation < 1e-10


def test_generation_is_seeded():
    spec = GeneratorSpec(horizon=2, n_states=4, n_controls=4, seed=11)
    assert tile(generate_random(spec)) == tile(generate_random(spec))
    other = GeneratorSpec(horizon=2, n_states=4, n_controls=4, seed=12)
    assert tile(generate_random(spec)) != tile(generate_random(other))


def test_generator_metadata():
    spec = GeneratorSpec(horizon=2, seed=4)
    model = generate_random(spec)
    assert model.metadata['generator'] == spec.to_dict()
    assert GeneratorSpec.from_dict(model.metadata['generator']) == spec


def test_generator_spec_validation():
    with pytest.raises(ValueError):
        GeneratorSpec(horizon=0)
    with pytest.raises(ValueError):
        GeneratorSpec(eps=0.0)
    with pytest.raises(ValueError):
        GeneratorSpec.from_dict({'horizon': 2, 'colour': 'red'})


@pytest.mark.parametrize("horizon", LADDER_HORIZONS[:3])
def test_ladder_sizes_match_resource_counts(horizon):
    problem = tile(generate_random(GeneratorSpec(horizon=horizon)))
    assert problem.n_vars == count_resources(24, 24, horizon).n_neurons_decision


def test_zero_perturbation_is_identity():
    model = generate_random(GeneratorSpec(horizon=2, n_states=3, n_controls=3))
    assert perturb(model, 0.0, seed=1) is model


def test_perturbation_keeps_pattern_and_psd():
    model = generate_random(GeneratorSpec(horizon=3, n_states=4, n_controls=4))
    perturbed = perturb(model, 0.05, seed=9)
    base, moved = tile(model), tile(perturbed)
    assert moved != base
    assert np.array_equal(moved.k, base.k)
    assert validate(moved).is_valid
    assert perturbed.metadata['perturbations'] == [{'magnitude': 0.05, 'seed': 9}]


def test_perturbation_chain():
    """Chain links use consecutive seeds and replay identically."""
    model = generate_random(GeneratorSpec(horizon=2, n_states=3, n_controls=3))
    chain = perturbation_chain(model, 0.01, length=4, seed=100)
    assert len(chain) == 4
    assert chain[0] is model
    assert [p['seed'] for p in chain[-1].metadata['perturbations']] == [101, 102, 103]
    again = perturbation_chain(model, 0.01, length=4, seed=100)
    assert tile(again[-1]) == tile(chain[-1])


def test_perturbation_rejects_bad_arguments():
    model = generate_random(GeneratorSpec(horizon=1, n_states=2, n_controls=2))
    with pytest.raises(ValueError):
        perturb(model, -0.1, seed=0)
    with pytest.raises(ValueError):
        perturbation_chain(model, 0.1, length=0, seed=0)


def test_small_perturbation_stays_close_and_keeps_pattern():
    """A 1% perturbation moves Q by at most 5% in Frobenius norm and creates or removes no entries."""
    model = generate_random(GeneratorSpec(horizon=3, n_states=4, n_controls=4, seed=3))
    base, moved = tile(model), tile(perturb(model, 0.01, seed=21))
    Q, Q_moved = base.Q.to_dense(), moved.Q.to_dense()
    assert np.linalg.norm(Q_moved - Q) / np.linalg.norm(Q) <= 0.05
    assert np.array_equal(Q_moved != 0, Q != 0)
    assert np.array_equal(moved.A.to_dense() != 0, base.A.to_dense() != 0)


@pytest.mark.parametrize("horizon, n_states, n_controls", [(1, 2, 2), (5, 6, 3), (10, 24, 24)])
def test_generated_hessian_density_bound(horizon, n_states, n_controls):
    """Block-diagonal Q fills at most 2(n_states + n_controls)/L of the matrix."""
    problem = tile(generate_random(GeneratorSpec(horizon=horizon, n_states=n_states, n_controls=n_controls)))
    L = problem.n_vars
    assert problem.Q.nnz / L ** 2 <= 2 * (n_states + n_controls) / L
