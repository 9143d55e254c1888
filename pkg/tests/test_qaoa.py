from collections import Counter

import numpy as np
import pytest

from paintseq.errors import ConfigurationError
from paintseq.exact import solve_exact
from paintseq.fixtures import case_study
from paintseq.models import make_instance
from paintseq.qaoa import (
    QaoaConfig,
    QaoaParams,
    ansatz_state,
    extract_best_feasible,
    optimize,
    top_k,
)
from paintseq.qubo import Infeasible, build_qubo, decode, encode, evaluate
from paintseq.simulator import DiagonalCost, basis_index, bits_of, expectation, uniform_superposition
from tests.conftest import random_instance


def toy_two_vehicle():
    return make_instance(['red', 'white'], changeover_rate=20.0, repair_rate=100.0,
                         repair_matrix=[[0.0, 0.15], [0.05, 0.0]])


def test_zero_angles_give_uniform_superposition(case):
    model = build_qubo(case)
    for levels in (1, 3):
        params = QaoaParams((0.0,) * levels, (0.0,) * levels)
        state = ansatz_state(model, params)
        np.testing.assert_allclose(state.amplitudes, uniform_superposition(9).amplitudes, atol=1e-12)


def test_zero_angle_expectation_is_brute_force_mean(case):
    model = build_qubo(case)
    mean = np.mean([evaluate(model, bits_of(b, 9)) for b in range(512)])
    state = ansatz_state(model, QaoaParams((0.0,), (0.0,)))
    assert expectation(state, DiagonalCost.from_model(model)) == pytest.approx(mean, abs=1e-9)


def test_beta_period_two_pi(case):
    model = build_qubo(case)
    costs = DiagonalCost.from_model(model)
    params = QaoaParams((0.11, 0.05), (0.4, 1.3))
    shifted = QaoaParams((0.11, 0.05), (0.4 + 2 * np.pi, 1.3))
    assert expectation(ansatz_state(model, params, costs), costs) == pytest.approx(
        expectation(ansatz_state(model, shifted, costs), costs), abs=1e-9)


def test_gamma_period_for_integer_costs():
    # all pair costs and the penalty are integers, so the gcd of cost differences is 1
    instance = make_instance(['red', 'white', 'red'], changeover_rate=2.0)
    model = build_qubo(instance, penalty=5.0)
    costs = DiagonalCost.from_model(model)
    params = QaoaParams((0.3,), (0.7,))
    shifted = QaoaParams((0.3 + 2 * np.pi,), (0.7,))
    assert expectation(ansatz_state(model, params, costs), costs) == pytest.approx(
        expectation(ansatz_state(model, shifted, costs), costs), abs=1e-9)


def test_params_validation():
    with pytest.raises(ConfigurationError):
        QaoaParams((0.1, 0.2), (0.3,))
    with pytest.raises(ConfigurationError):
        QaoaParams((), ())


@pytest.mark.parametrize('field, value', [
    ('levels', 0), ('shots', 0), ('grid_resolution', 0), ('max_iterations', 0),
    ('restarts', -1), ('convergence_tolerance', 0.0),
])
def test_config_validation(field, value):
    with pytest.raises(ConfigurationError):
        QaoaConfig(**{field: value})


def test_config_from_settings(settings):
    config = QaoaConfig.from_settings(settings, levels=2, seed=None)
    assert config.levels == 2
    assert config.seed == settings['QAOA_SEED']
    assert config.shots == settings['QAOA_SHOTS']


def test_two_vehicle_p1_beats_baseline():
    model = build_qubo(toy_two_vehicle())
    costs = DiagonalCost.from_model(model)
    result = optimize(model, QaoaConfig(levels=1, shots=256, seed=1))
    baseline = result.baseline_expectation
    spread = costs.values.max() - costs.values.min()

    # exhaustive 64 x 64 landscape as oracle: a strictly lower point exists
    landscape = [
        expectation(ansatz_state(model, QaoaParams((g,), (b,)), costs), costs)
        for g in np.linspace(0, 2 * np.pi, 64, endpoint=False)
        for b in np.linspace(0, np.pi, 64, endpoint=False)
    ]
    assert min(landscape) < baseline
    assert result.best_expectation < baseline
    assert result.best_expectation <= baseline - 0.01 * spread


def test_case_study_finds_single_changeover():
    instance = case_study()
    model = build_qubo(instance)
    result = optimize(model, QaoaConfig(levels=3, seed=7))
    assert result.best_feasible is not None
    assert result.best_feasible.changeover_count == 1
    assert result.best_feasible.order == solve_exact(instance).order
    assert result.best_expectation <= result.baseline_expectation + 1e-9


def test_result_expectation_matches_parameters(case):
    model = build_qubo(case)
    result = optimize(model, QaoaConfig(levels=2, grid_resolution=8, restarts=1, shots=512))
    costs = DiagonalCost.from_model(model)
    recomputed = expectation(ansatz_state(model, result.best_params, costs), costs)
    assert result.best_expectation == pytest.approx(recomputed, abs=1e-9)
    assert result.best_params.levels == 2
    assert sum(result.samples.values()) == 512
    assert result.optimizer_trace[0][0] == 0


def test_flat_pair_costs_grid_only():
    instance = make_instance(['red'] * 3, changeover_rate=20.0, repair_rate=100.0,
                             repair_matrix=np.full((3, 3), 0.1))
    model = build_qubo(instance)
    result = optimize(model, QaoaConfig(levels=1, grid_resolution=8, restarts=0, shots=4096, seed=3))
    assert result.best_feasible is not None
    assert result.best_feasible.total_cost == pytest.approx(2 * 10.0)


def test_optimize_is_deterministic(case):
    model = build_qubo(case)
    config = QaoaConfig(levels=2, grid_resolution=8, restarts=2, shots=300, seed=5)
    first, second = optimize(model, config), optimize(model, config)
    assert first.best_params == second.best_params
    assert first.best_expectation == second.best_expectation
    assert first.samples == second.samples
    assert first.best_feasible == second.best_feasible
    assert first.optimizer_trace == second.optimizer_trace


def test_parallel_restarts_match_sequential(case):
    model = build_qubo(case)
    sequential = optimize(model, QaoaConfig(levels=1, grid_resolution=8, restarts=3, shots=100))
    parallel = optimize(model, QaoaConfig(levels=1, grid_resolution=8, restarts=3, shots=100, workers=3))
    assert sequential.best_params == parallel.best_params
    assert sequential.samples == parallel.samples


@pytest.mark.parametrize('seed', range(20))
def test_baseline_dominance_random_instances(seed):
    instance = random_instance(seed, n=2 + seed % 2)
    model = build_qubo(instance)
    result = optimize(model, QaoaConfig(levels=1, grid_resolution=8, restarts=1, shots=64, seed=seed))
    assert result.best_expectation <= result.baseline_expectation + 1e-9


def test_extract_single_sample(case):
    model = build_qubo(case)
    samples = Counter({basis_index(encode(model, (3, 1, 2))): 5})
    assert extract_best_feasible(model, samples).order == (3, 1, 2)


def test_extract_all_infeasible(case):
    model = build_qubo(case)
    assert extract_best_feasible(model, Counter({0: 10, 511: 3, 7: 1})) is None


@pytest.mark.parametrize('seed', range(5))
def test_extract_matches_filter_and_min(seed):
    instance = random_instance(seed)
    model = build_qubo(instance)
    rng = np.random.default_rng(seed)
    feasible = [basis_index(encode(model, order)) for order in [(1, 2, 3), (2, 3, 1), (3, 2, 1)]]
    indices = list(rng.integers(0, 512, size=40)) + feasible[: 1 + seed % 3]
    samples = Counter(int(i) for i in indices)

    candidates = []
    for index in samples:
        plan = decode(model, bits_of(index, 9))
        if not isinstance(plan, Infeasible):
            candidates.append(plan)
    expected = min(candidates, key=lambda plan: (plan.total_cost, plan.order))
    result = extract_best_feasible(model, samples)
    assert result.order == expected.order
    assert result.total_cost >= solve_exact(instance).total_cost - 1e-9


def test_top_k_rows(case):
    model = build_qubo(case)
    samples = Counter({basis_index(encode(model, (3, 1, 2))): 6, 0: 3, 1: 1})
    rows = top_k(model, samples, shots=10, k=2)
    assert [row['probability'] for row in rows] == [0.6, 0.3]
    assert rows[0]['order'] == [3, 1, 2]
    assert rows[1] == {'bitstring': '000000000', 'probability': 0.3, 'order': None}


@pytest.mark.slow
def test_case_study_acceptance_over_seeds():
    instance = case_study()
    model = build_qubo(instance)
    optimum = solve_exact(instance)
    matches = 0
    for seed in range(1, 21):
        result = optimize(model, QaoaConfig(levels=3, seed=seed))
        best = result.best_feasible
        if best is not None and best.order == optimum.order and best.changeover_count == 1:
            matches += 1
    assert matches >= 16
