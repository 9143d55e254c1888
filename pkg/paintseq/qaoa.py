"""
QAOA Engine
Alternating cost/mixer ansatz with a derivative-free outer optimization loop
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from paintseq.errors import ConfigurationError
from paintseq.models import COST_TOLERANCE, SequencePlan
from paintseq.qubo import Infeasible, decode
from paintseq.simulator import (
    DEFAULT_MAX_QUBITS,
    DiagonalCost,
    apply_cost_phase,
    apply_mixer,
    bits_of,
    expectation,
    format_bits,
    sample,
    uniform_superposition,
)

logger = logging.getLogger(__name__)

GAMMA_RANGE = 2 * math.pi
BETA_RANGE = math.pi


@dataclass(frozen=True)
class QaoaParams:
    gammas: tuple
    betas: tuple

    def __post_init__(self):
        if len(self.gammas) != len(self.betas) or not self.gammas:
            raise ConfigurationError(
                f'need matching non-empty angle lists, got {len(self.gammas)} gammas and {len(self.betas)} betas'
            )

    @property
    def levels(self):
        return len(self.gammas)

    @classmethod
    def from_vector(cls, vector):
        vector = [float(x) for x in vector]
        half = len(vector) // 2
        return cls(tuple(vector[:half]), tuple(vector[half:]))

    def to_vector(self):
        return np.array(self.gammas + self.betas, dtype=float)


@dataclass(frozen=True)
class QaoaConfig:
    levels: int = 3
    grid_resolution: int = 32
    max_iterations: int = 400
    restarts: int = 4
    convergence_tolerance: float = 1e-6
    shots: int = 4096
    seed: int = 0
    workers: int = 1
    max_qubits: int = DEFAULT_MAX_QUBITS

    def __post_init__(self):
        for name in ('levels', 'grid_resolution', 'max_iterations', 'shots', 'workers', 'max_qubits'):
            if getattr(self, name) < 1:
                raise ConfigurationError(f'{name} must be >= 1, got {getattr(self, name)}')
        if self.restarts < 0:
            raise ConfigurationError(f'restarts must be >= 0, got {self.restarts}')
        if not self.convergence_tolerance > 0:
            raise ConfigurationError(f'convergence_tolerance must be > 0, got {self.convergence_tolerance}')

    @classmethod
    def from_settings(cls, settings, **overrides):
        values = dict(
            levels=settings['QAOA_LEVELS'],
            grid_resolution=settings['QAOA_GRID'],
            max_iterations=settings['QAOA_MAX_ITERATIONS'],
            restarts=settings['QAOA_RESTARTS'],
            convergence_tolerance=settings['QAOA_TOLERANCE'],
            shots=settings['QAOA_SHOTS'],
            seed=settings['QAOA_SEED'],
            workers=settings['QAOA_WORKERS'],
            max_qubits=settings['SIM_MAX_QUBITS'],
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True, eq=False)
class QaoaResult:
    best_params: QaoaParams
    best_expectation: float
    baseline_expectation: float
    samples: dict
    best_feasible: Optional[SequencePlan]
    optimizer_trace: list = field(default_factory=list)
    shots: int = 0


@dataclass
class _RestartOutcome:
    index: int
    value: float
    vector: np.ndarray
    trace: list


class _Objective:
    """Exact ansatz expectation as a function of the flat angle vector"""

    def __init__(self, costs, num_qubits, max_qubits):
        self.costs = costs
        self.num_qubits = num_qubits
        self.max_qubits = max_qubits
        self.evaluations = 0

    def state(self, vector):
        half = len(vector) // 2
        state = uniform_superposition(self.num_qubits, self.max_qubits)
        for gamma, beta in zip(vector[:half], vector[half:]):
            state = apply_cost_phase(state, self.costs, gamma)
            state = apply_mixer(state, beta)
        return state

    def __call__(self, vector):
        self.evaluations += 1
        return expectation(self.state(vector), self.costs)


def ansatz_state(model, params, costs=None, max_qubits=DEFAULT_MAX_QUBITS):
    """Uniform superposition followed by p rounds of cost phase then mixer"""
    if costs is None:
        costs = DiagonalCost.from_model(model, max_qubits)
    objective = _Objective(costs, model.num_variables, max_qubits)
    return objective.state(params.to_vector())


def _grid_axes(resolution):
    gammas = np.linspace(0.0, GAMMA_RANGE, resolution, endpoint=False)
    betas = np.linspace(0.0, BETA_RANGE, resolution, endpoint=False)
    return gammas, betas


def _scan_layer(objective, frozen, resolution):
    """Expectation over a (gamma, beta) grid for a new last layer, earlier layers fixed"""
    gammas, betas = _grid_axes(resolution)
    half = len(frozen) // 2
    points = []
    for gi, gamma in enumerate(gammas):
        for bi, beta in enumerate(betas):
            vector = np.concatenate([frozen[:half], [gamma], frozen[half:], [beta]])
            points.append((objective(vector), gi, bi, vector))
    points.sort(key=lambda point: point[:3])
    return points


def _refine(objective, vector, config, trace, counter):
    if config.restarts == 0:
        return vector, objective(vector)

    def record(xk):
        counter[0] += 1
        trace.append((counter[0], float(objective(xk))))

    result = minimize(
        objective,
        vector,
        method='Nelder-Mead',
        callback=record,
        options=dict(maxiter=config.max_iterations, xatol=config.convergence_tolerance,
                     fatol=config.convergence_tolerance),
    )
    if not result.success:
        logger.debug('Nelder-Mead stopped early: %s', result.message)
    return np.asarray(result.x, dtype=float), float(result.fun)


def _run_restart(index, seed_vector, seed_value, costs, num_qubits, config):
    objective = _Objective(costs, num_qubits, config.max_qubits)
    trace = [(0, float(seed_value))]
    counter = [0]
    vector, value = _refine(objective, np.asarray(seed_vector, dtype=float), config, trace, counter)
    if value > seed_value:
        vector, value = np.asarray(seed_vector, dtype=float), float(seed_value)

    layer_resolution = max(4, config.grid_resolution // 4)
    for level in range(2, config.levels + 1):
        best_value, _, _, extended = _scan_layer(objective, vector, layer_resolution)[0]
        counter[0] += 1
        trace.append((counter[0], float(best_value)))
        refined, refined_value = _refine(objective, extended, config, trace, counter)
        if refined_value <= best_value:
            vector, value = refined, refined_value
        else:
            vector, value = extended, best_value
        logger.debug('Restart %d level %d: expectation %.9g after %d evaluations',
                     index, level, value, objective.evaluations)

    return _RestartOutcome(index, float(value), vector, trace)


def optimize(model, config):
    """
    Minimize the ansatz expectation over (gamma, beta)

    Level 1 is seeded from a grid over [0, 2pi) x [0, pi); the best grid points
    seed the restarts. Each further level is warm-started from the previous
    level's angles with a coarse grid over the new layer, then all angles are
    refined together with Nelder-Mead.
    """
    costs = DiagonalCost.from_model(model, config.max_qubits)
    num_qubits = model.num_variables
    baseline = expectation(uniform_superposition(num_qubits, config.max_qubits), costs)
    logger.info('QAOA on %d qubits, p=%d, uniform baseline %.6f', num_qubits, config.levels, baseline)

    scan = _scan_layer(_Objective(costs, num_qubits, config.max_qubits), np.array([]),
                       config.grid_resolution)
    seeds = scan[:max(1, config.restarts)]

    def run(item):
        index, (value, _, _, vector) = item
        return _run_restart(index, vector, value, costs, num_qubits, config)

    if config.workers > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(run, enumerate(seeds)))
    else:
        outcomes = [run(item) for item in enumerate(seeds)]

    best = min(outcomes, key=lambda outcome: (outcome.value, outcome.index))
    params = QaoaParams.from_vector(best.vector)
    state = ansatz_state(model, params, costs, config.max_qubits)
    best_expectation = expectation(state, costs)

    samples = sample(state, config.shots, config.seed)
    best_feasible = extract_best_feasible(model, samples)
    if best_feasible is None:
        logger.warning('No feasible bitstring among %d shots', config.shots)
    logger.info('QAOA expectation %.6f (baseline %.6f), restart %d won',
                best_expectation, baseline, best.index)

    return QaoaResult(
        best_params=params,
        best_expectation=best_expectation,
        baseline_expectation=baseline,
        samples=dict(sorted(samples.items())),
        best_feasible=best_feasible,
        optimizer_trace=best.trace,
        shots=config.shots,
    )


def extract_best_feasible(model, samples):
    """Lowest-cost feasible decode among sampled basis indices, ties broken by order"""
    plans = {}
    for index in sorted(samples):
        plan = decode(model, bits_of(index, model.num_variables))
        if not isinstance(plan, Infeasible):
            plans[plan.order] = plan

    best = None
    for order in sorted(plans):
        plan = plans[order]
        if best is None or plan.total_cost < best.total_cost - COST_TOLERANCE:
            best = plan
    return best


def top_k(model, samples, shots, k=10):
    """Most frequent samples with their empirical probability and decoded order"""
    ranked = sorted(samples.items(), key=lambda item: (-item[1], item[0]))[:k]
    rows = []
    for index, count in ranked:
        plan = decode(model, bits_of(index, model.num_variables))
        rows.append({
            'bitstring': format_bits(index, model.num_variables),
            'probability': count / shots,
            'order': None if isinstance(plan, Infeasible) else list(plan.order),
        })
    return rows
