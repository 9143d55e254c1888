"""
QUBO Builder
Compiles a sequencing instance into a penalized quadratic binary objective

Variable layout: vehicle row i (0-based, ascending id) at position t (0-based)
is flat bit k = i * n + t. The pair cost (q_ij * r_cc + p_ij * r_pr) couples
x[j, t-1] and x[i, t], i.e. it applies when vehicle j immediately precedes i.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from types import MappingProxyType
from typing import Mapping

import numpy as np

from paintseq.errors import CapacityError, ConfigurationError, DimensionError, InvalidSequenceError
from paintseq.models import ProblemInstance, ensure_valid, sequence_cost

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Infeasible:
    """Decoded bitstring violating the one-per-row / one-per-column constraints"""
    violations: int

    def __bool__(self):
        return False


@dataclass(frozen=True, eq=False)
class QuboModel:
    instance: ProblemInstance
    penalty: float
    linear: np.ndarray
    quadratic: Mapping[tuple, float]
    constant: float

    @property
    def n(self):
        return self.instance.n

    @property
    def num_variables(self):
        return self.n * self.n

    def index(self, vehicle_id, position):
        """Flat bit index of (vehicle id, 1-based position)"""
        return self.instance.positions[vehicle_id] * self.n + (position - 1)

    def location(self, k):
        """Inverse of index(): (vehicle id, 1-based position)"""
        row, column = divmod(int(k), self.n)
        return self.instance.vehicles[row].id, column + 1

    @cached_property
    def _pair_arrays(self):
        keys = sorted(self.quadratic)
        u = np.array([a for a, _ in keys], dtype=np.int64)
        v = np.array([b for _, b in keys], dtype=np.int64)
        c = np.array([self.quadratic[key] for key in keys], dtype=float)
        return u, v, c

    def to_matrix(self):
        """Upper-triangular coefficient matrix with the linear terms on the diagonal"""
        matrix = np.diag(np.asarray(self.linear, dtype=float))
        for (u, v), coeff in self.quadratic.items():
            matrix[u, v] += coeff
        return matrix

    def cost_vector(self, max_bits=26):
        """
        Objective value of every bitstring

        Entry b is the cost of the bitstring whose bit k is (b >> k) & 1.
        Terms are accumulated in the same order as evaluate() so both agree exactly.
        """
        m = self.num_variables
        if m > max_bits:
            raise CapacityError(f'{m} variables exceed the limit of {max_bits} for full enumeration')
        basis = np.arange(1 << m, dtype=np.int64)
        values = np.full(1 << m, float(self.constant))
        for k in range(m):
            values += self.linear[k] * ((basis >> k) & 1).astype(float)
        u, v, c = self._pair_arrays
        for a, b, coeff in zip(u, v, c):
            values += coeff * ((basis >> a) & (basis >> b) & 1).astype(float)
        return values

    def __repr__(self):
        return f'<QuboModel n={self.n} variables={self.num_variables} penalty={self.penalty}>'


def sound_penalty(instance):
    """Smallest round penalty that keeps every infeasible bitstring above every feasible one"""
    weights = instance.pair_costs
    largest = float(weights.max()) if instance.n > 1 else 0.0
    return (instance.n - 1) * largest + 1.0


def build_qubo(instance, penalty=None):
    """
    Expand the penalized objective into linear, quadratic and constant parts

    Args:
        instance: Valid problem instance
        penalty: Constraint weight; None selects sound_penalty(instance)

    Returns:
        QuboModel over n * n binary variables
    """
    ensure_valid(instance)
    if penalty is None:
        penalty = sound_penalty(instance)
    penalty = float(penalty)
    if not np.isfinite(penalty) or penalty < 0:
        raise ConfigurationError(f'penalty must be a finite non-negative number, got {penalty}')
    if penalty == 0:
        logger.warning('Penalty 0 builds a degenerate model without constraint terms')

    n = instance.n
    m = n * n
    weights = instance.pair_costs
    linear = np.zeros(m)
    quadratic = defaultdict(float)
    constant = 0.0

    # Adjacent positions: j at t-1, i at t
    for t in range(1, n):
        for i in range(n):
            for j in range(n):
                if i != j:
                    u, v = j * n + (t - 1), i * n + t
                    quadratic[(min(u, v), max(u, v))] += float(weights[i, j])

    # (sum x - 1)^2 = 1 - sum x + 2 * sum_{a<b} x_a x_b for binary x
    groups = [[i * n + t for t in range(n)] for i in range(n)]
    groups += [[i * n + t for i in range(n)] for t in range(n)]
    for group in groups:
        constant += penalty
        for k in group:
            linear[k] -= penalty
        for a, b in combinations(group, 2):
            quadratic[(a, b)] += 2.0 * penalty

    linear.setflags(write=False)
    model = QuboModel(instance, penalty, linear, MappingProxyType(dict(quadratic)), constant)
    logger.info('Built QUBO: %d variables, %d quadratic terms, penalty %.6g',
                m, len(quadratic), penalty)
    return model


def _as_bits(model, bits):
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if bits.shape[0] != model.num_variables:
        raise DimensionError(
            f'bitstring has {bits.shape[0]} entries, model expects {model.num_variables}'
        )
    if np.any((bits != 0) & (bits != 1)):
        raise DimensionError('bitstring entries must be 0 or 1')
    return bits


def evaluate(model, bits):
    """constant + sum(linear * bit) + sum(quadratic * bit * bit)"""
    bits = _as_bits(model, bits)
    value = float(model.constant)
    for k in range(model.num_variables):
        value += model.linear[k] * float(bits[k])
    u, v, c = model._pair_arrays
    for a, b, coeff in zip(u, v, c):
        value += coeff * (float(bits[a]) * float(bits[b]))
    return value


def decode(model, bits):
    """SequencePlan for a feasible bitstring, otherwise Infeasible with the violated constraint count"""
    bits = _as_bits(model, bits)
    n = model.n
    grid = bits.reshape(n, n)
    row_sums = grid.sum(axis=1)
    column_sums = grid.sum(axis=0)
    violations = int(np.count_nonzero(row_sums != 1) + np.count_nonzero(column_sums != 1))
    if violations:
        return Infeasible(violations)
    rows = np.argmax(grid, axis=0)
    order = tuple(model.instance.vehicles[r].id for r in rows)
    return sequence_cost(model.instance, order)


def encode(model, order):
    """Bitstring with x[i, t] = 1 when vehicle i is painted at position t"""
    order = tuple(int(i) for i in order)
    if len(order) != model.n or sorted(order) != sorted(model.instance.ids):
        raise InvalidSequenceError(f'order {order} is not a permutation of vehicle ids {model.instance.ids}')
    bits = np.zeros(model.num_variables, dtype=np.int64)
    for position, vehicle_id in enumerate(order, start=1):
        bits[model.index(vehicle_id, position)] = 1
    return bits
