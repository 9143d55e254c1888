"""
Problem Model
Vehicles, pairwise cost structure and direct cost evaluation of painting sequences
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from paintseq.errors import InvalidInstanceError, InvalidSequenceError

logger = logging.getLogger(__name__)

COST_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Vehicle:
    id: int
    color: str
    style: str
    metadata: Mapping[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def __repr__(self):
        return f'<Vehicle {self.id} {self.color}/{self.style}>'


@dataclass(frozen=True)
class CostRates:
    changeover_rate: float
    repair_rate: float


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self):
        return f'[{self.code}] {self.message}'


@dataclass(frozen=True)
class RepairModel:
    """
    Repair probabilities keyed by ordered pair (i, j)

    p[(i, j)] is the probability that vehicle i needs repair when it is
    painted immediately after vehicle j. The table is not symmetric.
    """

    table: Mapping[tuple, float]

    def probability(self, current, preceding):
        if current == preceding:
            return 0.0
        return float(self.table.get((current, preceding), 0.0))

    def matrix(self, ids):
        ids = list(ids)
        size = len(ids)
        result = np.zeros((size, size))
        for a, i in enumerate(ids):
            for b, j in enumerate(ids):
                result[a, b] = self.probability(i, j)
        return result

    @classmethod
    def from_matrix(cls, probabilities, ids=None):
        """Build from a dense matrix whose row is the current vehicle and column the preceding one"""
        probabilities = np.asarray(probabilities, dtype=float)
        size = probabilities.shape[0]
        ids = list(ids) if ids is not None else list(range(1, size + 1))
        table = {
            (i, j): float(probabilities[a, b])
            for a, i in enumerate(ids)
            for b, j in enumerate(ids)
            if a != b
        }
        return cls(table)

    @classmethod
    def from_attribute_rules(cls, vehicles, rules, default=None, overrides=None):
        """
        Derive the pair table from (color_i, style_i, color_j, style_j) rules

        Args:
            vehicles: Vehicles of the instance
            rules: Mapping from attribute tuple to probability; vehicle i is
                the current one and j its predecessor
            default: Probability for pairs no rule matches (None leaves them out)
            overrides: Explicit (i, j) entries that take precedence over rules
        """
        table = {}
        for current in vehicles:
            for preceding in vehicles:
                if current.id == preceding.id:
                    continue
                key = (current.color, current.style, preceding.color, preceding.style)
                if key in rules:
                    table[(current.id, preceding.id)] = float(rules[key])
                elif default is not None:
                    table[(current.id, preceding.id)] = float(default)
        if overrides:
            table.update({k: float(v) for k, v in overrides.items()})
        return cls(table)


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    vehicles: tuple
    rates: CostRates
    repair: RepairModel
    changeover: np.ndarray

    @classmethod
    def create(cls, vehicles, rates, repair, changeover=None):
        """Build an instance, deriving the changeover matrix from colors unless one is supplied"""
        vehicles = tuple(sorted(vehicles, key=lambda v: v.id))
        if changeover is None:
            matrix = _color_change_matrix(vehicles)
        else:
            matrix = np.array(changeover, dtype=float)
        matrix.setflags(write=False)
        return cls(tuple(vehicles), rates, repair, matrix)

    @property
    def n(self):
        return len(self.vehicles)

    @property
    def ids(self):
        return tuple(v.id for v in self.vehicles)

    @cached_property
    def positions(self):
        return {v.id: k for k, v in enumerate(self.vehicles)}

    @cached_property
    def repair_matrix(self):
        matrix = self.repair.matrix(self.ids)
        matrix.setflags(write=False)
        return matrix

    @cached_property
    def pair_costs(self):
        """w[i, j] = q_ij * r_cc + p_ij * r_pr with vehicle j immediately before i"""
        weights = (self.changeover * self.rates.changeover_rate
                   + self.repair_matrix * self.rates.repair_rate)
        np.fill_diagonal(weights, 0.0)
        weights.setflags(write=False)
        return weights

    def with_repair_rate(self, repair_rate):
        rates = replace(self.rates, repair_rate=float(repair_rate))
        return ProblemInstance(self.vehicles, rates, self.repair, self.changeover)

    def __repr__(self):
        return f'<ProblemInstance n={self.n} r_cc={self.rates.changeover_rate} r_pr={self.rates.repair_rate}>'


@dataclass(frozen=True)
class SequencePlan:
    order: tuple
    changeover_cost: float
    repair_cost: float
    total_cost: float
    changeover_count: int = 0
    repair_expectation: float = 0.0

    @property
    def sort_key(self):
        return (self.total_cost, self.order)

    def __repr__(self):
        order = '-'.join(str(i) for i in self.order)
        return f'<SequencePlan {order} total={self.total_cost:.6f}>'


def _color_change_matrix(vehicles):
    colors = [v.color for v in vehicles]
    size = len(colors)
    matrix = np.zeros((size, size))
    for a in range(size):
        for b in range(size):
            if colors[a] != colors[b]:
                matrix[a, b] = 1.0
    return matrix


def build_changeover_matrix(vehicles):
    """
    Color changeover matrix q

    q[i, j] is 1 exactly when vehicles i and j have different colors.
    Rows and columns follow ascending vehicle id.
    """
    vehicles = list(vehicles)
    if not vehicles:
        raise InvalidInstanceError([Violation('empty', 'instance has no vehicles')])
    counts = Counter(v.id for v in vehicles)
    duplicates = sorted(i for i, count in counts.items() if count > 1)
    if duplicates:
        raise InvalidInstanceError([
            Violation('duplicate-id', f'vehicle id {i} appears more than once')
            for i in duplicates
        ])
    return _color_change_matrix(sorted(vehicles, key=lambda v: v.id))


def _check_order(instance, order):
    try:
        order = tuple(int(i) for i in order)
    except (TypeError, ValueError) as e:
        raise InvalidSequenceError(f'order {order!r} contains a non-integer vehicle id') from e
    if len(order) != instance.n or sorted(order) != sorted(instance.ids):
        raise InvalidSequenceError(
            f'order {order} is not a permutation of vehicle ids {instance.ids}'
        )
    return order


def sequence_cost(instance, order):
    """
    Cost of painting the vehicles in the given order

    The first vehicle has no predecessor and contributes nothing; every
    later position t adds q * r_cc + p * r_pr for the pair (order[t], order[t-1]).
    """
    order = _check_order(instance, order)
    index = [instance.positions[i] for i in order]
    changes = 0.0
    expectation = 0.0
    for previous, current in zip(index, index[1:]):
        changes += instance.changeover[current, previous]
        expectation += instance.repair_matrix[current, previous]

    changeover_cost = instance.rates.changeover_rate * changes
    repair_cost = instance.rates.repair_rate * expectation
    return SequencePlan(
        order=order,
        changeover_cost=changeover_cost,
        repair_cost=repair_cost,
        total_cost=changeover_cost + repair_cost,
        changeover_count=int(round(changes)),
        repair_expectation=expectation,
    )


def validate_instance(instance):
    """
    Check every instance invariant

    Returns:
        List of Violation records, empty when the instance is valid
    """
    violations = []
    vehicles = instance.vehicles

    if not vehicles:
        return [Violation('empty', 'instance has no vehicles')]

    ids = [v.id for v in vehicles]
    if len(set(ids)) != len(ids):
        duplicates = sorted(i for i, count in Counter(ids).items() if count > 1)
        violations.append(Violation('duplicate-id', f'duplicate vehicle ids {duplicates}'))
    elif sorted(ids) != list(range(1, len(ids) + 1)):
        violations.append(Violation('id-range', f'vehicle ids {sorted(ids)} are not 1..{len(ids)}'))

    for vehicle in vehicles:
        if not str(vehicle.color).strip():
            violations.append(Violation('empty-color', f'vehicle {vehicle.id} has an empty color'))
        if not str(vehicle.style).strip():
            violations.append(Violation('empty-style', f'vehicle {vehicle.id} has an empty style'))

    for name, rate in (('changeover', instance.rates.changeover_rate),
                       ('repair', instance.rates.repair_rate)):
        if not (math.isfinite(rate) and rate >= 0):
            violations.append(Violation('rate', f'{name} rate {rate} must be finite and >= 0'))

    id_set = set(ids)
    for (i, j), p in sorted(instance.repair.table.items()):
        if i not in id_set or j not in id_set or i == j:
            violations.append(Violation('repair-pair', f'repair entry ({i}, {j}) does not name two distinct vehicles'))
        elif not (math.isfinite(p) and 0.0 <= p <= 1.0):
            violations.append(Violation('probability', f'p({i}|{j}) = {p} is outside [0, 1]'))
    for i in sorted(id_set):
        for j in sorted(id_set):
            if i != j and (i, j) not in instance.repair.table:
                violations.append(Violation('missing-probability', f'no repair probability for vehicle {i} after {j}'))

    violations.extend(_check_changeover(instance))
    if violations:
        logger.debug('Instance has %d violation(s)', len(violations))
    return violations


def _check_changeover(instance):
    matrix = instance.changeover
    size = instance.n
    if matrix.shape != (size, size):
        return [Violation('changeover-shape', f'changeover matrix has shape {matrix.shape}, expected {(size, size)}')]

    violations = []
    if not np.array_equal(matrix, matrix.T):
        violations.append(Violation('changeover-symmetry', 'changeover matrix is not symmetric'))
    if np.any(np.diag(matrix) != 0):
        violations.append(Violation('changeover-diagonal', 'changeover matrix has a non-zero diagonal'))
    if violations:
        return violations

    expected = _color_change_matrix(instance.vehicles)
    for a, b in zip(*np.nonzero(matrix != expected)):
        if a < b:
            violations.append(Violation(
                'changeover-color',
                f'q({instance.vehicles[a].id}, {instance.vehicles[b].id}) disagrees with vehicle colors',
            ))
    return violations


def ensure_valid(instance):
    violations = validate_instance(instance)
    if violations:
        raise InvalidInstanceError(violations)
    return instance


def relabel(instance, mapping):
    """Rename vehicle ids consistently across vehicles and the repair table"""
    vehicles = [replace(v, id=mapping[v.id]) for v in instance.vehicles]
    table = {(mapping[i], mapping[j]): p for (i, j), p in instance.repair.table.items()}
    return ProblemInstance.create(vehicles, instance.rates, RepairModel(table))


def make_instance(colors, styles=None, changeover_rate=0.0, repair_rate=0.0,
                  repair_matrix: Optional[Sequence] = None):
    """Compact constructor used by fixtures and tests; vehicle ids are 1..n"""
    styles = styles or ['A'] * len(colors)
    vehicles = [Vehicle(k + 1, c, s) for k, (c, s) in enumerate(zip(colors, styles))]
    if repair_matrix is None:
        repair_matrix = np.zeros((len(colors), len(colors)))
    repair = RepairModel.from_matrix(repair_matrix)
    return ProblemInstance.create(vehicles, CostRates(float(changeover_rate), float(repair_rate)), repair)
