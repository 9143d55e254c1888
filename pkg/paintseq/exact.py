"""
Exact Solvers
Enumeration oracles for the sequencing objective and the QUBO, plus the repair-rate sweep
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import permutations

import numpy as np
import pandas as pd

from paintseq.errors import CapacityError, ConfigurationError
from paintseq.models import COST_TOLERANCE, ensure_valid, sequence_cost

logger = logging.getLogger(__name__)

DEFAULT_ENUMERATION_CAP = 10
DEFAULT_QUBO_MAX_BITS = 16

SWEEP_COLUMNS = ['repair_rate', 'total_cost', 'changeover_cost', 'repair_cost',
                 'changeover_count', 'order']


@dataclass(frozen=True)
class SweepRecord:
    repair_rate: float
    optimal_order: tuple
    total_cost: float
    changeover_cost: float
    repair_cost: float
    changeover_count: int


def solve_exact(instance, cap=DEFAULT_ENUMERATION_CAP):
    """
    Global minimum over all n! orders

    Orders are generated lexicographically and the running best is only
    replaced by a strictly cheaper order, so ties keep the smallest order.
    """
    ensure_valid(instance)
    if instance.n > cap:
        raise CapacityError(
            f'{instance.n} vehicles exceed the enumeration cap of {cap}; use run-qaoa instead'
        )
    best = None
    for order in permutations(sorted(instance.ids)):
        plan = sequence_cost(instance, order)
        if best is None or plan.total_cost < best.total_cost - COST_TOLERANCE:
            best = plan
    logger.info('Exact optimum %s: total %.6f (%d changeovers)',
                '-'.join(map(str, best.order)), best.total_cost, best.changeover_count)
    return best


def solve_qubo_exhaustive(model, max_bits=DEFAULT_QUBO_MAX_BITS):
    """
    Scan every bitstring of the model

    Returns:
        (bits, cost) of the minimizer with the lowest basis index among ties
    """
    m = model.num_variables
    if m > max_bits:
        raise CapacityError(f'{m} variables exceed the exhaustive limit of {max_bits}')
    values = model.cost_vector(max_bits=max_bits)
    best_index = int(np.argmax(values <= values.min() + COST_TOLERANCE))
    bits = np.array([(best_index >> k) & 1 for k in range(m)], dtype=np.int64)
    return bits, float(values[best_index])


def sweep_repair_rate(instance, rates, cap=DEFAULT_ENUMERATION_CAP, workers=1):
    """One exact solve per repair rate, results in the order the rates were given"""
    rates = [float(r) for r in rates]
    if not rates:
        raise ConfigurationError('sweep needs at least one repair rate')
    if any(not np.isfinite(r) or r < 0 for r in rates):
        raise ConfigurationError(f'repair rates must be finite and >= 0, got {rates}')

    def solve(rate):
        plan = solve_exact(instance.with_repair_rate(rate), cap=cap)
        return SweepRecord(
            repair_rate=rate,
            optimal_order=plan.order,
            total_cost=plan.total_cost,
            changeover_cost=plan.changeover_cost,
            repair_cost=plan.repair_cost,
            changeover_count=plan.changeover_count,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(solve, rates))
    return [solve(rate) for rate in rates]


def detect_tipping_points(records):
    """Rates at which the optimal changeover count differs from the next lower rate's"""
    records = sorted(records, key=lambda record: record.repair_rate)
    points = []
    for previous, current in zip(records, records[1:]):
        if current.changeover_count != previous.changeover_count:
            points.append({
                'repair_rate': current.repair_rate,
                'from_changeovers': previous.changeover_count,
                'to_changeovers': current.changeover_count,
            })
    return points


def rate_range(start, stop, step):
    """Inclusive arithmetic range of repair rates"""
    if step <= 0 or stop < start:
        raise ConfigurationError(f'invalid rate range {start}..{stop} step {step}')
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 10) for k in range(count)]


def sweep_frame(records):
    return pd.DataFrame({
        'repair_rate': [r.repair_rate for r in records],
        'total_cost': [r.total_cost for r in records],
        'changeover_cost': [r.changeover_cost for r in records],
        'repair_cost': [r.repair_cost for r in records],
        'changeover_count': [r.changeover_count for r in records],
        'order': ['-'.join(map(str, r.optimal_order)) for r in records],
    }, columns=SWEEP_COLUMNS)


def write_sweep_csv(records, path_or_buffer):
    sweep_frame(records).to_csv(path_or_buffer, index=False, float_format='%.6f',
                                lineterminator='\n')


def read_sweep_csv(path_or_buffer):
    frame = pd.read_csv(path_or_buffer, dtype={'order': str})
    return [
        SweepRecord(
            repair_rate=float(row.repair_rate),
            optimal_order=tuple(int(i) for i in str(row.order).split('-')),
            total_cost=float(row.total_cost),
            changeover_cost=float(row.changeover_cost),
            repair_cost=float(row.repair_cost),
            changeover_count=int(row.changeover_count),
        )
        for row in frame.itertuples(index=False)
    ]
