"""
Statevector Simulator
Exact amplitude-vector simulation of the two QAOA operators

Basis index b encodes bit k of the register as (b >> k) & 1, so qubit k is
flat QUBO variable k (least significant bit first).
"""

import logging
from collections import Counter
from dataclasses import dataclass

import numpy as np
import pandas as pd

from paintseq.errors import CapacityError, DimensionError

logger = logging.getLogger(__name__)

DEFAULT_MAX_QUBITS = 26


@dataclass(frozen=True, eq=False)
class Statevector:
    num_qubits: int
    amplitudes: np.ndarray

    @property
    def dimension(self):
        return self.amplitudes.shape[0]

    def probabilities(self):
        return np.abs(self.amplitudes) ** 2

    def norm(self):
        return float(np.sqrt(np.sum(self.probabilities())))

    def __repr__(self):
        return f'<Statevector qubits={self.num_qubits}>'


@dataclass(frozen=True, eq=False)
class DiagonalCost:
    """Cost Hamiltonian as its diagonal: values[b] = C(bits(b))"""
    values: np.ndarray

    @classmethod
    def from_model(cls, model, max_qubits=DEFAULT_MAX_QUBITS):
        check_capacity(model.num_variables, max_qubits)
        values = model.cost_vector(max_bits=max_qubits)
        values.setflags(write=False)
        return cls(values)


def check_capacity(num_qubits, max_qubits=DEFAULT_MAX_QUBITS):
    if num_qubits < 1:
        raise DimensionError(f'a register needs at least one qubit, got {num_qubits}')
    if num_qubits > max_qubits:
        megabytes = (16 << num_qubits) / 2 ** 20
        raise CapacityError(
            f'{num_qubits} qubits need {megabytes:,.0f} MiB of amplitudes; '
            f'the configured limit is {max_qubits} qubits'
        )


def bits_of(basis_index, num_qubits):
    return np.array([(int(basis_index) >> k) & 1 for k in range(num_qubits)], dtype=np.int64)


def basis_index(bits):
    return int(sum(int(bit) << k for k, bit in enumerate(bits)))


def format_bits(basis_index, num_qubits):
    """Bitstring text with variable 0 first"""
    return ''.join(str((int(basis_index) >> k) & 1) for k in range(num_qubits))


def uniform_superposition(num_qubits, max_qubits=DEFAULT_MAX_QUBITS):
    check_capacity(num_qubits, max_qubits)
    size = 1 << num_qubits
    amplitudes = np.full(size, 1.0 / np.sqrt(size), dtype=np.complex128)
    return Statevector(num_qubits, amplitudes)


def basis_state(num_qubits, index, max_qubits=DEFAULT_MAX_QUBITS):
    check_capacity(num_qubits, max_qubits)
    amplitudes = np.zeros(1 << num_qubits, dtype=np.complex128)
    amplitudes[index] = 1.0
    return Statevector(num_qubits, amplitudes)


def _check_dimension(state, costs):
    if costs.values.shape[0] != state.dimension:
        raise DimensionError(
            f'cost table has {costs.values.shape[0]} entries, state has {state.dimension}'
        )


def apply_cost_phase(state, costs, gamma):
    """amplitude[b] *= exp(-i * gamma * C(b))"""
    _check_dimension(state, costs)
    phases = np.exp(-1j * float(gamma) * costs.values)
    return Statevector(state.num_qubits, state.amplitudes * phases)


def apply_mixer(state, beta):
    """
    exp(-i * beta * sum_k X_k) as one rotation per qubit

    Each rotation pairs amplitudes whose indices differ only in bit k.
    """
    amplitudes = state.amplitudes.copy()
    cos_b = np.cos(float(beta))
    sin_b = -1j * np.sin(float(beta))
    for k in range(state.num_qubits):
        view = amplitudes.reshape(-1, 2, 1 << k)
        zero = view[:, 0, :].copy()
        one = view[:, 1, :].copy()
        view[:, 0, :] = cos_b * zero + sin_b * one
        view[:, 1, :] = sin_b * zero + cos_b * one
    return Statevector(state.num_qubits, amplitudes)


def expectation(state, costs):
    """sum_b |amplitude[b]|^2 * C(b)"""
    _check_dimension(state, costs)
    return float(np.dot(state.probabilities(), costs.values))


def sample(state, shots, seed):
    """
    Draw basis states i.i.d. from the measurement distribution

    Returns:
        Counter mapping basis index to the number of times it was drawn
    """
    if shots < 1:
        raise DimensionError(f'shots must be >= 1, got {shots}')
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(state.probabilities())
    draws = np.searchsorted(cdf, rng.random(shots) * cdf[-1], side='right')
    draws = np.minimum(draws, state.dimension - 1)
    return Counter(int(b) for b in draws)


def dump_probabilities_csv(state, path, min_probability=0.0):
    """Write basis_index, bitstring, probability rows for debugging"""
    probabilities = state.probabilities()
    indices = np.nonzero(probabilities > min_probability)[0]
    frame = pd.DataFrame({
        'basis_index': indices,
        'bitstring': [format_bits(b, state.num_qubits) for b in indices],
        'probability': probabilities[indices],
    })
    frame.to_csv(path, index=False, float_format='%.12g')
    logger.debug('Wrote %d probabilities to %s', len(frame), path)
    return len(frame)
