# -*- coding: utf-8 -*-
from __future__ import absolute_import
from __future__ import unicode_literals

import logging
from functools import reduce
from typing import Dict, List, Optional, Sequence, Text, Tuple

import numpy as np

from distqec.pauli_core import PauliString


_logger = logging.getLogger(__name__)


NORM_TOLERANCE = 1e-12
OPERATOR_TOLERANCE = 1e-10
# Branches whose probability falls below this are reported without a post-measurement state
MIN_BRANCH_PROBABILITY = 1e-14

PAULI_MATRICES = {
    'I': np.eye(2, dtype=complex),
    'X': np.array([[0, 1], [1, 0]], dtype=complex),
    'Y': np.array([[0, -1j], [1j, 0]], dtype=complex),
    'Z': np.array([[1, 0], [0, -1]], dtype=complex),
}
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PHASE = np.array([[1, 0], [0, 1j]], dtype=complex)
CNOT_MATRIX = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


class InvalidOperatorError(ValueError):
    ERROR_MSG = 'Operator on qubits {0} is not a Hermitian unitary: {1}.'

    def __init__(self, qubits, reason):
        # type: (Sequence[int], Text) -> None
        self.qubits = tuple(qubits)
        self.reason = reason

    def __str__(self):
        return self.ERROR_MSG.format(list(self.qubits), self.reason)


def kron_all(matrices):
    # type: (Sequence[np.ndarray]) -> np.ndarray
    return reduce(np.kron, matrices, np.eye(1, dtype=complex))


def _apply_matrix(tensor, matrix, axes):
    # type: (np.ndarray, np.ndarray, Sequence[int]) -> np.ndarray
    count = len(axes)
    gate = matrix.reshape((2,) * (2 * count))
    result = np.tensordot(gate, tensor, axes=(list(range(count, 2 * count)), list(axes)))
    return np.moveaxis(result, list(range(count)), list(axes))


class LocalOperator(object):
    """A Hermitian unitary acting on a few qubits of a register, as a dense matrix.

    The first listed qubit is the most significant index of the matrix.
    """

    def __init__(self, matrix, qubits):
        # type: (np.ndarray, Sequence[int]) -> None
        matrix = np.asarray(matrix, dtype=complex)
        qubits = tuple(int(qubit) for qubit in qubits)
        dimension = 2 ** len(qubits)
        if len(set(qubits)) != len(qubits):
            raise InvalidOperatorError(qubits, 'repeated qubit')
        if matrix.shape != (dimension, dimension):
            raise InvalidOperatorError(qubits, 'expected a {0}x{0} matrix, got shape {1}'.format(
                dimension, matrix.shape))
        if not np.allclose(matrix, matrix.conj().T, atol=OPERATOR_TOLERANCE):
            raise InvalidOperatorError(qubits, 'not Hermitian')
        if not np.allclose(matrix.dot(matrix.conj().T), np.eye(dimension), atol=OPERATOR_TOLERANCE):
            raise InvalidOperatorError(qubits, 'not unitary')
        self.matrix = matrix
        self.qubits = qubits

    @classmethod
    def from_pauli(cls, pauli):
        # type: (PauliString) -> LocalOperator
        qubits = pauli.support
        if not qubits:
            raise InvalidOperatorError((), 'identity has no support')
        matrix = kron_all([PAULI_MATRICES[pauli.letter(qubit)] for qubit in qubits]) * pauli.sign
        return cls(matrix, qubits)

    def tensor(self, other):
        # type: (LocalOperator) -> LocalOperator
        if set(self.qubits) & set(other.qubits):
            raise InvalidOperatorError(self.qubits + other.qubits, 'factors overlap')
        return LocalOperator(np.kron(self.matrix, other.matrix), self.qubits + other.qubits)


class DenseState(object):
    """State vector of n qubits; qubit 0 is the most significant bit of the amplitude index.
    """

    def __init__(self, amplitudes):
        # type: (np.ndarray) -> None
        amplitudes = np.asarray(amplitudes, dtype=complex).ravel()
        num_qubits = int(round(np.log2(amplitudes.size))) if amplitudes.size else -1
        if num_qubits < 0 or 2 ** num_qubits != amplitudes.size:
            raise ValueError('State vector length {0} is not a power of two'.format(amplitudes.size))
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1.0) > NORM_TOLERANCE * max(1, amplitudes.size):
            raise ValueError('State vector has norm {0!r}, expected 1'.format(norm))
        self.num_qubits = num_qubits
        self._tensor = amplitudes.reshape((2,) * num_qubits)

    @classmethod
    def from_bits(cls, bits):
        # type: (Text) -> DenseState
        """Computational basis state, e.g. "0110".
        """
        amplitudes = np.zeros(2 ** len(bits), dtype=complex)
        amplitudes[int(bits, 2) if bits else 0] = 1.0
        return cls(amplitudes)

    @classmethod
    def plus(cls, num_qubits):
        # type: (int) -> DenseState
        return cls(np.full(2 ** num_qubits, 2 ** (-num_qubits / 2.0), dtype=complex))

    @property
    def amplitudes(self):
        # type: () -> np.ndarray
        return self._tensor.reshape(-1).copy()

    def norm(self):
        # type: () -> float
        return float(np.linalg.norm(self._tensor))

    def copy(self):
        # type: () -> DenseState
        return DenseState(self.amplitudes)

    def apply(self, matrix, qubits):
        # type: (np.ndarray, Sequence[int]) -> DenseState
        self._tensor = _apply_matrix(self._tensor, np.asarray(matrix, dtype=complex), qubits)
        return self

    def apply_operator(self, operator):
        # type: (LocalOperator) -> DenseState
        return self.apply(operator.matrix, operator.qubits)

    def h(self, qubit):
        # type: (int) -> DenseState
        return self.apply(HADAMARD, (qubit,))

    def s(self, qubit):
        # type: (int) -> DenseState
        return self.apply(PHASE, (qubit,))

    def cnot(self, control, target):
        # type: (int, int) -> DenseState
        return self.apply(CNOT_MATRIX, (control, target))

    def apply_pauli(self, pauli):
        # type: (PauliString) -> DenseState
        if pauli.is_identity():
            if pauli.sign == -1:
                self._tensor = -self._tensor
            return self
        return self.apply_operator(LocalOperator.from_pauli(pauli))

    def controlled(self, control, matrix, qubits):
        # type: (int, np.ndarray, Sequence[int]) -> DenseState
        """Apply matrix to qubits on the branch where control is 1.
        """
        if control in qubits:
            raise ValueError('Control qubit {0} is also a target'.format(control))
        index = [slice(None)] * self.num_qubits
        index[control] = 1
        branch = self._tensor[tuple(index)]
        axes = [qubit if qubit < control else qubit - 1 for qubit in qubits]
        self._tensor = self._tensor.copy()
        self._tensor[tuple(index)] = _apply_matrix(branch, np.asarray(matrix, dtype=complex), axes)
        return self

    def tensor(self, other):
        # type: (DenseState) -> DenseState
        """This state followed by the qubits of other.
        """
        return DenseState(np.kron(self.amplitudes, other.amplitudes))

    def inner(self, other):
        # type: (DenseState) -> complex
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other):
        # type: (DenseState) -> float
        return abs(self.inner(other)) ** 2

    def project_z(self, qubit, outcome):
        # type: (int, int) -> Tuple[float, Optional[np.ndarray]]
        """Probability of a Z outcome on one qubit and the unnormalized branch with that qubit removed.
        """
        index = [slice(None)] * self.num_qubits
        index[qubit] = outcome
        branch = self._tensor[tuple(index)]
        return float(np.vdot(branch, branch).real), branch


def _normalized(vector):
    # type: (np.ndarray) -> Optional[DenseState]
    norm = np.linalg.norm(vector)
    if norm ** 2 < MIN_BRANCH_PROBABILITY:
        return None
    return DenseState(vector.ravel() / norm)


class MeasurementBranch(object):
    """Probability of one measurement result and the normalized state it leaves, if it can happen.
    """

    def __init__(self, probability, state):
        # type: (float, Optional[DenseState]) -> None
        self.probability = probability
        self.state = state


class TeleportedMeasurement(object):
    """Outcome of a teleported parity measurement: branches keyed by the XOR of the two ancilla bits.
    """

    def __init__(self, branches, outcome_probabilities):
        # type: (Dict[int, MeasurementBranch], Dict[Tuple[int, int], float]) -> None
        self.branches = branches
        self.outcome_probabilities = outcome_probabilities

    def bit_marginal(self, half):
        # type: (int) -> float
        """Probability that the given ancilla (0 or 1) reads 1.
        """
        return sum(probability for bits, probability in self.outcome_probabilities.items() if bits[half] == 1)


def projective_measure(operator, state):
    # type: (LocalOperator, DenseState) -> Dict[int, MeasurementBranch]
    """Direct measurement of a Hermitian unitary: outcome 0 projects with (I + O)/2, outcome 1 with (I - O)/2.
    """
    flipped = state.copy().apply_operator(operator).amplitudes
    original = state.amplitudes
    branches = {}
    for outcome, sign in ((0, 1.0), (1, -1.0)):
        projected = (original + sign * flipped) / 2.0
        probability = float(np.vdot(projected, projected).real)
        branches[outcome] = MeasurementBranch(probability, _normalized(projected))
    return branches


def teleported_measure(operator_a, operator_b, state, bell_unitary=None):
    # type: (LocalOperator, LocalOperator, DenseState, Optional[np.ndarray]) -> TeleportedMeasurement
    """Measure O_A (x) O_B through a Bell pair whose halves control O_A and O_B, then read both halves in X.

    With bell_unitary U, the pair is prepared as (I (x) U)|Phi+> and U^dagger is applied to the second half before it
    acts as a control.
    """
    if set(operator_a.qubits) & set(operator_b.qubits):
        raise InvalidOperatorError(operator_a.qubits + operator_b.qubits, 'O_A and O_B overlap')
    num_system = state.num_qubits
    for qubit in operator_a.qubits + operator_b.qubits:
        if qubit >= num_system:
            raise InvalidOperatorError(operator_a.qubits + operator_b.qubits,
                                       'qubit {0} outside a {1}-qubit state'.format(qubit, num_system))
    half_a, half_b = num_system, num_system + 1

    extended = state.tensor(DenseState.from_bits('00'))
    extended.h(half_a).cnot(half_a, half_b)
    if bell_unitary is not None:
        unitary = np.asarray(bell_unitary, dtype=complex)
        if not np.allclose(unitary.dot(unitary.conj().T), np.eye(2), atol=OPERATOR_TOLERANCE):
            raise InvalidOperatorError((half_b,), 'Bell-pair unitary is not unitary')
        extended.apply(unitary, (half_b,))
        extended.apply(unitary.conj().T, (half_b,))
    extended.controlled(half_a, operator_a.matrix, operator_a.qubits)
    extended.controlled(half_b, operator_b.matrix, operator_b.qubits)
    extended.h(half_a).h(half_b)

    outcome_probabilities = {}  # type: Dict[Tuple[int, int], float]
    branch_vectors = {0: [], 1: []}  # type: Dict[int, List[np.ndarray]]
    for bit_a in (0, 1):
        probability_a, after_a = extended.project_z(half_a, bit_a)
        for bit_b in (0, 1):
            # half_b is the last axis once half_a is removed
            branch = after_a[..., bit_b]
            outcome_probabilities[(bit_a, bit_b)] = float(np.vdot(branch, branch).real)
            branch_vectors[bit_a ^ bit_b].append(branch)

    branches = {}
    for parity, vectors in branch_vectors.items():
        probability = sum(float(np.vdot(vector, vector).real) for vector in vectors)
        heaviest = max(vectors, key=lambda vector: float(np.vdot(vector, vector).real))
        branches[parity] = MeasurementBranch(probability, _normalized(heaviest))
    _logger.debug('Teleported measurement on %d system qubits: P(xor=1)=%.6f', num_system, branches[1].probability)
    return TeleportedMeasurement(branches, outcome_probabilities)


def random_dense_state(num_qubits, rng):
    # type: (int, np.random.Generator) -> DenseState
    vector = rng.normal(size=2 ** num_qubits) + 1j * rng.normal(size=2 ** num_qubits)
    return DenseState(vector / np.linalg.norm(vector))


def random_stabilizer_state(num_qubits, rng, depth=None):
    # type: (int, np.random.Generator, Optional[int]) -> DenseState
    """|0...0> scrambled by a random H, S and CNOT circuit.
    """
    state = DenseState.from_bits('0' * num_qubits)
    depth = depth if depth is not None else 4 * num_qubits * num_qubits + 4
    for _ in range(depth):
        choice = rng.integers(0, 3) if num_qubits > 1 else rng.integers(0, 2)
        if choice == 0:
            state.h(int(rng.integers(0, num_qubits)))
        elif choice == 1:
            state.s(int(rng.integers(0, num_qubits)))
        else:
            control, target = rng.choice(num_qubits, size=2, replace=False)
            state.cnot(int(control), int(target))
    return state


def random_pauli_operator(qubits, rng):
    # type: (Sequence[int], np.random.Generator) -> LocalOperator
    """Random signed Pauli product with a non-identity letter on every listed qubit.
    """
    letters = {qubit: 'XYZ'[int(rng.integers(0, 3))] for qubit in qubits}
    sign = 1 if rng.integers(0, 2) == 0 else -1
    return LocalOperator.from_pauli(PauliString(letters, sign))
