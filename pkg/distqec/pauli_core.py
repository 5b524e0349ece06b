# -*- coding: utf-8 -*-
from __future__ import absolute_import
from __future__ import unicode_literals

import logging
import re
from enum import IntEnum
from typing import Any, Dict, Iterable, List, Optional, Sequence, Text, Tuple

import numpy as np


_logger = logging.getLogger(__name__)


class GateEnum(IntEnum):
    """Clifford, reset and measurement primitives understood by the propagation rules.
    """
    H = 1
    CNOT = 2
    R = 3
    MZ = 4
    MX = 5
    BELL_PREP = 6


class InvalidPauliError(ValueError):
    ERROR_MSG = 'Invalid Pauli operator: {0}.'

    def __init__(self, reason):
        # type: (Text) -> None
        self.reason = reason

    def __str__(self):
        return self.ERROR_MSG.format(self.reason)


class NonDeterministicDetectorError(ValueError):
    ERROR_MSG = 'The {0} #{1} declared by instruction #{2} is not deterministic in the noiseless circuit.'

    def __init__(self, index, instruction_index, kind='detector'):
        # type: (int, int, Text) -> None
        self.index = index
        self.instruction_index = instruction_index
        self.kind = kind

    def __str__(self):
        return self.ERROR_MSG.format(self.kind, self.index, self.instruction_index)


_LETTER_TO_BITS = {'X': (True, False), 'Y': (True, True), 'Z': (False, True)}
_TOKEN_PATTERN = re.compile(r'^(?P<letter>[IXYZ])(?P<qubit>\d+)$')


def _phase_exponent(x1, z1, x2, z2):
    # type: (bool, bool, bool, bool) -> int
    """Power of i picked up by the single-qubit product P1 * P2 (Y = iXZ).
    """
    if x1 and z1:
        return int(z2) - int(x2)
    if x1:
        return int(z2) * (2 * int(x2) - 1)
    if z1:
        return int(x2) * (1 - 2 * int(z2))
    return 0


class PauliString(object):
    """A sparse signed Pauli operator over an unbounded qubit register.

    Phases of i are not representable: products that pick up i^k keep the sign +1 for k in {0, 1} and -1 for k in
    {2, 3}.
    """

    def __init__(self, letters=None, sign=1):
        # type: (Optional[Dict[int, Text]], int) -> None
        if sign not in (1, -1):
            raise InvalidPauliError('sign must be +1 or -1, got {0}'.format(sign))
        xs = set()
        zs = set()
        for qubit, letter in (letters or {}).items():
            if qubit < 0:
                raise InvalidPauliError('negative qubit index {0}'.format(qubit))
            if letter == 'I':
                continue
            if letter not in _LETTER_TO_BITS:
                raise InvalidPauliError('unknown letter {0!r} on qubit {1}'.format(letter, qubit))
            has_x, has_z = _LETTER_TO_BITS[letter]
            if has_x:
                xs.add(qubit)
            if has_z:
                zs.add(qubit)
        self._xs = frozenset(xs)
        self._zs = frozenset(zs)
        self._sign = sign

    @classmethod
    def from_bits(cls, xs, zs, sign=1):
        # type: (Iterable[int], Iterable[int], int) -> PauliString
        pauli = cls(sign=sign)
        pauli._xs = frozenset(xs)
        pauli._zs = frozenset(zs)
        return pauli

    @classmethod
    def from_text(cls, text):
        # type: (Text) -> PauliString
        """Parse operators written like "+X0 Z3" or "-Y2"; an empty body or "I" is the identity.
        """
        body = text.strip()
        sign = 1
        if body[:1] in ('+', '-'):
            sign = -1 if body[0] == '-' else 1
            body = body[1:].strip()
        letters = {}  # type: Dict[int, Text]
        for token in body.split():
            if token == 'I':
                continue
            match = _TOKEN_PATTERN.match(token)
            if not match:
                raise InvalidPauliError('cannot parse token {0!r}'.format(token))
            qubit = int(match.group('qubit'))
            if qubit in letters:
                raise InvalidPauliError('qubit {0} appears twice'.format(qubit))
            letters[qubit] = match.group('letter')
        return cls(letters, sign)

    @property
    def sign(self):
        # type: () -> int
        return self._sign

    @property
    def x_support(self):
        # type: () -> frozenset
        return self._xs

    @property
    def z_support(self):
        # type: () -> frozenset
        return self._zs

    @property
    def support(self):
        # type: () -> Tuple[int, ...]
        return tuple(sorted(self._xs | self._zs))

    @property
    def weight(self):
        # type: () -> int
        return len(self._xs | self._zs)

    def letter(self, qubit):
        # type: (int) -> Text
        has_x = qubit in self._xs
        has_z = qubit in self._zs
        if has_x and has_z:
            return 'Y'
        if has_x:
            return 'X'
        if has_z:
            return 'Z'
        return 'I'

    def x_part(self):
        # type: () -> PauliString
        return PauliString.from_bits(self._xs, ())

    def z_part(self):
        # type: () -> PauliString
        return PauliString.from_bits((), self._zs)

    def is_identity(self):
        # type: () -> bool
        return not self._xs and not self._zs

    def commutes(self, other):
        # type: (PauliString) -> bool
        overlap = len(self._xs & other.z_support) + len(self._zs & other.x_support)
        return overlap % 2 == 0

    def __mul__(self, other):
        # type: (PauliString) -> PauliString
        return pauli_multiply(self, other)

    def __eq__(self, other):
        if not isinstance(other, PauliString):
            return NotImplemented
        return self._sign == other.sign and self._xs == other.x_support and self._zs == other.z_support

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __hash__(self):
        return hash((self._sign, self._xs, self._zs))

    def __str__(self):
        body = ' '.join('{0}{1}'.format(self.letter(qubit), qubit) for qubit in self.support) or 'I'
        return '{0}{1}'.format('+' if self._sign == 1 else '-', body)

    def __repr__(self):
        return 'PauliString({0!r})'.format(str(self))


def pauli_multiply(first, second):
    # type: (PauliString, PauliString) -> PauliString
    """Product first * second with the phase reduced to a sign.
    """
    exponent = 0
    for qubit in set(first.support) | set(second.support):
        exponent += _phase_exponent(
            qubit in first.x_support, qubit in first.z_support,
            qubit in second.x_support, qubit in second.z_support,
        )
    sign = first.sign * second.sign
    if exponent % 4 >= 2:
        sign = -sign
    return PauliString.from_bits(first.x_support ^ second.x_support, first.z_support ^ second.z_support, sign)


class PropagatedPauli(object):
    """Result of pushing a Pauli through one gate.

    measurement_flipped is the frame-randomization event of a measurement: the operator anticommuted with the
    measured observable on at least one of the measured qubits, listed in flipped_qubits.
    """

    def __init__(self, pauli, flipped_qubits=()):
        # type: (PauliString, Sequence[int]) -> None
        self.pauli = pauli
        self.flipped_qubits = tuple(flipped_qubits)

    @property
    def measurement_flipped(self):
        # type: () -> bool
        return len(self.flipped_qubits) > 0


_SINGLE_QUBIT_GATES = (GateEnum.H, GateEnum.R, GateEnum.MZ, GateEnum.MX)


def conjugate_through_gate(pauli, gate, targets):
    # type: (PauliString, GateEnum, Sequence[int]) -> PropagatedPauli
    """Propagate a Pauli error that occurred before the gate to just after it.

    Two-qubit gates (CNOT, BELL_PREP) take their targets as consecutive pairs. Resets absorb the qubit's component;
    measurements absorb the component that commutes with the measured observable and report a flip for the other.
    """
    targets = tuple(targets)
    if gate in (GateEnum.CNOT, GateEnum.BELL_PREP) and len(targets) % 2:
        raise InvalidPauliError('{0} needs an even number of targets, got {1}'.format(gate.name, len(targets)))

    xs = set(pauli.x_support)
    zs = set(pauli.z_support)
    sign = pauli.sign
    flipped = []  # type: List[int]

    def apply_h(qubit):
        if qubit in xs and qubit in zs:
            return -1
        has_x = qubit in xs
        has_z = qubit in zs
        xs.discard(qubit)
        zs.discard(qubit)
        if has_z:
            xs.add(qubit)
        if has_x:
            zs.add(qubit)
        return 1

    def apply_cnot(control, target):
        x_c, z_c, x_t, z_t = control in xs, control in zs, target in xs, target in zs
        phase = -1 if (x_c and z_t and not (x_t ^ z_c)) else 1
        if x_c:
            xs.symmetric_difference_update({target})
        if z_t:
            zs.symmetric_difference_update({control})
        return phase

    if gate in _SINGLE_QUBIT_GATES:
        for qubit in targets:
            if gate == GateEnum.H:
                sign *= apply_h(qubit)
            elif gate == GateEnum.R:
                xs.discard(qubit)
                zs.discard(qubit)
            elif gate == GateEnum.MZ:
                if qubit in xs:
                    flipped.append(qubit)
                zs.discard(qubit)
            else:
                if qubit in zs:
                    flipped.append(qubit)
                xs.discard(qubit)
    else:
        for control, target in zip(targets[::2], targets[1::2]):
            if control == target:
                raise InvalidPauliError('{0} on qubit {1} with itself'.format(gate.name, control))
            if gate == GateEnum.BELL_PREP:
                sign *= apply_h(control)
            sign *= apply_cnot(control, target)

    return PropagatedPauli(PauliString.from_bits(xs, zs, sign), flipped)


def _phase_exponents(x1, z1, x2, z2):
    # type: (np.ndarray, np.ndarray, np.ndarray, np.ndarray) -> np.ndarray
    x1, z1, x2, z2 = (np.asarray(bits, dtype=np.int8) for bits in (x1, z1, x2, z2))
    return (x1 * z1 * (z2 - x2)
            + x1 * (1 - z1) * z2 * (2 * x2 - 1)
            + (1 - x1) * z1 * x2 * (1 - 2 * z2))


class Tableau(object):
    """Aaronson-Gottesman stabilizer tableau with symbolic signs.

    Row i < n is the i-th destabilizer, row n + i the i-th stabilizer. Each row's sign is an affine function over
    GF(2) of the random measurement outcomes drawn so far: column 0 is the constant term, column k the k-th random
    outcome. The reference record picks 0 for every random outcome; a value whose variable part is empty is
    deterministic.
    """

    _INITIAL_VARIABLE_COLUMNS = 64

    def __init__(self, num_qubits):
        # type: (int) -> None
        self.num_qubits = num_qubits
        indices = np.arange(num_qubits)
        self._x = np.zeros((2 * num_qubits, num_qubits), dtype=np.bool_)
        self._z = np.zeros((2 * num_qubits, num_qubits), dtype=np.bool_)
        self._x[indices, indices] = True
        self._z[num_qubits + indices, indices] = True
        self._signs = np.zeros((2 * num_qubits, self._INITIAL_VARIABLE_COLUMNS), dtype=np.bool_)
        self._num_variables = 0

    @property
    def num_variables(self):
        # type: () -> int
        return self._num_variables

    def _new_variable(self):
        # type: () -> int
        self._num_variables += 1
        column = self._num_variables
        if column >= self._signs.shape[1]:
            grown = np.zeros((self._signs.shape[0], 2 * self._signs.shape[1]), dtype=np.bool_)
            grown[:, :self._signs.shape[1]] = self._signs
            self._signs = grown
        return column

    @staticmethod
    def _bits_to_int(bits):
        # type: (np.ndarray) -> int
        value = 0
        for column in np.flatnonzero(bits):
            value |= 1 << int(column)
        return value

    def _int_to_bits(self, value):
        # type: (int) -> np.ndarray
        bits = np.zeros(self._signs.shape[1], dtype=np.bool_)
        column = 0
        while value:
            if value & 1:
                bits[column] = True
            value >>= 1
            column += 1
        return bits

    def _rowsum(self, rows, source):
        # type: (np.ndarray, int) -> None
        """Replace each row in rows by the product of the source row with it.
        """
        exponents = _phase_exponents(self._x[source], self._z[source], self._x[rows], self._z[rows]).sum(axis=-1)
        self._signs[rows] ^= self._signs[source]
        self._signs[rows, 0] ^= (exponents % 4) >= 2
        self._x[rows] ^= self._x[source]
        self._z[rows] ^= self._z[source]

    def h(self, qubit):
        # type: (int) -> None
        self._signs[:, 0] ^= self._x[:, qubit] & self._z[:, qubit]
        x_column = self._x[:, qubit].copy()
        self._x[:, qubit] = self._z[:, qubit]
        self._z[:, qubit] = x_column

    def cnot(self, control, target):
        # type: (int, int) -> None
        x_c, z_c = self._x[:, control], self._z[:, control]
        x_t, z_t = self._x[:, target], self._z[:, target]
        self._signs[:, 0] ^= x_c & z_t & ~(x_t ^ z_c)
        self._x[:, target] ^= self._x[:, control]
        self._z[:, control] ^= self._z[:, target]

    def bell_prep(self, first, second):
        # type: (int, int) -> None
        self.h(first)
        self.cnot(first, second)

    def apply_pauli(self, pauli):
        # type: (PauliString) -> None
        for qubit in pauli.x_support:
            self._signs[:, 0] ^= self._z[:, qubit]
        for qubit in pauli.z_support:
            self._signs[:, 0] ^= self._x[:, qubit]

    def measure_z(self, qubit):
        # type: (int) -> Tuple[int, bool]
        """Measure Z on the qubit and return the outcome as an affine bitset together with its randomness.
        """
        n = self.num_qubits
        anticommuting = np.flatnonzero(self._x[n:, qubit])
        if anticommuting.size:
            pivot = n + int(anticommuting[0])
            others = np.flatnonzero(self._x[:, qubit])
            others = others[others != pivot]
            if others.size:
                self._rowsum(others, pivot)
            variable = self._new_variable()
            self._x[pivot - n] = self._x[pivot]
            self._z[pivot - n] = self._z[pivot]
            self._signs[pivot - n] = self._signs[pivot]
            self._x[pivot] = False
            self._z[pivot] = False
            self._z[pivot, qubit] = True
            self._signs[pivot] = False
            self._signs[pivot, variable] = True
            return 1 << variable, True

        scratch_x = np.zeros(n, dtype=np.bool_)
        scratch_z = np.zeros(n, dtype=np.bool_)
        scratch_signs = np.zeros(self._signs.shape[1], dtype=np.bool_)
        for destabilizer in np.flatnonzero(self._x[:n, qubit]):
            row = n + int(destabilizer)
            exponent = int(_phase_exponents(self._x[row], self._z[row], scratch_x, scratch_z).sum())
            scratch_signs ^= self._signs[row]
            if exponent % 4 >= 2:
                scratch_signs[0] ^= True
            scratch_x ^= self._x[row]
            scratch_z ^= self._z[row]
        return self._bits_to_int(scratch_signs), False

    def measure_x(self, qubit):
        # type: (int) -> Tuple[int, bool]
        self.h(qubit)
        outcome = self.measure_z(qubit)
        self.h(qubit)
        return outcome

    def reset(self, qubit):
        # type: (int) -> None
        outcome, _ = self.measure_z(qubit)
        if outcome:
            # Conditional X on the outcome flips every row anticommuting with X
            flips = self._int_to_bits(outcome)
            rows = np.flatnonzero(self._z[:, qubit])
            self._signs[rows] ^= flips

    def stabilizers(self):
        # type: () -> List[PauliString]
        """Current stabilizer generators with the reference choice of their signs.
        """
        n = self.num_qubits
        generators = []
        for row in range(n, 2 * n):
            sign = -1 if self._signs[row, 0] else 1
            generators.append(PauliString.from_bits(
                (int(q) for q in np.flatnonzero(self._x[row])), (int(q) for q in np.flatnonzero(self._z[row])), sign,
            ))
        return generators


class ReferenceSample(object):
    """Noiseless run of a circuit: measurement record, detector and observable values.
    """

    def __init__(self, measurements, random_measurements, detectors, observables):
        # type: (np.ndarray, np.ndarray, np.ndarray, np.ndarray) -> None
        self.measurements = measurements
        self.random_measurements = random_measurements
        self.detectors = detectors
        self.observables = observables


def tableau_reference(circuit, injections=None):
    # type: (...) -> ReferenceSample
    """Run a circuit through the tableau, ignoring its noise annotations.

    injections maps an instruction index to a Pauli applied right before that instruction; it is the oracle used to
    check single-error symptoms. Raises NonDeterministicDetectorError when a detector or observable depends on a
    random outcome.
    """
    from distqec.circuit_ir import InstructionKindEnum

    tableau = Tableau(circuit.num_qubits)
    record = []  # type: List[int]
    random_flags = []  # type: List[bool]
    detectors = []  # type: List[bool]
    observables = [0] * circuit.num_observables
    observable_sources = [0] * circuit.num_observables
    injections = injections or {}

    for index, instruction in enumerate(circuit.instructions):
        if index in injections:
            tableau.apply_pauli(injections[index])
        kind = instruction.kind
        targets = instruction.targets
        if kind == InstructionKindEnum.H:
            for qubit in targets:
                tableau.h(qubit)
        elif kind == InstructionKindEnum.CNOT:
            for control, target in zip(targets[::2], targets[1::2]):
                tableau.cnot(control, target)
        elif kind == InstructionKindEnum.BELL_PREP:
            for first, second in zip(targets[::2], targets[1::2]):
                tableau.bell_prep(first, second)
        elif kind == InstructionKindEnum.R:
            for qubit in targets:
                tableau.reset(qubit)
        elif kind in (InstructionKindEnum.MZ, InstructionKindEnum.MX):
            measure = tableau.measure_z if kind == InstructionKindEnum.MZ else tableau.measure_x
            for qubit in targets:
                outcome, is_random = measure(qubit)
                record.append(outcome)
                random_flags.append(is_random)
        elif kind == InstructionKindEnum.DETECTOR:
            value = 0
            for measurement in targets:
                value ^= record[measurement]
            if value >> 1:
                raise NonDeterministicDetectorError(len(detectors), index)
            detectors.append(bool(value & 1))
        elif kind == InstructionKindEnum.OBSERVABLE_INCLUDE:
            for measurement in targets:
                observables[instruction.observable] ^= record[measurement]
            observable_sources[instruction.observable] = index

    for observable_index, value in enumerate(observables):
        if value >> 1:
            raise NonDeterministicDetectorError(observable_index, observable_sources[observable_index], 'observable')

    _logger.debug('Reference sample: %d measurements (%d random), %d detectors',
                  len(record), sum(random_flags), len(detectors))
    return ReferenceSample(
        measurements=np.array([bool(value & 1) for value in record], dtype=np.bool_),
        random_measurements=np.array(random_flags, dtype=np.bool_),
        detectors=np.array(detectors, dtype=np.bool_),
        observables=np.array([bool(value & 1) for value in observables], dtype=np.bool_),
    )


_WORD_BITS = 64
_ALL_ONES = np.iinfo(np.uint64).max


def bernoulli_words(rng, probability, num_words):
    # type: (np.random.Generator, float, int) -> np.ndarray
    """num_words packed words whose bits are independently set with the given probability.
    """
    if probability <= 0:
        return np.zeros(num_words, dtype=np.uint64)
    bits = rng.random(num_words * _WORD_BITS) < probability
    return np.packbits(bits, bitorder='little').view(np.uint64)


def unpack_words(words, num_shots):
    # type: (np.ndarray, int) -> np.ndarray
    """Bool array of the first num_shots bits of packed words, shot index along the last axis.
    """
    words = np.ascontiguousarray(words, dtype=np.uint64)
    bits = np.unpackbits(words.view(np.uint8), axis=-1, bitorder='little')
    return bits[..., :num_shots].astype(np.bool_)


class PauliFrame(object):
    """Bit-packed Pauli frames for a batch of shots, 64 shots per uint64 word.

    Every gate takes a qubit index or an index array; paired gates take equally long arrays of distinct qubits.
    With an rng, the frame is gauge-randomized after resets, Bell preparations and measurements so that random
    measurement outcomes are sampled faithfully; without one, an all-zero frame stays all-zero.
    """

    def __init__(self, num_qubits, num_shots, rng=None):
        # type: (int, int, Optional[np.random.Generator]) -> None
        self.num_qubits = num_qubits
        self.num_shots = num_shots
        self.num_words = (num_shots + _WORD_BITS - 1) // _WORD_BITS
        self.x = np.zeros((num_qubits, self.num_words), dtype=np.uint64)
        self.z = np.zeros((num_qubits, self.num_words), dtype=np.uint64)
        self._rng = rng

    def _random_words(self, shape):
        # type: (Tuple[int, ...]) -> np.ndarray
        return self._rng.integers(0, _ALL_ONES, size=shape, dtype=np.uint64, endpoint=True)

    def h(self, qubits):
        # type: (Any) -> None
        x_rows = self.x[qubits].copy()
        self.x[qubits] = self.z[qubits]
        self.z[qubits] = x_rows

    def cnot(self, controls, targets):
        # type: (Any, Any) -> None
        self.x[targets] ^= self.x[controls]
        self.z[controls] ^= self.z[targets]

    def reset(self, qubits):
        # type: (Any) -> None
        self.x[qubits] = 0
        if self._rng is not None:
            self.z[qubits] = self._random_words(self.z[qubits].shape)
        else:
            self.z[qubits] = 0

    def bell_prep(self, firsts, seconds):
        # type: (Any, Any) -> None
        self.h(firsts)
        self.cnot(firsts, seconds)
        if self._rng is not None:
            shape = self.x[firsts].shape
            xx = self._random_words(shape)
            zz = self._random_words(shape)
            self.x[firsts] ^= xx
            self.x[seconds] ^= xx
            self.z[firsts] ^= zz
            self.z[seconds] ^= zz

    def measure_z(self, qubits):
        # type: (Any) -> np.ndarray
        """Flip words of the measured outcomes: the X component of the frame.
        """
        flips = self.x[qubits].copy()
        if self._rng is not None:
            self.z[qubits] ^= self._random_words(flips.shape)
        return flips

    def measure_x(self, qubits):
        # type: (Any) -> np.ndarray
        flips = self.z[qubits].copy()
        if self._rng is not None:
            self.x[qubits] ^= self._random_words(flips.shape)
        return flips

    def apply_pauli_mask(self, qubits, x_mask, z_mask):
        # type: (Any, np.ndarray, np.ndarray) -> None
        self.x[qubits] ^= x_mask
        self.z[qubits] ^= z_mask

    def is_zero(self):
        # type: () -> bool
        return not self.x.any() and not self.z.any()
