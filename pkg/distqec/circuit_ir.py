# -*- coding: utf-8 -*-
from __future__ import absolute_import
from __future__ import unicode_literals

import itertools
import logging
import re
from collections import OrderedDict
from enum import IntEnum
from typing import Dict, Iterator, List, Optional, Sequence, Text, Tuple

from distqec.pauli_core import GateEnum, InvalidPauliError, PauliString, pauli_multiply


_logger = logging.getLogger(__name__)


CIRCUIT_FORMAT_HEADER = 'DISTQEC_CIRCUIT 1'


class InstructionKindEnum(IntEnum):
    """Instruction kinds of the circuit representation.
    """
    H = 1
    CNOT = 2
    R = 3
    MZ = 4
    MX = 5
    BELL_PREP = 6
    DETECTOR = 7
    OBSERVABLE_INCLUDE = 8
    TICK = 9
    NOISE = 10


class NoiseChannelEnum(IntEnum):
    """Pauli noise channel constants.
    """
    DEPOL1 = 1
    DEPOL2 = 2
    ERRX = 3
    BELL_DEPOL2 = 4


GATE_KINDS = (
    InstructionKindEnum.H, InstructionKindEnum.CNOT, InstructionKindEnum.R,
    InstructionKindEnum.MZ, InstructionKindEnum.MX, InstructionKindEnum.BELL_PREP,
)
PAIR_KINDS = (InstructionKindEnum.CNOT, InstructionKindEnum.BELL_PREP)
MEASUREMENT_KINDS = (InstructionKindEnum.MZ, InstructionKindEnum.MX)

_KIND_TO_GATE = {
    InstructionKindEnum.H: GateEnum.H,
    InstructionKindEnum.CNOT: GateEnum.CNOT,
    InstructionKindEnum.R: GateEnum.R,
    InstructionKindEnum.MZ: GateEnum.MZ,
    InstructionKindEnum.MX: GateEnum.MX,
    InstructionKindEnum.BELL_PREP: GateEnum.BELL_PREP,
}


def gate_for_kind(kind):
    # type: (InstructionKindEnum) -> GateEnum
    return _KIND_TO_GATE[kind]


class InvalidChannelError(ValueError):
    ERROR_MSG = 'Invalid noise channel {0}: {1}.'

    def __init__(self, channel_name, reason):
        # type: (Text, Text) -> None
        self.channel_name = channel_name
        self.reason = reason

    def __str__(self):
        return self.ERROR_MSG.format(self.channel_name, self.reason)


class CircuitFormatError(IOError):
    ERROR_MSG = 'Cannot parse circuit text, line {0}: {1}.'

    def __init__(self, line_number, reason):
        # type: (int, Text) -> None
        self.line_number = line_number
        self.reason = reason

    def __str__(self):
        return self.ERROR_MSG.format(self.line_number, self.reason)


class CircuitDiagnostic(object):
    """The first structural problem found in a circuit.
    """

    def __init__(self, instruction_index, reason):
        # type: (int, Text) -> None
        self.instruction_index = instruction_index
        self.reason = reason

    def __str__(self):
        return 'instruction #{0}: {1}'.format(self.instruction_index, self.reason)


class InvalidCircuitError(ValueError):
    ERROR_MSG = 'Invalid circuit, {0}.'

    def __init__(self, diagnostic):
        # type: (CircuitDiagnostic) -> None
        self.diagnostic = diagnostic

    def __str__(self):
        return self.ERROR_MSG.format(self.diagnostic)


class NoiseChannel(object):
    """A Pauli channel with its total error probability.
    """

    def __init__(self, kind, probability):
        # type: (NoiseChannelEnum, float) -> None
        if not 0.0 <= probability < 1.0:
            raise InvalidChannelError(kind.name, 'probability {0!r} is outside [0, 1)'.format(probability))
        self.kind = kind
        self.probability = float(probability)

    @property
    def arity(self):
        # type: () -> int
        return 1 if self.kind in (NoiseChannelEnum.DEPOL1, NoiseChannelEnum.ERRX) else 2

    def __eq__(self, other):
        if not isinstance(other, NoiseChannel):
            return NotImplemented
        return self.kind == other.kind and self.probability == other.probability

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __hash__(self):
        return hash((self.kind, self.probability))

    def __repr__(self):
        return 'NoiseChannel({0}, {1!r})'.format(self.kind.name, self.probability)


_SINGLE_LETTERS = ('X', 'Y', 'Z')
_PAIR_LETTERS = ('I', 'X', 'Y', 'Z')


def _two_qubit_terms(probability):
    # type: (float) -> List[Tuple[PauliString, float]]
    terms = []
    for first, second in itertools.product(_PAIR_LETTERS, repeat=2):
        if first == 'I' and second == 'I':
            continue
        terms.append((PauliString({0: first, 1: second}), probability / 15.0))
    return terms


def channel_pauli_terms(channel):
    # type: (NoiseChannel) -> List[Tuple[PauliString, float]]
    """Enumerate the (Pauli, probability) terms of a channel on local qubits 0 (and 1).

    The terms are mutually exclusive and their probabilities sum to the channel probability.
    """
    p = channel.probability
    if channel.kind == NoiseChannelEnum.DEPOL1:
        return [(PauliString({0: letter}), p / 3.0) for letter in _SINGLE_LETTERS]
    if channel.kind == NoiseChannelEnum.ERRX:
        return [(PauliString({0: 'X'}), p)]
    if channel.kind in (NoiseChannelEnum.DEPOL2, NoiseChannelEnum.BELL_DEPOL2):
        return _two_qubit_terms(p)
    raise InvalidChannelError(repr(channel.kind), 'unknown channel kind')


_BELL_STABILIZERS = (
    PauliString({0: 'X', 1: 'X'}),
    PauliString({0: 'Z', 1: 'Z'}),
    PauliString({0: 'Y', 1: 'Y'}),
)


def reduce_bell_term(pauli):
    # type: (PauliString) -> PauliString
    """Representative of a two-qubit Pauli modulo the Bell-pair stabilizers XX and ZZ, supported on qubit 0 only.
    """
    candidates = [pauli] + [pauli_multiply(pauli, stabilizer) for stabilizer in _BELL_STABILIZERS]
    for candidate in candidates:
        if 1 not in candidate.support:
            return PauliString.from_bits(candidate.x_support, candidate.z_support)
    raise InvalidPauliError('no single-qubit representative for {0}'.format(pauli))


def bell_reduced_terms(channel):
    # type: (NoiseChannel) -> List[Tuple[PauliString, float]]
    """BELL_DEPOL2 terms grouped by coset of the Bell-pair stabilizer group.

    The identity coset {XX, YY, ZZ} is harmless; each of the cosets of X, Z and Y on the first half carries 4p/15.
    """
    if channel.kind != NoiseChannelEnum.BELL_DEPOL2:
        raise InvalidChannelError(channel.kind.name, 'only BELL_DEPOL2 has a reduced view')
    masses = OrderedDict()  # type: Dict[PauliString, float]
    for pauli, probability in channel_pauli_terms(channel):
        representative = reduce_bell_term(pauli)
        if representative.is_identity():
            continue
        masses[representative] = masses.get(representative, 0.0) + probability
    return list(masses.items())


class Instruction(object):
    """One circuit instruction.

    Gate targets are qubit indices (consecutive pairs for CNOT and BELL_PREP); DETECTOR and OBSERVABLE_INCLUDE
    targets are absolute measurement indices.
    """

    __slots__ = ('kind', 'targets', 'channel', 'coords', 'observable')

    def __init__(self, kind, targets=(), channel=None, coords=None, observable=None):
        # type: (InstructionKindEnum, Sequence[int], Optional[NoiseChannel], Optional[Sequence[int]], Optional[int]) -> None
        self.kind = kind
        self.targets = tuple(int(target) for target in targets)
        self.channel = channel
        self.coords = tuple(coords) if coords is not None else None
        self.observable = observable

    def _key(self):
        return self.kind, self.targets, self.channel, self.coords, self.observable

    def __eq__(self, other):
        if not isinstance(other, Instruction):
            return NotImplemented
        return self._key() == other._key()

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __hash__(self):
        return hash(self._key())

    def to_text(self):
        # type: () -> Text
        targets = ' '.join(str(target) for target in self.targets)
        if self.kind == InstructionKindEnum.NOISE:
            head = '{0} {1!r}'.format(self.channel.kind.name, self.channel.probability)
        elif self.kind == InstructionKindEnum.DETECTOR:
            head = 'DETECTOR({0})'.format(','.join(str(value) for value in self.coords or ()))
        elif self.kind == InstructionKindEnum.OBSERVABLE_INCLUDE:
            head = 'OBSERVABLE_INCLUDE({0})'.format(self.observable)
        else:
            head = self.kind.name
        return '{0} {1}'.format(head, targets) if targets else head

    def __repr__(self):
        return 'Instruction({0!r})'.format(self.to_text())


class NoiseLocation(object):
    """A single noise channel application: the instruction it comes from and the qubits it acts on.
    """

    def __init__(self, instruction_index, channel, qubits):
        # type: (int, NoiseChannel, Tuple[int, ...]) -> None
        self.instruction_index = instruction_index
        self.channel = channel
        self.qubits = qubits


class Circuit(object):
    """An immutable sequence of instructions with tick boundaries.
    """

    def __init__(self, instructions):
        # type: (Sequence[Instruction]) -> None
        self._instructions = tuple(instructions)
        self._init_counts()

    def _init_counts(self):
        # type: () -> None
        max_qubit = -1
        num_measurements = 0
        num_detectors = 0
        num_observables = 0
        num_ticks = 0
        for instruction in self._instructions:
            kind = instruction.kind
            if kind in GATE_KINDS or kind == InstructionKindEnum.NOISE:
                if instruction.targets:
                    max_qubit = max(max_qubit, max(instruction.targets))
                if kind in MEASUREMENT_KINDS:
                    num_measurements += len(instruction.targets)
            elif kind == InstructionKindEnum.DETECTOR:
                num_detectors += 1
            elif kind == InstructionKindEnum.OBSERVABLE_INCLUDE:
                num_observables = max(num_observables, instruction.observable + 1)
            elif kind == InstructionKindEnum.TICK:
                num_ticks += 1
        self.num_qubits = max_qubit + 1
        self.num_measurements = num_measurements
        self.num_detectors = num_detectors
        self.num_observables = num_observables
        self.num_ticks = num_ticks

    @property
    def instructions(self):
        # type: () -> Tuple[Instruction, ...]
        return self._instructions

    def __len__(self):
        return len(self._instructions)

    def __iter__(self):
        # type: () -> Iterator[Instruction]
        return iter(self._instructions)

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return self._instructions == other.instructions

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __hash__(self):
        return hash(self._instructions)

    def detector_coords(self):
        # type: () -> List[Tuple[int, ...]]
        return [instruction.coords for instruction in self._instructions
                if instruction.kind == InstructionKindEnum.DETECTOR]

    def count(self, kind):
        # type: (InstructionKindEnum) -> int
        """Number of operations of a kind; gate pairs count once.
        """
        total = 0
        for instruction in self._instructions:
            if instruction.kind != kind:
                continue
            if kind in GATE_KINDS:
                total += len(instruction.targets) // (2 if kind in PAIR_KINDS else 1)
            else:
                total += 1
        return total

    def without_noise(self):
        # type: () -> Circuit
        return Circuit([instruction for instruction in self._instructions
                        if instruction.kind != InstructionKindEnum.NOISE])

    def noise_locations(self):
        # type: () -> List[NoiseLocation]
        locations = []
        for index, instruction in enumerate(self._instructions):
            if instruction.kind != InstructionKindEnum.NOISE:
                continue
            arity = instruction.channel.arity
            for start in range(0, len(instruction.targets), arity):
                locations.append(NoiseLocation(index, instruction.channel, instruction.targets[start:start + arity]))
        return locations

    def validate(self):
        # type: () -> None
        diagnostic = validate_circuit(self)
        if diagnostic is not None:
            raise InvalidCircuitError(diagnostic)

    def to_text(self):
        # type: () -> Text
        lines = [CIRCUIT_FORMAT_HEADER]
        lines.extend(instruction.to_text() for instruction in self._instructions)
        return '\n'.join(lines) + '\n'

    @classmethod
    def from_text(cls, text):
        # type: (Text) -> Circuit
        lines = text.splitlines()
        if not lines or lines[0].strip() != CIRCUIT_FORMAT_HEADER:
            raise CircuitFormatError(1, 'missing header {0!r}'.format(CIRCUIT_FORMAT_HEADER))
        instructions = []
        for line_number, line in enumerate(lines[1:], start=2):
            stripped = line.split('#', 1)[0].strip()
            if not stripped:
                continue
            instructions.append(_parse_instruction(line_number, stripped))
        return cls(instructions)


_ANNOTATION_PATTERN = re.compile(r'^(?P<name>DETECTOR|OBSERVABLE_INCLUDE)\((?P<args>[^)]*)\)$')


def _parse_int_list(line_number, tokens):
    # type: (int, Sequence[Text]) -> List[int]
    try:
        values = [int(token) for token in tokens]
    except ValueError:
        raise CircuitFormatError(line_number, 'expected integer targets, got {0!r}'.format(' '.join(tokens)))
    if any(value < 0 for value in values):
        raise CircuitFormatError(line_number, 'negative target')
    return values


def _parse_instruction(line_number, line):
    # type: (int, Text) -> Instruction
    tokens = line.split()
    name = tokens[0]
    annotation = _ANNOTATION_PATTERN.match(name)
    if annotation:
        args = [arg for arg in annotation.group('args').split(',') if arg.strip()]
        try:
            values = [int(arg) for arg in args]
        except ValueError:
            raise CircuitFormatError(line_number, 'bad annotation arguments {0!r}'.format(annotation.group('args')))
        targets = _parse_int_list(line_number, tokens[1:])
        if annotation.group('name') == 'DETECTOR':
            return Instruction(InstructionKindEnum.DETECTOR, targets, coords=values)
        if len(values) != 1:
            raise CircuitFormatError(line_number, 'OBSERVABLE_INCLUDE takes exactly one index')
        return Instruction(InstructionKindEnum.OBSERVABLE_INCLUDE, targets, observable=values[0])

    if name in NoiseChannelEnum.__members__:
        if len(tokens) < 2:
            raise CircuitFormatError(line_number, 'missing probability')
        try:
            probability = float(tokens[1])
        except ValueError:
            raise CircuitFormatError(line_number, 'bad probability {0!r}'.format(tokens[1]))
        try:
            channel = NoiseChannel(NoiseChannelEnum[name], probability)
        except InvalidChannelError as e:
            raise CircuitFormatError(line_number, str(e))
        return Instruction(InstructionKindEnum.NOISE, _parse_int_list(line_number, tokens[2:]), channel=channel)

    if name == 'TICK':
        return Instruction(InstructionKindEnum.TICK)
    if name in InstructionKindEnum.__members__ and InstructionKindEnum[name] in GATE_KINDS:
        return Instruction(InstructionKindEnum[name], _parse_int_list(line_number, tokens[1:]))
    raise CircuitFormatError(line_number, 'unknown instruction {0!r}'.format(name))


_FRESH_PREDECESSORS = (None, InstructionKindEnum.R)


def validate_circuit(circuit):
    # type: (Circuit) -> Optional[CircuitDiagnostic]
    """Return the first structural problem of the circuit, or None if it is well formed.

    Checks gate arity, qubit reuse within a tick, detector and observable references to earlier measurements, noise
    arity and BELL_PREP targets, which must be fresh or last reset.
    """
    busy = set()  # type: set
    last_operation = {}  # type: Dict[int, InstructionKindEnum]
    num_measurements = 0
    for index, instruction in enumerate(circuit.instructions):
        kind = instruction.kind
        targets = instruction.targets
        if kind == InstructionKindEnum.TICK:
            busy = set()
            continue

        if kind == InstructionKindEnum.NOISE:
            if len(targets) % instruction.channel.arity:
                return CircuitDiagnostic(index, '{0} acts on {1} qubits at a time, got {2} targets'.format(
                    instruction.channel.kind.name, instruction.channel.arity, len(targets)))
            if instruction.channel.arity == 2:
                for first, second in zip(targets[::2], targets[1::2]):
                    if first == second:
                        return CircuitDiagnostic(index, 'two-qubit noise on qubit {0} with itself'.format(first))
            continue

        if kind in (InstructionKindEnum.DETECTOR, InstructionKindEnum.OBSERVABLE_INCLUDE):
            for measurement in targets:
                if measurement >= num_measurements:
                    return CircuitDiagnostic(index, 'reference to measurement {0} which does not precede it'.format(
                        measurement))
            if kind == InstructionKindEnum.OBSERVABLE_INCLUDE and (instruction.observable is None
                                                                   or instruction.observable < 0):
                return CircuitDiagnostic(index, 'observable index must be non-negative')
            continue

        if not targets:
            return CircuitDiagnostic(index, '{0} without targets'.format(kind.name))
        if kind in PAIR_KINDS:
            if len(targets) % 2:
                return CircuitDiagnostic(index, '{0} needs target pairs, got {1} targets'.format(
                    kind.name, len(targets)))
            for first, second in zip(targets[::2], targets[1::2]):
                if first == second:
                    return CircuitDiagnostic(index, '{0} on qubit {1} with itself'.format(kind.name, first))
        if kind == InstructionKindEnum.BELL_PREP:
            for qubit in targets:
                if last_operation.get(qubit) not in _FRESH_PREDECESSORS:
                    return CircuitDiagnostic(index, 'BELL_PREP target {0} is neither fresh nor reset'.format(
                        qubit))
        for qubit in targets:
            if qubit in busy:
                return CircuitDiagnostic(index, 'qubit {0} is used twice in the same tick'.format(qubit))
            busy.add(qubit)
            last_operation[qubit] = kind
        if kind in MEASUREMENT_KINDS:
            num_measurements += len(targets)
    return None


class CircuitBuilder(object):
    """Tick-aware instruction emitter used by the patch builders.

    Noise channels with probability 0 are never emitted.
    """

    def __init__(self):
        # type: () -> None
        self._instructions = []  # type: List[Instruction]
        self._num_measurements = 0
        self._touched = set()  # type: set

    @property
    def num_measurements(self):
        # type: () -> int
        return self._num_measurements

    @property
    def touched_qubits(self):
        # type: () -> frozenset
        """Qubits operated on since the last tick.
        """
        return frozenset(self._touched)

    def gate(self, kind, targets):
        # type: (InstructionKindEnum, Sequence[int]) -> None
        if not targets:
            return
        self._instructions.append(Instruction(kind, targets))
        self._touched.update(targets)

    def noise(self, channel_kind, probability, targets):
        # type: (NoiseChannelEnum, float, Sequence[int]) -> None
        if probability <= 0 or not targets:
            return
        self._instructions.append(Instruction(InstructionKindEnum.NOISE, targets,
                                              channel=NoiseChannel(channel_kind, probability)))

    def measure(self, kind, qubits):
        # type: (InstructionKindEnum, Sequence[int]) -> List[int]
        """Emit a measurement and return the absolute indices of its results, in target order.
        """
        self.gate(kind, qubits)
        first = self._num_measurements
        self._num_measurements += len(qubits)
        return list(range(first, self._num_measurements))

    def detector(self, measurements, coords):
        # type: (Sequence[int], Sequence[int]) -> None
        self._instructions.append(Instruction(InstructionKindEnum.DETECTOR, sorted(measurements), coords=coords))

    def observable(self, index, measurements):
        # type: (int, Sequence[int]) -> None
        self._instructions.append(Instruction(InstructionKindEnum.OBSERVABLE_INCLUDE, sorted(measurements),
                                              observable=index))

    def tick(self):
        # type: () -> None
        self._instructions.append(Instruction(InstructionKindEnum.TICK))
        self._touched = set()

    def build(self):
        # type: () -> Circuit
        return Circuit(self._instructions)
