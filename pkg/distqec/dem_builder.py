# -*- coding: utf-8 -*-
from __future__ import absolute_import
from __future__ import unicode_literals

import logging
import math
import re
from collections import OrderedDict
from enum import IntEnum
from typing import Dict, Iterable, List, Optional, Sequence, Text, Tuple

from distqec.circuit_ir import (
    Circuit, InstructionKindEnum, MEASUREMENT_KINDS, NoiseChannelEnum, channel_pauli_terms,
)


_logger = logging.getLogger(__name__)


PROBABILITY_CUTOFF = 1e-15


class EdgeKindEnum(IntEnum):
    """Geometric kinds of matching-graph edges.
    """
    BOUNDARY = 1
    TIME_LIKE = 2
    SPACE_LIKE = 3
    TIME_DIAGONAL = 4


class NonGraphlikeError(RuntimeError):
    ERROR_MSG = 'Error mechanism {0} (probability {1:.3e}) flips {2} detectors and cannot be decomposed into edges.'

    def __init__(self, detectors, probability):
        # type: (Sequence[int], float) -> None
        self.detectors = tuple(detectors)
        self.probability = probability

    def __str__(self):
        labels = ' '.join('D{0}'.format(detector) for detector in self.detectors)
        return self.ERROR_MSG.format(labels, self.probability, len(self.detectors))


class OffSeamEdgeError(ValueError):
    ERROR_MSG = 'Edge {0} touches detector D{1} at x={2}, outside the seam columns {3}.'

    def __init__(self, edge, detector, x, seam_columns):
        # type: (DemEdge, int, int, Sequence[int]) -> None
        self.edge = edge
        self.detector = detector
        self.x = x
        self.seam_columns = tuple(sorted(seam_columns))

    def __str__(self):
        return self.ERROR_MSG.format(self.edge, self.detector, self.x, list(self.seam_columns))


class DemFormatError(IOError):
    ERROR_MSG = 'Cannot parse detector error model, line {0}: {1}.'

    def __init__(self, line_number, reason):
        # type: (int, Text) -> None
        self.line_number = line_number
        self.reason = reason

    def __str__(self):
        return self.ERROR_MSG.format(self.line_number, self.reason)


def xor_merge(first, second):
    # type: (float, float) -> float
    """Probability that exactly one of two independent events happens.
    """
    return first * (1.0 - second) + second * (1.0 - first)


def _bit_indices(mask):
    # type: (int) -> List[int]
    indices = []
    position = 0
    while mask:
        if mask & 1:
            indices.append(position)
        mask >>= 1
        position += 1
    return indices


class DemError(object):
    """An independent error mechanism: its probability and its graphlike components.

    Each component is a symptom bitset (detector i is bit i, observable k is bit num_detectors + k) flipping at most
    two detectors; the XOR of the components is the full symptom.
    """

    def __init__(self, probability, components):
        # type: (float, Tuple[int, ...]) -> None
        self.probability = probability
        self.components = components

    @property
    def symptom(self):
        # type: () -> int
        total = 0
        for component in self.components:
            total ^= component
        return total


class DemEdge(object):
    """A matching-graph edge: one or two detectors, the observables it flips and its probability.
    """

    def __init__(self, detectors, observables, probability):
        # type: (Tuple[int, ...], int, float) -> None
        self.detectors = detectors
        self.observables = observables
        self.probability = probability

    @property
    def weight(self):
        # type: () -> float
        return math.log((1.0 - self.probability) / self.probability)

    @property
    def is_boundary(self):
        # type: () -> bool
        return len(self.detectors) == 1

    def __repr__(self):
        labels = ' '.join('D{0}'.format(detector) for detector in self.detectors)
        observables = ''.join(' L{0}'.format(index) for index in _bit_indices(self.observables))
        return 'DemEdge({0}{1}, p={2:.3e})'.format(labels, observables, self.probability)


class DetectorErrorModel(object):
    """Independent error mechanisms of a circuit over its detectors and observables.
    """

    def __init__(self, num_detectors, num_observables, errors, detector_coords=None):
        # type: (int, int, List[DemError], Optional[List[Tuple[int, ...]]]) -> None
        self.num_detectors = num_detectors
        self.num_observables = num_observables
        self.errors = errors
        self.detector_coords = detector_coords or [()] * num_detectors
        self._edges = None  # type: Optional[List[DemEdge]]

    def split_symptom(self, symptom):
        # type: (int) -> Tuple[List[int], int]
        """Detector indices and observable mask of a symptom bitset.
        """
        detector_mask = symptom & ((1 << self.num_detectors) - 1)
        return _bit_indices(detector_mask), symptom >> self.num_detectors

    def edges(self):
        # type: () -> List[DemEdge]
        """Graphlike edges with XOR-accumulated probabilities, keyed by detectors and observable mask.
        """
        if self._edges is None:
            accumulated = OrderedDict()  # type: Dict[Tuple[Tuple[int, ...], int], float]
            for error in self.errors:
                for component in error.components:
                    detectors, observables = self.split_symptom(component)
                    if not detectors:
                        continue
                    key = (tuple(detectors), observables)
                    accumulated[key] = xor_merge(accumulated.get(key, 0.0), error.probability)
            self._edges = [DemEdge(detectors, observables, probability)
                           for (detectors, observables), probability in accumulated.items()
                           if probability >= PROBABILITY_CUTOFF]
        return self._edges

    def first_order_marginals(self):
        # type: () -> List[float]
        """Probability that each detector fires, to first order in the error probabilities.
        """
        marginals = [0.0] * self.num_detectors
        for error in self.errors:
            detectors, _ = self.split_symptom(error.symptom)
            for detector in detectors:
                marginals[detector] += error.probability
        return marginals

    def classify_edge(self, edge):
        # type: (DemEdge) -> EdgeKindEnum
        if edge.is_boundary:
            return EdgeKindEnum.BOUNDARY
        first, second = (self.detector_coords[detector] for detector in edge.detectors)
        if first[:2] == second[:2]:
            return EdgeKindEnum.TIME_LIKE
        if first[2:] == second[2:]:
            return EdgeKindEnum.SPACE_LIKE
        return EdgeKindEnum.TIME_DIAGONAL

    def _format_symptom(self, symptom):
        # type: (int) -> Text
        detectors, observables = self.split_symptom(symptom)
        labels = ['D{0}'.format(detector) for detector in detectors]
        labels.extend('L{0}'.format(index) for index in _bit_indices(observables))
        return ' '.join(labels)

    def to_text(self):
        # type: () -> Text
        lines = ['# distqec detector error model']
        for error in self.errors:
            body = ' ^ '.join(self._format_symptom(component) for component in error.components)
            lines.append('error({0!r}) {1}'.format(error.probability, body))
        for index, coords in enumerate(self.detector_coords):
            lines.append('detector({0}) D{1}'.format(','.join(str(value) for value in coords), index))
        for index in range(self.num_observables):
            lines.append('logical_observable L{0}'.format(index))
        return '\n'.join(lines) + '\n'

    @classmethod
    def from_text(cls, text):
        # type: (Text) -> DetectorErrorModel
        raw_errors = []  # type: List[Tuple[float, List[List[Text]]]]
        coords = {}  # type: Dict[int, Tuple[int, ...]]
        num_detectors = 0
        num_observables = 0
        for line_number, line in enumerate(text.splitlines(), start=1):
            stripped = line.split('#', 1)[0].strip()
            if not stripped:
                continue
            error_match = _ERROR_LINE.match(stripped)
            detector_match = _DETECTOR_LINE.match(stripped)
            observable_match = _OBSERVABLE_LINE.match(stripped)
            if error_match:
                try:
                    probability = float(error_match.group('p'))
                except ValueError:
                    raise DemFormatError(line_number, 'bad probability')
                components = [part.split() for part in error_match.group('body').split('^')]
                for tokens in components:
                    for token in tokens:
                        if not _TARGET_TOKEN.match(token):
                            raise DemFormatError(line_number, 'bad target {0!r}'.format(token))
                        if token[0] == 'D':
                            num_detectors = max(num_detectors, int(token[1:]) + 1)
                        else:
                            num_observables = max(num_observables, int(token[1:]) + 1)
                raw_errors.append((probability, components))
            elif detector_match:
                index = int(detector_match.group('index'))
                args = [arg for arg in detector_match.group('args').split(',') if arg.strip()]
                coords[index] = tuple(int(arg) for arg in args)
                num_detectors = max(num_detectors, index + 1)
            elif observable_match:
                num_observables = max(num_observables, int(observable_match.group('index')) + 1)
            else:
                raise DemFormatError(line_number, 'unknown line {0!r}'.format(stripped))

        errors = []
        for probability, components in raw_errors:
            symptoms = []
            for tokens in components:
                symptom = 0
                for token in tokens:
                    index = int(token[1:])
                    symptom ^= 1 << (index if token[0] == 'D' else num_detectors + index)
                symptoms.append(symptom)
            errors.append(DemError(probability, tuple(symptoms)))
        detector_coords = [coords.get(index, ()) for index in range(num_detectors)]
        return cls(num_detectors, num_observables, errors, detector_coords)


_ERROR_LINE = re.compile(r'^error\((?P<p>[^)]*)\)\s*(?P<body>.*)$')
_DETECTOR_LINE = re.compile(r'^detector\((?P<args>[^)]*)\)\s+D(?P<index>\d+)$')
_OBSERVABLE_LINE = re.compile(r'^logical_observable\s+L(?P<index>\d+)$')
_TARGET_TOKEN = re.compile(r'^[DL]\d+$')


class _Term(object):
    __slots__ = ('symptom', 'x_symptom', 'z_symptom', 'probability')

    def __init__(self, symptom, x_symptom, z_symptom, probability):
        self.symptom = symptom
        self.x_symptom = x_symptom
        self.z_symptom = z_symptom
        self.probability = probability


def _measurement_symptoms(circuit):
    # type: (Circuit) -> Tuple[List[int], List[int]]
    """Symptom bitset contributed by each measurement and the first measurement index of each instruction.
    """
    symptoms = [0] * circuit.num_measurements
    first_measurement = []
    num_measurements = 0
    detector_index = 0
    for instruction in circuit.instructions:
        first_measurement.append(num_measurements)
        if instruction.kind in MEASUREMENT_KINDS:
            num_measurements += len(instruction.targets)
        elif instruction.kind == InstructionKindEnum.DETECTOR:
            for measurement in instruction.targets:
                symptoms[measurement] ^= 1 << detector_index
            detector_index += 1
        elif instruction.kind == InstructionKindEnum.OBSERVABLE_INCLUDE:
            bit = 1 << (circuit.num_detectors + instruction.observable)
            for measurement in instruction.targets:
                symptoms[measurement] ^= bit
    return symptoms, first_measurement


def _sweep_terms(circuit):
    # type: (Circuit) -> List[_Term]
    """Walk the circuit backwards, tracking which detectors and observables a Pauli on each qubit would flip.

    x_sens[q] is the symptom of an X error on qubit q at the current point, z_sens[q] the same for Z.
    """
    measurement_symptoms, first_measurement = _measurement_symptoms(circuit)
    x_sens = [0] * circuit.num_qubits
    z_sens = [0] * circuit.num_qubits
    terms = []  # type: List[_Term]

    for index in range(len(circuit.instructions) - 1, -1, -1):
        instruction = circuit.instructions[index]
        kind = instruction.kind
        targets = instruction.targets
        if kind == InstructionKindEnum.NOISE:
            channel = instruction.channel
            arity = channel.arity
            pauli_terms = channel_pauli_terms(channel)
            for start in range(0, len(targets), arity):
                qubits = targets[start:start + arity]
                for pauli, probability in pauli_terms:
                    x_symptom = 0
                    z_symptom = 0
                    for local in pauli.x_support:
                        x_symptom ^= x_sens[qubits[local]]
                    for local in pauli.z_support:
                        z_symptom ^= z_sens[qubits[local]]
                    symptom = x_symptom ^ z_symptom
                    if symptom:
                        terms.append(_Term(symptom, x_symptom, z_symptom, probability))
        elif kind == InstructionKindEnum.H:
            for qubit in targets:
                x_sens[qubit], z_sens[qubit] = z_sens[qubit], x_sens[qubit]
        elif kind in (InstructionKindEnum.CNOT, InstructionKindEnum.BELL_PREP):
            for control, target in zip(targets[::2], targets[1::2]):
                x_sens[control] ^= x_sens[target]
                z_sens[target] ^= z_sens[control]
                if kind == InstructionKindEnum.BELL_PREP:
                    x_sens[control], z_sens[control] = z_sens[control], x_sens[control]
        elif kind == InstructionKindEnum.R:
            for qubit in targets:
                x_sens[qubit] = 0
                z_sens[qubit] = 0
        elif kind == InstructionKindEnum.MZ:
            first = first_measurement[index]
            for offset, qubit in enumerate(targets):
                x_sens[qubit] ^= measurement_symptoms[first + offset]
                z_sens[qubit] = 0
        elif kind == InstructionKindEnum.MX:
            first = first_measurement[index]
            for offset, qubit in enumerate(targets):
                z_sens[qubit] ^= measurement_symptoms[first + offset]
                x_sens[qubit] = 0
    return terms


class _Decomposer(object):
    """Splits mechanisms flipping more than two detectors into edges known from graphlike mechanisms.
    """

    def __init__(self, num_detectors, terms):
        # type: (int, List[_Term]) -> None
        self._num_detectors = num_detectors
        self._detector_mask = (1 << num_detectors) - 1
        # Detector set -> observable masks seen on single graphlike mechanisms, most probable first
        known = {}  # type: Dict[int, Dict[int, float]]
        for term in terms:
            for symptom in self._graphlike_parts(term):
                detectors = symptom & self._detector_mask
                masks = known.setdefault(detectors, {})
                masks[symptom >> num_detectors] = masks.get(symptom >> num_detectors, 0.0) + term.probability
        self._known = {
            detectors: [mask for mask, _ in sorted(masks.items(), key=lambda item: -item[1])]
            for detectors, masks in known.items()
        }

    def _count(self, symptom):
        # type: (int) -> int
        return bin(symptom & self._detector_mask).count('1')

    def _graphlike_parts(self, term):
        # type: (_Term) -> Tuple[int, ...]
        if self._count(term.symptom) <= 2:
            return (term.symptom,) if term.symptom & self._detector_mask else ()
        x_count, z_count = self._count(term.x_symptom), self._count(term.z_symptom)
        if 1 <= x_count <= 2 and 1 <= z_count <= 2:
            return term.x_symptom, term.z_symptom
        return ()

    def decompose(self, term):
        # type: (_Term) -> Tuple[int, ...]
        count = self._count(term.symptom)
        if count == 0:
            return (term.symptom,)
        parts = self._graphlike_parts(term)
        if parts:
            return parts
        factored = self._factor(_bit_indices(term.symptom & self._detector_mask), term.symptom >> self._num_detectors)
        if factored is None:
            raise NonGraphlikeError(_bit_indices(term.symptom & self._detector_mask), term.probability)
        return factored

    def _factor(self, detectors, observables):
        # type: (List[int], int) -> Optional[Tuple[int, ...]]
        if not detectors:
            return () if observables == 0 else None
        first, rest = detectors[0], detectors[1:]
        options = []  # type: List[Tuple[int, List[int]]]
        for partner in rest:
            options.append(((1 << first) | (1 << partner), [d for d in rest if d != partner]))
        options.append((1 << first, rest))
        for detector_set, remaining in options:
            for mask in self._known.get(detector_set, ()):
                tail = self._factor(remaining, observables ^ mask)
                if tail is not None:
                    return ((mask << self._num_detectors) | detector_set,) + tail
        return None


def _first_detector(detector_bits, num_detectors):
    # type: (int, int) -> int
    if not detector_bits:
        return num_detectors
    return (detector_bits & -detector_bits).bit_length() - 1


def build_dem(circuit):
    # type: (Circuit) -> DetectorErrorModel
    """Detector error model of a noisy circuit, with every mechanism decomposed into graphlike components.

    Raises NonGraphlikeError when a mechanism cannot be written as a combination of edges.
    """
    terms = _sweep_terms(circuit)
    decomposer = _Decomposer(circuit.num_detectors, terms)
    merged = OrderedDict()  # type: Dict[Tuple[int, ...], float]
    for term in terms:
        components = decomposer.decompose(term)
        merged[components] = xor_merge(merged.get(components, 0.0), term.probability)
    detector_mask = (1 << circuit.num_detectors) - 1
    errors = [DemError(probability, components) for components, probability in merged.items()
              if probability >= PROBABILITY_CUTOFF]
    errors.sort(key=lambda error: (_first_detector(error.symptom & detector_mask, circuit.num_detectors),
                                   error.components))
    dem = DetectorErrorModel(circuit.num_detectors, circuit.num_observables, errors, circuit.detector_coords())
    _logger.info('Built detector error model: %d detectors, %d error mechanisms, %d edges',
                 dem.num_detectors, len(errors), len(dem.edges()))
    return dem


def seam_restriction(dem, seam_columns):
    # type: (DetectorErrorModel, Iterable[int]) -> List[DemEdge]
    """Edges of nonzero probability, all of which must lie on the given detector columns (doubled x coordinates).

    Raises OffSeamEdgeError on the first edge touching a detector elsewhere.
    """
    allowed = frozenset(seam_columns)
    edges = [edge for edge in dem.edges() if edge.probability > 0]
    for edge in edges:
        for detector in edge.detectors:
            x = dem.detector_coords[detector][0]
            if x not in allowed:
                raise OffSeamEdgeError(edge, detector, x, allowed)
    return edges
