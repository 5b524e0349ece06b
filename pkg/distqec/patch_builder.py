# -*- coding: utf-8 -*-
from __future__ import absolute_import
from __future__ import unicode_literals

import json
import logging
import math
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Text, Tuple

from distqec.circuit_ir import Circuit, CircuitBuilder, InstructionKindEnum, NoiseChannelEnum


_logger = logging.getLogger(__name__)


class PatchVariantEnum(Enum):
    """Memory experiment layouts.
    """
    PLAIN = 'plain'
    SEAM = 'seam'
    NAIVE_SEAM = 'naive_seam'
    MULTISEAM = 'multiseam'


class MemoryBasisEnum(Enum):
    """Basis of the memory experiment: |0> memory (Z) or |+> memory (X).
    """
    Z = 'Z'
    X = 'X'


class InvalidPatchSpecError(ValueError):
    ERROR_MSG = 'Invalid patch specification: {0}.'

    def __init__(self, reason):
        # type: (Text) -> None
        self.reason = reason

    def __str__(self):
        return self.ERROR_MSG.format(self.reason)


# CNOT step of each plaquette corner: X checks go NW, NE, SW, SE and Z checks NW, SW, NE, SE
NW, NE, SW, SE = 'NW', 'NE', 'SW', 'SE'
CNOT_STEPS = {
    'X': {NW: 1, NE: 2, SW: 3, SE: 4},
    'Z': {NW: 1, SW: 2, NE: 3, SE: 4},
}
_CORNER_OFFSETS = ((NW, 0, 0), (NE, 1, 0), (SW, 0, 1), (SE, 1, 1))


class PatchSpec(object):
    """Parameters of one memory experiment.
    """

    def __init__(
            self,
            d,                                  # type: int
            rounds=None,                        # type: Optional[int]
            basis=MemoryBasisEnum.Z,            # type: MemoryBasisEnum
            variant=PatchVariantEnum.PLAIN,     # type: PatchVariantEnum
            p=0.0,                              # type: float
            p_bell=0.0,                         # type: float
            seam_offset=0,                      # type: int
    ):
        # type: (...) -> None
        if isinstance(d, bool) or not isinstance(d, int) or d < 3 or d % 2 == 0:
            raise InvalidPatchSpecError('d must be an odd integer >= 3, got {0!r}'.format(d))
        if rounds is None:
            rounds = 3 * d
        if isinstance(rounds, bool) or not isinstance(rounds, int) or rounds < 1:
            raise InvalidPatchSpecError('rounds must be a positive integer, got {0!r}'.format(rounds))
        for name, value in (('p', p), ('p_bell', p_bell)):
            if not 0.0 <= value < 1.0:
                raise InvalidPatchSpecError('{0} must lie in [0, 1), got {1!r}'.format(name, value))
        self.d = d
        self.rounds = rounds
        self.basis = MemoryBasisEnum(basis)
        self.variant = PatchVariantEnum(variant)
        self.p = float(p)
        self.p_bell = float(p_bell)
        self.seam_offset = int(seam_offset)
        # Raises on an offset that pushes a seam off the patch
        self.seam_columns()

    @property
    def width(self):
        # type: () -> int
        if self.variant == PatchVariantEnum.SEAM:
            return self.d + 1
        if self.variant == PatchVariantEnum.MULTISEAM:
            return 4 * self.d + 3
        return self.d

    def seam_columns(self):
        # type: () -> Tuple[int, ...]
        """Data columns (0-based) of the seams; for the naive seam, the data column left of the Bell column.
        """
        d = self.d
        if self.variant == PatchVariantEnum.PLAIN:
            return ()
        if self.variant == PatchVariantEnum.SEAM:
            seams = ((d - 1) // 2 + self.seam_offset,)
            lowest, highest = 1, self.width - 2
        elif self.variant == PatchVariantEnum.MULTISEAM:
            seams = (d + self.seam_offset, 3 * d + 2 + self.seam_offset)
            lowest, highest = 1, self.width - 2
        else:
            seams = ((d - 1) // 2 + self.seam_offset,)
            lowest, highest = 0, self.width - 2
        for seam in seams:
            if not lowest <= seam <= highest:
                raise InvalidPatchSpecError('seam_offset {0} puts a seam at column {1}, outside [{2}, {3}]'.format(
                    self.seam_offset, seam, lowest, highest))
        return seams

    def with_noise(self, p, p_bell):
        # type: (float, float) -> PatchSpec
        return PatchSpec(self.d, self.rounds, self.basis, self.variant, p, p_bell, self.seam_offset)

    def with_basis(self, basis):
        # type: (MemoryBasisEnum) -> PatchSpec
        return PatchSpec(self.d, self.rounds, basis, self.variant, self.p, self.p_bell, self.seam_offset)

    def to_dict(self):
        # type: () -> Dict[Text, Any]
        return {
            'd': self.d,
            'rounds': self.rounds,
            'basis': self.basis.value,
            'variant': self.variant.value,
            'p': self.p,
            'p_bell': self.p_bell,
            'seam_offset': self.seam_offset,
        }

    @classmethod
    def from_dict(cls, document):
        # type: (Dict[Text, Any]) -> PatchSpec
        unknown = set(document) - {'d', 'rounds', 'basis', 'variant', 'p', 'p_bell', 'seam_offset'}
        if unknown:
            raise InvalidPatchSpecError('unknown fields {0}'.format(', '.join(sorted(unknown))))
        if 'd' not in document:
            raise InvalidPatchSpecError('missing field d')
        try:
            return cls(
                d=document['d'],
                rounds=document.get('rounds'),
                basis=MemoryBasisEnum(document.get('basis', 'Z')),
                variant=PatchVariantEnum(document.get('variant', 'plain')),
                p=float(document.get('p', 0.0)),
                p_bell=float(document.get('p_bell', 0.0)),
                seam_offset=int(document.get('seam_offset', 0)),
            )
        except (TypeError, ValueError) as e:
            if isinstance(e, InvalidPatchSpecError):
                raise
            raise InvalidPatchSpecError(str(e))

    @classmethod
    def from_json(cls, text):
        # type: (Text) -> PatchSpec
        try:
            document = json.loads(text)
        except ValueError as e:
            raise InvalidPatchSpecError('not a JSON document ({0})'.format(e))
        if not isinstance(document, dict):
            raise InvalidPatchSpecError('expected a JSON object')
        return cls.from_dict(document)

    def __eq__(self, other):
        if not isinstance(other, PatchSpec):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __repr__(self):
        return 'PatchSpec({0})'.format(self.to_dict())


class CnotOperation(object):
    """One CNOT of a plaquette: its step (1-4), the ancilla or Bell half involved and the data qubit.
    """

    def __init__(self, step, ancilla, data_qubit):
        # type: (int, int, int) -> None
        self.step = step
        self.ancilla = ancilla
        self.data_qubit = data_qubit


class Plaquette(object):
    """A stabilizer of the patch and how it is measured.

    column and band locate the plaquette between data columns column, column + 1 and rows band, band + 1 (boundary
    plaquettes sit at column -1 or width - 1, band -1 or d - 1). Bell plaquettes have two ancillas, the two halves
    of a Bell pair, each interacting only with the data on its own side of the split.
    """

    def __init__(self, index, column, band, basis, corners, ancillas, cnots):
        # type: (int, int, int, Text, Dict[Text, int], Tuple[int, ...], List[CnotOperation]) -> None
        self.index = index
        self.column = column
        self.band = band
        self.basis = basis
        self.corners = corners
        self.ancillas = ancillas
        self.cnots = cnots

    @property
    def is_bell(self):
        # type: () -> bool
        return len(self.ancillas) == 2

    @property
    def data_qubits(self):
        # type: () -> Tuple[int, ...]
        return tuple(sorted(self.corners.values()))

    @property
    def coords(self):
        # type: () -> Tuple[int, int]
        return 2 * self.column + 1, 2 * self.band + 1

    def cnots_of(self, ancilla):
        # type: (int) -> List[CnotOperation]
        return sorted((cnot for cnot in self.cnots if cnot.ancilla == ancilla), key=lambda cnot: cnot.step)


class PatchLayout(object):
    """Qubit allocation and stabilizer measurement plan of a patch.

    Data qubit (column, row) has index row * width + column, rows growing downwards; ancillas follow.
    """

    def __init__(self, spec, plaquettes, num_qubits, bell_columns):
        # type: (PatchSpec, List[Plaquette], int, Tuple[int, ...]) -> None
        self.spec = spec
        self.width = spec.width
        self.height = spec.d
        self.plaquettes = plaquettes
        self.num_qubits = num_qubits
        self.bell_columns = bell_columns
        self.seam_columns = spec.seam_columns() if spec.variant != PatchVariantEnum.NAIVE_SEAM else ()

    @property
    def num_data_qubits(self):
        # type: () -> int
        return self.width * self.height

    def data_index(self, column, row):
        # type: (int, int) -> int
        return row * self.width + column

    def data_position(self, qubit):
        # type: (int) -> Tuple[int, int]
        return qubit % self.width, qubit // self.width

    @property
    def bell_plaquettes(self):
        # type: () -> List[Plaquette]
        return [plaquette for plaquette in self.plaquettes if plaquette.is_bell]

    @property
    def ancillas(self):
        # type: () -> List[int]
        return [ancilla for plaquette in self.plaquettes for ancilla in plaquette.ancillas]

    def seam_detector_columns(self):
        # type: () -> frozenset
        """Doubled x coordinates of the detectors measured by Bell pairs.
        """
        return frozenset(2 * column + 1 for column in self.bell_columns)

    def logical_observable_qubits(self):
        # type: () -> List[int]
        """Support of the logical operator read out by the memory: Z on row 0 or X on column 0.
        """
        if self.spec.basis == MemoryBasisEnum.Z:
            return [self.data_index(column, 0) for column in range(self.width)]
        return [self.data_index(0, row) for row in range(self.height)]


def naive_seam_effective_distance(d):
    # type: (int) -> int
    """Circuit-level distance left by a single column of Bell-pair ancillas.
    """
    return 2 * int(math.ceil(0.5 * ((d + 1) // 2))) - 1


def _processor_of(spec, column, row):
    # type: (PatchSpec, int, int) -> int
    """Index of the processor holding a data qubit; processors are numbered left to right.
    """
    if spec.variant == PatchVariantEnum.NAIVE_SEAM:
        return 0 if column <= spec.seam_columns()[0] else 1
    region = 0
    for seam in spec.seam_columns():
        # The seam column is shared along a zig-zag
        if column > seam or (column == seam and (seam + row) % 2 == 1):
            region += 1
    return region


def _bell_columns(spec):
    # type: (PatchSpec) -> Tuple[int, ...]
    if spec.variant == PatchVariantEnum.PLAIN:
        return ()
    if spec.variant == PatchVariantEnum.NAIVE_SEAM:
        return spec.seam_columns()
    return tuple(column for seam in spec.seam_columns() for column in (seam - 1, seam))


def build_layout(spec):
    # type: (PatchSpec) -> PatchLayout
    width, height = spec.width, spec.d
    bell_columns = _bell_columns(spec)
    plaquettes = []  # type: List[Plaquette]
    next_ancilla = width * height

    for band in range(-1, height):
        for column in range(-1, width):
            basis = 'X' if (column + band) % 2 == 0 else 'Z'
            inside_columns = 0 <= column <= width - 2
            inside_bands = 0 <= band <= height - 2
            if not inside_columns and not inside_bands:
                continue
            if not inside_bands and basis != 'X':
                continue
            if not inside_columns and basis != 'Z':
                continue

            corners = {}  # type: Dict[Text, int]
            for corner, dx, dy in _CORNER_OFFSETS:
                x, y = column + dx, band + dy
                if 0 <= x < width and 0 <= y < height:
                    corners[corner] = y * width + x

            if column in bell_columns:
                ancillas = (next_ancilla, next_ancilla + 1)
                next_ancilla += 2
                sides = [_processor_of(spec, column + dx, band + dy)
                         for corner, dx, dy in _CORNER_OFFSETS if corner in corners]
                left_side = min(_processor_of(spec, column, row) for row in range(height))
                half_of = {}
                for corner, dx, dy in _CORNER_OFFSETS:
                    if corner in corners:
                        half_of[corner] = ancillas[_processor_of(spec, column + dx, band + dy) - left_side]
                if max(sides) - left_side > 1:
                    raise InvalidPatchSpecError('plaquette at column {0} spans more than two processors'.format(
                        column))
            else:
                ancillas = (next_ancilla,)
                next_ancilla += 1
                half_of = {corner: ancillas[0] for corner in corners}

            cnots = [CnotOperation(CNOT_STEPS[basis][corner], half_of[corner], corners[corner])
                     for corner in (NW, NE, SW, SE) if corner in corners]
            plaquettes.append(Plaquette(len(plaquettes), column, band, basis, corners, ancillas, cnots))

    layout = PatchLayout(spec, plaquettes, next_ancilla, bell_columns)
    _logger.debug('Layout %s: %d data qubits, %d stabilizers, %d Bell pairs', spec.variant.value,
                  layout.num_data_qubits, len(plaquettes), len(layout.bell_plaquettes))
    return layout


def _close_tick(builder, spec, active_qubits):
    # type: (CircuitBuilder, PatchSpec, Sequence[int]) -> None
    idle = [qubit for qubit in active_qubits if qubit not in builder.touched_qubits]
    builder.noise(NoiseChannelEnum.DEPOL1, spec.p, idle)
    builder.tick()


def _emit_memory(spec, layout):
    # type: (PatchSpec, PatchLayout) -> Circuit
    builder = CircuitBuilder()
    p, p_bell = spec.p, spec.p_bell
    data = list(range(layout.num_data_qubits))
    ancillas = layout.ancillas
    active = data + ancillas
    local_x_ancillas = [plaquette.ancillas[0] for plaquette in layout.plaquettes
                        if plaquette.basis == 'X' and not plaquette.is_bell]
    x_bell_halves = [half for plaquette in layout.bell_plaquettes if plaquette.basis == 'X'
                     for half in plaquette.ancillas]
    bell_pairs = [half for plaquette in layout.bell_plaquettes for half in plaquette.ancillas]
    memory_basis = spec.basis.value

    steps = {step: [] for step in range(1, 5)}  # type: Dict[int, List[int]]
    for plaquette in layout.plaquettes:
        for cnot in plaquette.cnots:
            if plaquette.basis == 'X':
                steps[cnot.step].extend((cnot.ancilla, cnot.data_qubit))
            else:
                steps[cnot.step].extend((cnot.data_qubit, cnot.ancilla))

    previous = {}  # type: Dict[int, List[int]]
    for round_index in range(spec.rounds):
        resets = (data + ancillas) if round_index == 0 else ancillas
        builder.gate(InstructionKindEnum.R, resets)
        builder.noise(NoiseChannelEnum.ERRX, p, resets)
        _close_tick(builder, spec, active)

        hadamards = list(local_x_ancillas)
        if round_index == 0 and spec.basis == MemoryBasisEnum.X:
            hadamards = data + hadamards
        builder.gate(InstructionKindEnum.H, hadamards)
        builder.noise(NoiseChannelEnum.DEPOL1, p, hadamards)
        builder.gate(InstructionKindEnum.BELL_PREP, bell_pairs)
        builder.noise(NoiseChannelEnum.BELL_DEPOL2, p_bell, bell_pairs)
        _close_tick(builder, spec, active)

        for step in range(1, 5):
            builder.gate(InstructionKindEnum.CNOT, steps[step])
            builder.noise(NoiseChannelEnum.DEPOL2, p, steps[step])
            _close_tick(builder, spec, active)

        hadamards = local_x_ancillas + x_bell_halves
        builder.gate(InstructionKindEnum.H, hadamards)
        builder.noise(NoiseChannelEnum.DEPOL1, p, hadamards)
        _close_tick(builder, spec, active)

        builder.noise(NoiseChannelEnum.ERRX, p, ancillas)
        outcomes = dict(zip(ancillas, builder.measure(InstructionKindEnum.MZ, ancillas)))
        _close_tick(builder, spec, active)

        current = {}  # type: Dict[int, List[int]]
        for plaquette in layout.plaquettes:
            measured = [outcomes[ancilla] for ancilla in plaquette.ancillas]
            current[plaquette.index] = measured
            x, y = plaquette.coords
            if round_index == 0:
                if plaquette.basis == memory_basis:
                    builder.detector(measured, (x, y, 0))
            else:
                builder.detector(measured + previous[plaquette.index], (x, y, round_index))
        previous = current

    if spec.basis == MemoryBasisEnum.X:
        builder.gate(InstructionKindEnum.H, data)
        builder.noise(NoiseChannelEnum.DEPOL1, p, data)
        builder.tick()
    builder.noise(NoiseChannelEnum.ERRX, p, data)
    readout = builder.measure(InstructionKindEnum.MZ, data)
    for plaquette in layout.plaquettes:
        if plaquette.basis != memory_basis:
            continue
        x, y = plaquette.coords
        builder.detector([readout[qubit] for qubit in plaquette.data_qubits] + previous[plaquette.index],
                         (x, y, spec.rounds))
    builder.observable(0, [readout[qubit] for qubit in layout.logical_observable_qubits()])

    circuit = builder.build()
    _logger.info('Built %s memory circuit: d=%d, rounds=%d, basis=%s, %d qubits, %d detectors',
                 spec.variant.value, spec.d, spec.rounds, memory_basis, circuit.num_qubits, circuit.num_detectors)
    return circuit


def _require_variant(spec, variant):
    # type: (PatchSpec, PatchVariantEnum) -> None
    if spec.variant != variant:
        raise InvalidPatchSpecError('expected a {0} patch, got {1}'.format(variant.value, spec.variant.value))


def build_memory_circuit(spec):
    # type: (PatchSpec) -> Circuit
    _require_variant(spec, PatchVariantEnum.PLAIN)
    return _emit_memory(spec, build_layout(spec))


def build_distributed_memory_circuit(spec):
    # type: (PatchSpec) -> Circuit
    """Memory circuit of a d x (d+1) patch split across two processors along a seam data column.

    Every plaquette of the two columns flanking the seam is measured with a Bell pair.
    """
    _require_variant(spec, PatchVariantEnum.SEAM)
    return _emit_memory(spec, build_layout(spec))


def build_naive_seam_circuit(spec):
    # type: (PatchSpec) -> Circuit
    _require_variant(spec, PatchVariantEnum.NAIVE_SEAM)
    return _emit_memory(spec, build_layout(spec))


def build_multiseam_circuit(spec):
    # type: (PatchSpec) -> Circuit
    _require_variant(spec, PatchVariantEnum.MULTISEAM)
    return _emit_memory(spec, build_layout(spec))


_BUILDERS = {
    PatchVariantEnum.PLAIN: build_memory_circuit,
    PatchVariantEnum.SEAM: build_distributed_memory_circuit,
    PatchVariantEnum.NAIVE_SEAM: build_naive_seam_circuit,
    PatchVariantEnum.MULTISEAM: build_multiseam_circuit,
}


def build_circuit(spec):
    # type: (PatchSpec) -> Circuit
    return _BUILDERS[spec.variant](spec)
