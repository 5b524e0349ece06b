#!/usr/bin/env python
# -*- coding: utf-8 -*-
from __future__ import absolute_import
from __future__ import unicode_literals

import collections
import unittest

from distqec.circuit_ir import InstructionKindEnum, NoiseChannelEnum, gate_for_kind, validate_circuit
from distqec.patch_builder import InvalidPatchSpecError, MemoryBasisEnum, PatchSpec, PatchVariantEnum, \
    build_circuit, build_distributed_memory_circuit, build_layout, build_memory_circuit, build_multiseam_circuit, \
    build_naive_seam_circuit, naive_seam_effective_distance
from distqec.pauli_core import PauliString, conjugate_through_gate, tableau_reference


class PatchSpecTests(unittest.TestCase):

    def test_defaults(self):
        spec = PatchSpec(5)
        self.assertEqual(spec.rounds, 15)
        self.assertEqual(spec.basis, MemoryBasisEnum.Z)
        self.assertEqual(spec.variant, PatchVariantEnum.PLAIN)
        self.assertEqual(spec.width, 5)

    def test_widths(self):
        self.assertEqual(PatchSpec(5, variant=PatchVariantEnum.SEAM).width, 6)
        self.assertEqual(PatchSpec(5, variant=PatchVariantEnum.NAIVE_SEAM).width, 5)
        self.assertEqual(PatchSpec(3, variant=PatchVariantEnum.MULTISEAM).width, 15)

    def test_invalid(self):
        with self.assertRaisesRegex(InvalidPatchSpecError, 'odd integer'):
            PatchSpec(4)
        with self.assertRaisesRegex(InvalidPatchSpecError, 'odd integer'):
            PatchSpec(1)
        with self.assertRaisesRegex(InvalidPatchSpecError, 'p must lie'):
            PatchSpec(3, p=1.0)
        with self.assertRaisesRegex(InvalidPatchSpecError, 'rounds'):
            PatchSpec(3, rounds=0)
        with self.assertRaisesRegex(InvalidPatchSpecError, 'outside'):
            PatchSpec(3, variant=PatchVariantEnum.SEAM, seam_offset=5)

    def test_from_json(self):
        spec = PatchSpec.from_json('{"d": 5, "variant": "seam", "basis": "X", "p": 0.001, "p_bell": 0.02}')
        self.assertEqual(spec, PatchSpec(5, None, MemoryBasisEnum.X, PatchVariantEnum.SEAM, 0.001, 0.02))
        self.assertEqual(PatchSpec.from_dict(spec.to_dict()), spec)

    def test_from_json_bad(self):
        with self.assertRaisesRegex(InvalidPatchSpecError, 'unknown fields'):
            PatchSpec.from_json('{"d": 5, "colour": "red"}')
        with self.assertRaisesRegex(InvalidPatchSpecError, 'missing field d'):
            PatchSpec.from_json('{"p": 0.001}')
        with self.assertRaisesRegex(InvalidPatchSpecError, 'JSON'):
            PatchSpec.from_json('{d: 5')
        with self.assertRaises(InvalidPatchSpecError):
            PatchSpec.from_json('{"d": 5, "variant": "diagonal"}')

    def test_naive_seam_effective_distance(self):
        self.assertEqual([naive_seam_effective_distance(d) for d in (5, 7, 9)], [3, 3, 5])


def _processor(seam, column, row):
    # Zig-zag split: seam qubit (s, y) is on the left processor when s + y is even
    if column < seam or (column == seam and (seam + row) % 2 == 0):
        return 0
    return 1


_PROPAGATED_KINDS = (InstructionKindEnum.R, InstructionKindEnum.H, InstructionKindEnum.CNOT,
                     InstructionKindEnum.BELL_PREP)


def _column_load(layout, data_qubits):
    counts = collections.Counter(layout.data_position(qubit)[0] for qubit in data_qubits)
    return max(counts.values()) if counts else 0


def _worst_hook_column_load(circuit, layout):
    """Most data qubits of one column that a single X fault on an X-check ancilla leaves behind in the first round.

    Each fault is pushed through the gates up to the first ancilla readout and reduced by its own stabilizer.
    """
    x_check_of = {ancilla: plaquette for plaquette in layout.plaquettes if plaquette.basis == 'X'
                  for ancilla in plaquette.ancillas}
    instructions = circuit.instructions
    first_readout = next(index for index, instruction in enumerate(instructions)
                         if instruction.kind in (InstructionKindEnum.MZ, InstructionKindEnum.MX))
    worst = 0
    for index in range(first_readout):
        if instructions[index].kind != InstructionKindEnum.NOISE:
            continue
        for qubit in set(instructions[index].targets):
            plaquette = x_check_of.get(qubit)
            if plaquette is None:
                continue
            pauli = PauliString({qubit: 'X'})
            for later in instructions[index + 1:first_readout]:
                if later.kind in _PROPAGATED_KINDS:
                    pauli = conjugate_through_gate(pauli, gate_for_kind(later.kind), later.targets).pauli
            spread = frozenset(target for target in pauli.x_support if target < layout.num_data_qubits)
            reduced = spread ^ frozenset(plaquette.corners.values())
            worst = max(worst, min(_column_load(layout, spread), _column_load(layout, reduced)))
    return worst


class PatchLayoutTests(unittest.TestCase):

    def test_plain_stabilizer_counts(self):
        # Given a plain distance-3 patch
        layout = build_layout(PatchSpec(3))

        # Then it has d^2 - 1 stabilizers split evenly between X and Z
        self.assertEqual(len(layout.plaquettes), 8)
        self.assertEqual(len([plaquette for plaquette in layout.plaquettes if plaquette.basis == 'X']), 4)
        self.assertEqual(layout.bell_plaquettes, [])
        self.assertEqual(layout.num_data_qubits, 9)

    def test_seam_layout(self):
        # Given a distance-5 patch with a seam
        layout = build_layout(PatchSpec(5, variant=PatchVariantEnum.SEAM))

        # Then the two columns flanking the seam are measured with 2d Bell pairs
        self.assertEqual(len(layout.plaquettes), 5 * 6 - 1)
        self.assertEqual(len(layout.bell_plaquettes), 10)
        self.assertEqual(layout.seam_columns, (2,))
        self.assertEqual(layout.bell_columns, (1, 2))
        self.assertEqual(layout.seam_detector_columns(), frozenset([3, 5]))

    def test_multiseam_and_naive_layouts(self):
        self.assertEqual(len(build_layout(PatchSpec(3, variant=PatchVariantEnum.MULTISEAM)).bell_plaquettes), 12)
        naive = build_layout(PatchSpec(5, variant=PatchVariantEnum.NAIVE_SEAM))
        self.assertEqual(len(naive.bell_plaquettes), 5)
        self.assertEqual(naive.seam_columns, ())

    def test_bell_halves_stay_on_their_processor(self):
        for d in (3, 5, 7):
            # Given a seam patch
            spec = PatchSpec(d, variant=PatchVariantEnum.SEAM)
            layout = build_layout(spec)
            seam = spec.seam_columns()[0]

            for plaquette in layout.bell_plaquettes:
                # Then each half only touches data on its own processor
                for half_index, half in enumerate(plaquette.ancillas):
                    for cnot in plaquette.cnots_of(half):
                        column, row = layout.data_position(cnot.data_qubit)
                        self.assertEqual(_processor(seam, column, row), half_index)

                # And bulk Bell plaquettes split their four data qubits as one seam qubit plus three
                if len(plaquette.corners) == 4:
                    sizes = sorted(len(plaquette.cnots_of(half)) for half in plaquette.ancillas)
                    self.assertEqual(sizes, [1, 3])

    def test_hook_pairs_are_perpendicular_to_logicals(self):
        for variant in (PatchVariantEnum.PLAIN, PatchVariantEnum.SEAM, PatchVariantEnum.MULTISEAM):
            # Given a layout
            layout = build_layout(PatchSpec(5 if variant != PatchVariantEnum.MULTISEAM else 3, variant=variant))
            for plaquette in layout.plaquettes:
                for ancilla in plaquette.ancillas:
                    cnots = plaquette.cnots_of(ancilla)
                    if len(cnots) < 3:
                        continue
                    # When the ancilla fails right after its first CNOTs, the last two data qubits get the error
                    (first_column, first_row), (second_column, second_row) = [
                        layout.data_position(cnot.data_qubit) for cnot in cnots[-2:]]

                    # Then the pair never lies along the logical operator of the same type
                    if plaquette.basis == 'X':
                        self.assertNotEqual(first_column, second_column)
                    else:
                        self.assertNotEqual(first_row, second_row)

    def test_cnot_steps_are_distinct_per_data_qubit(self):
        layout = build_layout(PatchSpec(5, variant=PatchVariantEnum.SEAM))
        used = set()
        for plaquette in layout.plaquettes:
            for cnot in plaquette.cnots:
                self.assertNotIn((cnot.step, cnot.data_qubit), used)
                used.add((cnot.step, cnot.data_qubit))

    def test_logical_observable_qubits(self):
        layout = build_layout(PatchSpec(3))
        self.assertEqual(layout.logical_observable_qubits(), [0, 1, 2])
        layout = build_layout(PatchSpec(3, basis=MemoryBasisEnum.X))
        self.assertEqual(layout.logical_observable_qubits(), [0, 3, 6])


class MemoryCircuitTests(unittest.TestCase):

    def test_detector_count(self):
        # Given a plain distance-3 Z memory over 9 rounds
        circuit = build_memory_circuit(PatchSpec(3, rounds=9))

        # Then it has 4 first-round, 8 x 8 bulk and 4 final detectors
        self.assertEqual(circuit.num_detectors, 72)
        self.assertEqual(circuit.num_observables, 1)
        self.assertEqual(circuit.num_qubits, 17)

    def test_seam_detector_count(self):
        circuit = build_distributed_memory_circuit(PatchSpec(3, rounds=3, variant=PatchVariantEnum.SEAM))
        self.assertEqual(circuit.num_detectors, 5 + 2 * 11 + 5)
        # 12 data qubits, 5 single ancillas and 6 Bell pairs
        self.assertEqual(circuit.num_qubits, 12 + 5 + 12)

    def test_circuits_are_valid_and_deterministic(self):
        specs = [
            PatchSpec(3, rounds=2, basis=basis, variant=variant, p=1e-3, p_bell=1e-2)
            for variant in PatchVariantEnum for basis in MemoryBasisEnum
        ]
        for spec in specs:
            # When the circuit is built and run without noise
            circuit = build_circuit(spec)
            self.assertIsNone(validate_circuit(circuit), msg=repr(spec))
            reference = tableau_reference(circuit)

            # Then every detector and the observable are deterministic zeros
            self.assertFalse(reference.detectors.any(), msg=repr(spec))
            self.assertFalse(reference.observables.any(), msg=repr(spec))

    def test_noise_placement(self):
        # Given a seam patch with only Bell-pair noise
        circuit = build_distributed_memory_circuit(PatchSpec(3, rounds=4, variant=PatchVariantEnum.SEAM, p_bell=0.02))

        # Then the only channels are the Bell-pair depolarizations, one per round
        noise = [instruction for instruction in circuit.instructions
                 if instruction.kind == InstructionKindEnum.NOISE]
        self.assertEqual(len(noise), 4)
        self.assertTrue(all(instruction.channel.kind == NoiseChannelEnum.BELL_DEPOL2 for instruction in noise))
        self.assertEqual(len(noise[0].targets), 12)

    def test_plain_patch_has_no_bell_noise(self):
        circuit = build_memory_circuit(PatchSpec(3, rounds=2, p=1e-3, p_bell=0.05))
        kinds = set(instruction.channel.kind for instruction in circuit.instructions
                    if instruction.kind == InstructionKindEnum.NOISE)
        self.assertNotIn(NoiseChannelEnum.BELL_DEPOL2, kinds)
        self.assertEqual(circuit.count(InstructionKindEnum.BELL_PREP), 0)

    def test_hook_faults_keep_distance_except_on_naive_seam(self):
        # Given noisy Z memories where every gate and Bell pair can fail
        keeping = [
            PatchSpec(5, rounds=2, p=1e-3),
            PatchSpec(5, rounds=2, variant=PatchVariantEnum.SEAM, p=1e-3, p_bell=1e-2),
            PatchSpec(3, rounds=2, variant=PatchVariantEnum.MULTISEAM, p=1e-3, p_bell=1e-2),
        ]
        naive = PatchSpec(5, rounds=2, variant=PatchVariantEnum.NAIVE_SEAM, p=1e-3, p_bell=1e-2)

        # When each X fault on an X-check ancilla is propagated to the data
        # Then no fault leaves two X errors in one data column, which is where the flipping logical lies
        for spec in keeping:
            self.assertEqual(_worst_hook_column_load(build_circuit(spec), build_layout(spec)), 1)

        # Except on the naive seam, where one Bell half spreads its error down a column
        self.assertEqual(_worst_hook_column_load(build_circuit(naive), build_layout(naive)), 2)

    def test_builders_check_variant(self):
        with self.assertRaisesRegex(InvalidPatchSpecError, 'expected a plain patch'):
            build_memory_circuit(PatchSpec(3, variant=PatchVariantEnum.SEAM))
        with self.assertRaises(InvalidPatchSpecError):
            build_naive_seam_circuit(PatchSpec(3))
        with self.assertRaises(InvalidPatchSpecError):
            build_multiseam_circuit(PatchSpec(3))


if __name__ == '__main__':
    unittest.main()
