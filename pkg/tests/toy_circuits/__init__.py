# -*- coding: utf-8 -*-
from __future__ import absolute_import
from __future__ import unicode_literals

from typing import List

from distqec.circuit_ir import Circuit, CircuitBuilder, InstructionKindEnum, NoiseChannelEnum


# Small hand-built circuits shared by the test modules


def bell_pair_circuit(basis='Z', p_bell=0.0):
    # type: (str, float) -> Circuit
    """A Bell pair measured on both halves in one basis, with the parity of the two outcomes as its detector.
    """
    builder = CircuitBuilder()
    builder.gate(InstructionKindEnum.R, [0, 1])
    builder.tick()
    builder.gate(InstructionKindEnum.BELL_PREP, [0, 1])
    builder.noise(NoiseChannelEnum.BELL_DEPOL2, p_bell, [0, 1])
    builder.tick()
    kind = InstructionKindEnum.MZ if basis == 'Z' else InstructionKindEnum.MX
    outcomes = builder.measure(kind, [0, 1])
    builder.detector(outcomes, (0, 0, 0))
    return builder.build()


def random_outcome_circuit():
    # type: () -> Circuit
    """A detector on the outcome of measuring |+> in the Z basis: not deterministic.
    """
    builder = CircuitBuilder()
    builder.gate(InstructionKindEnum.R, [0])
    builder.tick()
    builder.gate(InstructionKindEnum.H, [0])
    builder.tick()
    outcome = builder.measure(InstructionKindEnum.MZ, [0])
    builder.detector(outcome, (0, 0, 0))
    return builder.build()


def repetition_code_circuit(distance=3, rounds=2, p=0.0, measurement_p=0.0):
    # type: (int, int, float, float) -> Circuit
    """Bit-flip repetition code memory: data qubits 0..d-1, ZZ parity ancillas d..2d-2.

    Data qubits suffer X errors with probability p before every round and ancilla outcomes are flipped with
    probability measurement_p. Observable 0 is the final outcome of data qubit 0.
    """
    data = list(range(distance))
    ancillas = list(range(distance, 2 * distance - 1))
    builder = CircuitBuilder()
    builder.gate(InstructionKindEnum.R, data + ancillas)
    builder.tick()
    previous = None  # type: List[int]
    for round_index in range(rounds):
        builder.noise(NoiseChannelEnum.ERRX, p, data)
        builder.gate(InstructionKindEnum.CNOT, [value for pair in zip(data[:-1], ancillas) for value in pair])
        builder.tick()
        builder.gate(InstructionKindEnum.CNOT, [value for pair in zip(data[1:], ancillas) for value in pair])
        builder.tick()
        builder.noise(NoiseChannelEnum.ERRX, measurement_p, ancillas)
        current = builder.measure(InstructionKindEnum.MZ, ancillas)
        builder.tick()
        for position, measurement in enumerate(current):
            sources = [measurement] if previous is None else [measurement, previous[position]]
            builder.detector(sources, (2 * position + 1, 0, round_index))
        builder.gate(InstructionKindEnum.R, ancillas)
        builder.tick()
        previous = current
    final = builder.measure(InstructionKindEnum.MZ, data)
    for position in range(distance - 1):
        builder.detector([final[position], final[position + 1], previous[position]],
                         (2 * position + 1, 0, rounds))
    builder.observable(0, [final[0]])
    return builder.build()
