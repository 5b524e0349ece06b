#!/usr/bin/env python
# -*- coding: utf-8 -*-
from __future__ import absolute_import
from __future__ import unicode_literals

import unittest

import numpy as np

from distqec.pauli_core import PauliString
from distqec.sv_oracle import HADAMARD, PHASE, DenseState, InvalidOperatorError, LocalOperator, \
    projective_measure, random_dense_state, random_pauli_operator, random_stabilizer_state, teleported_measure


class DenseStateTests(unittest.TestCase):

    def test_from_bits(self):
        state = DenseState.from_bits('01')
        self.assertEqual(state.num_qubits, 2)
        self.assertEqual(state.amplitudes.tolist(), [0, 1, 0, 0])

    def test_gates(self):
        # Given |00>
        state = DenseState.from_bits('00')

        # When a Bell pair is prepared
        state.h(0).cnot(0, 1)

        # Then only |00> and |11> remain
        np.testing.assert_allclose(state.amplitudes, np.array([1, 0, 0, 1]) / np.sqrt(2), atol=1e-12)
        self.assertAlmostEqual(state.fidelity(DenseState.plus(2)), 0.5)

    def test_apply_pauli(self):
        state = DenseState.from_bits('0').apply_pauli(PauliString.from_text('-X0'))
        np.testing.assert_allclose(state.amplitudes, [0, -1], atol=1e-12)

    def test_invalid_vectors(self):
        with self.assertRaisesRegex(ValueError, 'power of two'):
            DenseState(np.ones(3) / np.sqrt(3))
        with self.assertRaisesRegex(ValueError, 'norm'):
            DenseState(np.ones(4))

    def test_random_states_are_normalized(self):
        rng = np.random.default_rng(1)
        self.assertAlmostEqual(random_dense_state(3, rng).norm(), 1.0)
        self.assertAlmostEqual(random_stabilizer_state(3, rng).norm(), 1.0)


class LocalOperatorTests(unittest.TestCase):

    def test_from_pauli(self):
        operator = LocalOperator.from_pauli(PauliString.from_text('-Z1 Z4'))
        self.assertEqual(operator.qubits, (1, 4))
        np.testing.assert_allclose(np.diag(operator.matrix), [-1, 1, 1, -1])

    def test_invalid_operators(self):
        with self.assertRaisesRegex(InvalidOperatorError, 'not Hermitian'):
            LocalOperator(PHASE, [0])
        with self.assertRaisesRegex(InvalidOperatorError, 'expected a 4x4 matrix'):
            LocalOperator(HADAMARD, [0, 1])
        with self.assertRaisesRegex(InvalidOperatorError, 'repeated qubit'):
            LocalOperator(np.eye(4), [2, 2])
        with self.assertRaisesRegex(InvalidOperatorError, 'not unitary'):
            LocalOperator(np.diag([2.0, 0.5]), [0])
        with self.assertRaises(InvalidOperatorError):
            LocalOperator.from_pauli(PauliString())


class TeleportedMeasureTests(unittest.TestCase):

    def _assert_matches_projective(self, operator_a, operator_b, state, bell_unitary=None):
        # When the product is measured directly and through a Bell pair
        direct = projective_measure(operator_a.tensor(operator_b), state)
        teleported = teleported_measure(operator_a, operator_b, state, bell_unitary)

        # Then outcome statistics and post-measurement states agree
        for outcome in (0, 1):
            self.assertAlmostEqual(teleported.branches[outcome].probability, direct[outcome].probability, places=10)
            if direct[outcome].probability > 1e-6:
                self.assertAlmostEqual(teleported.branches[outcome].state.fidelity(direct[outcome].state), 1.0,
                                       places=9)
        # And each ancilla bit on its own is a fair coin
        self.assertAlmostEqual(teleported.bit_marginal(0), 0.5, places=10)
        self.assertAlmostEqual(teleported.bit_marginal(1), 0.5, places=10)

    def test_random_pauli_products(self):
        rng = np.random.default_rng(5)
        for _ in range(150):
            # Given a random state and random Pauli factors on two disjoint qubit pairs
            state = random_dense_state(4, rng)
            self._assert_matches_projective(random_pauli_operator([0, 1], rng), random_pauli_operator([2, 3], rng),
                                            state)

    def test_stabilizer_states(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            state = random_stabilizer_state(4, rng)
            self._assert_matches_projective(random_pauli_operator([0, 2], rng), random_pauli_operator([1], rng),
                                            state)

    def test_zzzz_on_eigenstate(self):
        # Given |0000>, a +1 eigenstate of ZZZZ
        state = DenseState.from_bits('0000')
        z_pair_a = LocalOperator.from_pauli(PauliString.from_text('Z0 Z1'))
        z_pair_b = LocalOperator.from_pauli(PauliString.from_text('Z2 Z3'))

        # When the plaquette is measured through a Bell pair
        result = teleported_measure(z_pair_a, z_pair_b, state)

        # Then the parity is 0 with certainty and the state is untouched
        self.assertAlmostEqual(result.branches[0].probability, 1.0)
        self.assertIsNone(result.branches[1].state)
        self.assertAlmostEqual(result.branches[0].state.fidelity(state), 1.0)

    def test_general_hermitian_unitaries(self):
        rng = np.random.default_rng(13)
        state = random_dense_state(3, rng)
        self._assert_matches_projective(LocalOperator(HADAMARD, [0]),
                                        LocalOperator.from_pauli(PauliString.from_text('X2')), state)

    def test_bell_unitary_is_undone(self):
        rng = np.random.default_rng(21)
        state = random_dense_state(2, rng)
        unitary = HADAMARD.dot(PHASE)
        self._assert_matches_projective(random_pauli_operator([0], rng), random_pauli_operator([1], rng), state,
                                        unitary)

    def test_invalid_requests(self):
        state = DenseState.from_bits('000')
        z0 = LocalOperator.from_pauli(PauliString.from_text('Z0'))
        with self.assertRaisesRegex(InvalidOperatorError, 'overlap'):
            teleported_measure(z0, z0, state)
        with self.assertRaisesRegex(InvalidOperatorError, 'outside a 3-qubit state'):
            teleported_measure(z0, LocalOperator.from_pauli(PauliString.from_text('X5')), state)
        with self.assertRaisesRegex(InvalidOperatorError, 'not unitary'):
            teleported_measure(z0, LocalOperator.from_pauli(PauliString.from_text('X1')), state,
                               np.diag([1.0, 2.0]))


if __name__ == '__main__':
    unittest.main()
