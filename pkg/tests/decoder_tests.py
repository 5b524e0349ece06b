#!/usr/bin/env python
# -*- coding: utf-8 -*-
from __future__ import absolute_import
from __future__ import unicode_literals

import math
import unittest

import numpy as np

from distqec.dem_builder import DemEdge, build_dem
from distqec.decoder import MATCHING_WEIGHT_TOLERANCE, DisconnectedDefectError, MatchingGraph, SyndromeCache, \
    TooManyDefectsError, brute_force_decode, decode_batch, mwpm_decode, observable_bits
from distqec.patch_builder import PatchSpec, PatchVariantEnum, build_circuit


def _chain_graph(length=3, probability=0.1):
    """A line of detectors between two boundaries; only the left boundary edge flips the observable.
    """
    edges = [DemEdge((0,), 1, probability)]
    edges.extend(DemEdge((index, index + 1), 0, probability) for index in range(length - 1))
    edges.append(DemEdge((length - 1,), 0, probability))
    return MatchingGraph(length, edges)


class MatchingGraphTests(unittest.TestCase):

    def test_weights_and_distances(self):
        graph = _chain_graph()
        weight = math.log(9.0)
        self.assertAlmostEqual(graph.edge_between(0, 1)[0], weight)
        self.assertAlmostEqual(graph.distance(0, 2), 2 * weight)
        self.assertAlmostEqual(graph.distance(1, graph.boundary), 2 * weight)
        self.assertEqual(graph.path(0, 2), [0, 1, 2])

    def test_parallel_edges_keep_lighter(self):
        graph = MatchingGraph(2, [DemEdge((0, 1), 0, 0.01), DemEdge((0, 1), 1, 0.2)])
        self.assertEqual(graph.edge_between(1, 0)[1], 1)
        self.assertAlmostEqual(graph.edge_between(0, 1)[0], math.log(4.0))

    def test_clamps_likely_edges(self):
        graph = MatchingGraph(1, [DemEdge((0,), 0, 0.7)])
        weight = graph.edge_between(0, graph.boundary)[0]
        self.assertGreater(weight, 0.0)
        self.assertLess(weight, 1e-6)


class DecodeTests(unittest.TestCase):

    def test_single_defect_goes_to_nearest_boundary(self):
        # Given one defect next to the left boundary
        graph = _chain_graph()

        # When decoded
        prediction, weight = mwpm_decode(graph, [True, False, False])

        # Then it is matched through the left boundary edge, which flips the observable
        self.assertEqual(prediction, 1)
        self.assertAlmostEqual(weight, math.log(9.0))
        self.assertEqual(mwpm_decode(graph, [False, False, True])[0], 0)

    def test_pair_beats_boundaries(self):
        graph = _chain_graph()
        prediction, weight = mwpm_decode(graph, [True, True, False])
        self.assertEqual(prediction, 0)
        self.assertAlmostEqual(weight, math.log(9.0))
        self.assertEqual(brute_force_decode(graph, [True, True, False]), (prediction, weight))

    def test_empty_syndrome(self):
        graph = _chain_graph()
        self.assertEqual(mwpm_decode(graph, [False] * 3), (0, 0.0))
        self.assertEqual(brute_force_decode(graph, [False] * 3), (0, 0.0))

    def test_syndrome_shape(self):
        with self.assertRaisesRegex(ValueError, 'expected'):
            mwpm_decode(_chain_graph(), [True, False])

    def test_disconnected_defect(self):
        # Given a detector with no edges at all
        graph = MatchingGraph(3, [DemEdge((1, 2), 0, 0.1), DemEdge((2,), 0, 0.1)])

        # Then a defect on it cannot be matched
        with self.assertRaisesRegex(DisconnectedDefectError, 'D0'):
            mwpm_decode(graph, [True, False, False])
        with self.assertRaises(DisconnectedDefectError):
            brute_force_decode(graph, [True, False, False])

    def test_brute_force_limit(self):
        graph = _chain_graph(length=11)
        with self.assertRaisesRegex(TooManyDefectsError, 'at most 10'):
            brute_force_decode(graph, [True] * 11)

    def test_matches_brute_force_on_seam_patches(self):
        for d, seed in ((3, 2024), (5, 2025)):
            # Given the matching graph of a noisy seam patch
            spec = PatchSpec(d, rounds=3, variant=PatchVariantEnum.SEAM, p=1e-3, p_bell=1e-2)
            graph = MatchingGraph.from_dem(build_dem(build_circuit(spec)))
            rng = np.random.default_rng(seed)

            for _ in range(1000):
                # When a random syndrome with up to eight defects is decoded both ways
                syndrome = np.zeros(graph.num_detectors, dtype=np.bool_)
                count = int(rng.integers(1, 9))
                syndrome[rng.choice(graph.num_detectors, size=count, replace=False)] = True
                _, matched_weight = mwpm_decode(graph, syndrome)
                _, best_weight = brute_force_decode(graph, syndrome)

                # Then the matching is optimal up to the integer weight rounding
                self.assertAlmostEqual(matched_weight, best_weight, delta=count * MATCHING_WEIGHT_TOLERANCE,
                                       msg='d={0}'.format(d))

    def test_near_ties_stay_within_tolerance(self):
        # Given two defects whose pairing edge is lighter than their two boundary edges by only 2e-8
        pair_weight = math.log(9.0)
        boundary_probability = 1.0 / (1.0 + math.exp(pair_weight / 2.0 + 1e-8))
        graph = MatchingGraph(2, [DemEdge((0, 1), 0, 0.1), DemEdge((0,), 1, boundary_probability),
                                  DemEdge((1,), 0, boundary_probability)])
        syndrome = [True, True]

        # When decoded by matching and exhaustively
        _, matched_weight = mwpm_decode(graph, syndrome)
        best_prediction, best_weight = brute_force_decode(graph, syndrome)

        # Then the exhaustive search resolves the tie exactly and matching stays within its documented tolerance
        self.assertEqual(best_prediction, 0)
        self.assertAlmostEqual(best_weight, pair_weight, places=12)
        self.assertAlmostEqual(matched_weight, best_weight, delta=2 * MATCHING_WEIGHT_TOLERANCE)


class DecodeBatchTests(unittest.TestCase):

    def test_batch_with_cache(self):
        # Given repeated syndromes
        graph = _chain_graph()
        detectors = np.array([[True, False, False], [True, False, False], [False, False, False],
                              [False, False, True]], dtype=np.bool_)
        cache = SyndromeCache()

        # When decoded as a batch
        predictions = decode_batch(graph, detectors, cache)

        # Then each distinct syndrome is matched once
        self.assertEqual(predictions.tolist(), [1, 1, 0, 0])
        self.assertEqual((cache.hits, cache.misses), (1, 2))
        self.assertEqual(observable_bits(predictions, 1).tolist(), [[True], [True], [False], [False]])

    def test_cache_eviction(self):
        cache = SyndromeCache(max_size=1)
        cache.put(b'a', 1)
        cache.put(b'b', 0)
        self.assertIsNone(cache.get(b'a'))
        self.assertEqual(cache.get(b'b'), 0)


if __name__ == '__main__':
    unittest.main()
