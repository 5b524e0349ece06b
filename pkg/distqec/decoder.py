# -*- coding: utf-8 -*-
from __future__ import absolute_import
from __future__ import unicode_literals

import logging
import math
import threading
from collections import OrderedDict
from typing import Dict, List, Optional, Sequence, Text, Tuple

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from distqec.dem_builder import DemEdge, DetectorErrorModel


_logger = logging.getLogger(__name__)


MAX_BRUTE_FORCE_DEFECTS = 10

# networkx matches on integer weights; path weights are scaled by this factor before rounding
_MATCHING_WEIGHT_SCALE = 1e6
# Rounding error bound on a matching total, per matched defect
MATCHING_WEIGHT_TOLERANCE = 1.0 / _MATCHING_WEIGHT_SCALE
_TIE_TOLERANCE = 1e-9
_MAX_EDGE_PROBABILITY = 0.5 - 1e-9


class DisconnectedDefectError(RuntimeError):
    ERROR_MSG = 'Defect at detector D{0} has no path to another defect or to the boundary.'

    def __init__(self, detector):
        # type: (int) -> None
        self.detector = detector

    def __str__(self):
        return self.ERROR_MSG.format(self.detector)


class TooManyDefectsError(ValueError):
    ERROR_MSG = 'Brute-force decoding handles at most {0} defects, got {1}.'

    def __init__(self, num_defects):
        # type: (int) -> None
        self.num_defects = num_defects

    def __str__(self):
        return self.ERROR_MSG.format(MAX_BRUTE_FORCE_DEFECTS, self.num_defects)


class MatchingGraph(object):
    """Detectors plus one virtual boundary node, weighted by ln((1-p)/p), each edge carrying an observable mask.

    Parallel edges keep the lighter one. Shortest paths are computed lazily per source and cached.
    """

    def __init__(self, num_detectors, edges):
        # type: (int, Sequence[DemEdge]) -> None
        self.num_detectors = num_detectors
        self.boundary = num_detectors
        self.num_nodes = num_detectors + 1
        self._edges = {}  # type: Dict[Tuple[int, int], Tuple[float, int]]
        for edge in edges:
            probability = edge.probability
            if probability > _MAX_EDGE_PROBABILITY:
                _logger.warning('Clamping edge %r with probability %.3f below 1/2', edge, probability)
                probability = _MAX_EDGE_PROBABILITY
            weight = math.log((1.0 - probability) / probability)
            first = edge.detectors[0]
            second = edge.detectors[1] if len(edge.detectors) == 2 else self.boundary
            key = (min(first, second), max(first, second))
            if key not in self._edges or weight < self._edges[key][0]:
                self._edges[key] = (weight, edge.observables)

        rows = [key[0] for key in self._edges] + [key[1] for key in self._edges]
        cols = [key[1] for key in self._edges] + [key[0] for key in self._edges]
        weights = [value[0] for value in self._edges.values()] * 2
        self._adjacency = csr_matrix((weights, (rows, cols)), shape=(self.num_nodes, self.num_nodes))
        self._distances = {}  # type: Dict[int, np.ndarray]
        self._lock = threading.Lock()

    @classmethod
    def from_dem(cls, dem):
        # type: (DetectorErrorModel) -> MatchingGraph
        return cls(dem.num_detectors, dem.edges())

    @property
    def edges(self):
        # type: () -> Dict[Tuple[int, int], Tuple[float, int]]
        return dict(self._edges)

    def edge_between(self, first, second):
        # type: (int, int) -> Optional[Tuple[float, int]]
        return self._edges.get((min(first, second), max(first, second)))

    def distances_from(self, source):
        # type: (int) -> np.ndarray
        with self._lock:
            cached = self._distances.get(source)
        if cached is not None:
            return cached
        distances = dijkstra(self._adjacency, directed=False, indices=source)
        with self._lock:
            self._distances[source] = distances
        return distances

    def prefetch(self, sources):
        # type: (Sequence[int]) -> None
        """Run Dijkstra from every uncached source in one batch.
        """
        with self._lock:
            missing = sorted(set(source for source in sources if source not in self._distances))
        if not missing:
            return
        distances = dijkstra(self._adjacency, directed=False, indices=missing)
        with self._lock:
            for source, row in zip(missing, distances):
                self._distances[source] = row

    def distance(self, first, second):
        # type: (int, int) -> float
        return float(self.distances_from(first)[second])

    def path(self, source, target):
        # type: (int, int) -> List[int]
        """Lexicographically smallest node sequence among the shortest paths from source to target.
        """
        total = self.distance(source, target)
        if math.isinf(total):
            raise DisconnectedDefectError(source)
        to_target = self.distances_from(target)
        from_source = self.distances_from(source)
        indptr, indices, data = self._adjacency.indptr, self._adjacency.indices, self._adjacency.data
        nodes = [source]
        current = source
        while current != target:
            start, stop = indptr[current], indptr[current + 1]
            tolerance = _TIE_TOLERANCE * max(1.0, abs(total))
            on_path = [int(neighbor) for neighbor, weight in zip(indices[start:stop], data[start:stop])
                       if abs(from_source[current] + weight + to_target[neighbor] - total) <= tolerance
                       and from_source[neighbor] > from_source[current]]
            current = min(on_path)
            nodes.append(current)
        return nodes

    def path_observables(self, source, target):
        # type: (int, int) -> int
        mask = 0
        nodes = self.path(source, target)
        for first, second in zip(nodes, nodes[1:]):
            mask ^= self.edge_between(first, second)[1]
        return mask


def _defects(graph, syndrome):
    # type: (MatchingGraph, Sequence[bool]) -> List[int]
    bits = np.asarray(syndrome, dtype=np.bool_)
    if bits.shape != (graph.num_detectors,):
        raise ValueError('Syndrome has shape {0}, expected ({1},)'.format(bits.shape, graph.num_detectors))
    return [int(index) for index in np.flatnonzero(bits)]


def mwpm_decode(graph, syndrome):
    # type: (MatchingGraph, Sequence[bool]) -> Tuple[int, float]
    """Minimum-weight perfect matching of the defects, the boundary absorbing any of them.

    Returns the predicted observable mask and the total weight of the matching. Path weights are rounded to
    multiples of 1e-6 for networkx, so the total exceeds the exact optimum by at most MATCHING_WEIGHT_TOLERANCE per
    defect; matchings closer than that are ties.
    """
    defects = _defects(graph, syndrome)
    if not defects:
        return 0, 0.0
    graph.prefetch(defects + [graph.boundary])

    # Each defect i gets a boundary twin b_i; twins pair freely among themselves at zero cost
    weighted_edges = []  # type: List[Tuple[Tuple[Text, int], Tuple[Text, int], int]]
    for position, defect in enumerate(defects):
        distances = graph.distances_from(defect)
        reachable = [distances[other] for other in defects if other != defect] + [distances[graph.boundary]]
        if all(math.isinf(weight) for weight in reachable):
            raise DisconnectedDefectError(defect)
        for other_position in range(position + 1, len(defects)):
            weight = distances[defects[other_position]]
            if not math.isinf(weight):
                weighted_edges.append((('d', position), ('d', other_position),
                                       int(round(weight * _MATCHING_WEIGHT_SCALE))))
        if not math.isinf(distances[graph.boundary]):
            weighted_edges.append((('d', position), ('b', position),
                                   int(round(distances[graph.boundary] * _MATCHING_WEIGHT_SCALE))))
        for other_position in range(position):
            weighted_edges.append((('b', other_position), ('b', position), 0))

    # A maximum-cardinality matching maximizing (ceiling - weight) minimizes the total weight
    ceiling = max(weight for _, _, weight in weighted_edges) + 1
    matching_graph = nx.Graph()
    matching_graph.add_weighted_edges_from((first, second, ceiling - weight)
                                           for first, second, weight in weighted_edges)
    matching = nx.max_weight_matching(matching_graph, maxcardinality=True)

    prediction = 0
    total = 0.0
    matched = set()
    for first, second in matching:
        if first[0] == 'b' and second[0] == 'b':
            continue
        if first[0] == 'b':
            first, second = second, first
        source = defects[first[1]]
        target = graph.boundary if second[0] == 'b' else defects[second[1]]
        matched.add(first[1])
        if second[0] == 'd':
            matched.add(second[1])
        total += graph.distance(source, target)
        prediction ^= graph.path_observables(source, target)
    for position, defect in enumerate(defects):
        if position not in matched:
            raise DisconnectedDefectError(defect)
    return prediction, total


def brute_force_decode(graph, syndrome):
    # type: (MatchingGraph, Sequence[bool]) -> Tuple[int, float]
    """Exhaustive minimum over all pairings and boundary assignments of at most ten defects.
    """
    defects = _defects(graph, syndrome)
    if len(defects) > MAX_BRUTE_FORCE_DEFECTS:
        raise TooManyDefectsError(len(defects))
    if not defects:
        return 0, 0.0
    graph.prefetch(defects + [graph.boundary])
    size = len(defects)
    full = (1 << size) - 1
    best = [math.inf] * (1 << size)
    choice = [None] * (1 << size)  # type: List[Optional[Tuple[int, int]]]
    best[0] = 0.0
    for mask in range(1, full + 1):
        lowest = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << lowest)
        candidate = best[rest] + graph.distance(defects[lowest], graph.boundary)
        if candidate < best[mask]:
            best[mask], choice[mask] = candidate, (lowest, -1)
        for partner in range(lowest + 1, size):
            if not rest & (1 << partner):
                continue
            candidate = best[rest & ~(1 << partner)] + graph.distance(defects[lowest], defects[partner])
            if candidate < best[mask]:
                best[mask], choice[mask] = candidate, (lowest, partner)
    if math.isinf(best[full]):
        raise DisconnectedDefectError(defects[0])

    prediction = 0
    mask = full
    while mask:
        lowest, partner = choice[mask]
        target = graph.boundary if partner < 0 else defects[partner]
        prediction ^= graph.path_observables(defects[lowest], target)
        mask &= ~(1 << lowest)
        if partner >= 0:
            mask &= ~(1 << partner)
    return prediction, best[full]


class SyndromeCache(object):
    """Least-recently-used memo of syndrome -> prediction.
    """

    def __init__(self, max_size=65536):
        # type: (int) -> None
        self.max_size = max_size
        self._entries = OrderedDict()  # type: OrderedDict
        self.hits = 0
        self.misses = 0

    def get(self, key):
        # type: (bytes) -> Optional[int]
        value = self._entries.get(key)
        if value is None:
            self.misses += 1
            return None
        self.hits += 1
        self._entries.move_to_end(key)
        return value

    def put(self, key, value):
        # type: (bytes, int) -> None
        self._entries[key] = value
        self._entries.move_to_end(key)
        if len(self._entries) > self.max_size:
            self._entries.popitem(last=False)


def decode_batch(graph, detectors, cache=None):
    # type: (MatchingGraph, np.ndarray, Optional[SyndromeCache]) -> np.ndarray
    """Predicted observable masks for a (shots, detectors) bool matrix.
    """
    cache = cache if cache is not None else SyndromeCache()
    predictions = np.zeros(detectors.shape[0], dtype=np.uint64)
    for shot, syndrome in enumerate(detectors):
        if not syndrome.any():
            continue
        key = np.packbits(syndrome).tobytes()
        prediction = cache.get(key)
        if prediction is None:
            prediction, _ = mwpm_decode(graph, syndrome)
            cache.put(key, prediction)
        predictions[shot] = prediction
    _logger.debug('Decoded %d shots (%d cache hits, %d misses)', detectors.shape[0], cache.hits, cache.misses)
    return predictions


def observable_bits(masks, num_observables):
    # type: (np.ndarray, int) -> np.ndarray
    """Expand observable masks into a (shots, observables) bool matrix.
    """
    masks = np.asarray(masks, dtype=np.uint64)
    columns = [(masks >> np.uint64(index)) & np.uint64(1) for index in range(num_observables)]
    if not columns:
        return np.zeros((masks.shape[0], 0), dtype=np.bool_)
    return np.stack(columns, axis=1).astype(np.bool_)
