# -*- coding: utf-8 -*-
from __future__ import absolute_import
from __future__ import unicode_literals

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, Iterable, List, Optional, Sequence, Text, Tuple

import numpy as np

from distqec.circuit_ir import Circuit, InstructionKindEnum, channel_pauli_terms
from distqec.decoder import MatchingGraph, SyndromeCache, decode_batch, observable_bits
from distqec.dem_builder import build_dem
from distqec.patch_builder import MemoryBasisEnum, PatchSpec, PatchVariantEnum, build_circuit
from distqec.pauli_core import PauliFrame, tableau_reference, unpack_words


_logger = logging.getLogger(__name__)


BLOCK_SHOTS = 1024
THREADS_ENV_VAR = 'DISTQEC_THREADS'
SEED_LIMIT = 1 << 64

CSV_SCHEMA_LINE = '# distqec simulate v1'
CSV_FIELDS = ('variant', 'd', 'p', 'p_Bell', 'basis', 'shots', 'failures', 'p_L', 'sigma', 'seed')


class InvalidSamplingRequestError(ValueError):
    ERROR_MSG = 'Invalid sampling request: {0}.'

    def __init__(self, reason):
        # type: (Text) -> None
        self.reason = reason

    def __str__(self):
        return self.ERROR_MSG.format(self.reason)


class SimulationCsvError(IOError):
    ERROR_MSG = 'Cannot read simulation results, line {0}: {1}.'

    def __init__(self, line_number, reason):
        # type: (int, Text) -> None
        self.line_number = line_number
        self.reason = reason

    def __str__(self):
        return self.ERROR_MSG.format(self.line_number, self.reason)


def default_threads():
    # type: () -> int
    """Worker count from DISTQEC_THREADS, else the CPU count.
    """
    value = os.environ.get(THREADS_ENV_VAR)
    if value is None:
        return os.cpu_count() or 1
    try:
        threads = int(value)
    except ValueError:
        raise InvalidSamplingRequestError('{0}={1!r} is not an integer'.format(THREADS_ENV_VAR, value))
    if threads < 1:
        raise InvalidSamplingRequestError('{0} must be at least 1, got {1}'.format(THREADS_ENV_VAR, threads))
    return threads


def per_round_rate(p_l_k, rounds):
    # type: (float, int) -> float
    """Per-round logical error rate from the failure fraction of a k-round memory experiment.
    """
    return 1.0 - (1.0 - p_l_k) ** (1.0 / rounds)


def per_round_sigma(p_l_k, rounds, shots):
    # type: (float, int, int) -> float
    if p_l_k >= 1.0:
        return math.inf
    binomial = math.sqrt(p_l_k * (1.0 - p_l_k) / shots)
    return binomial / (rounds * (1.0 - p_l_k) ** (1.0 - 1.0 / rounds))


class SampleStats(object):
    """Logical failure count of one memory experiment and the per-round rate derived from it.
    """

    def __init__(self, shots, rounds, failures, seed=None, basis=None):
        # type: (int, int, int, Optional[int], Optional[MemoryBasisEnum]) -> None
        if shots < 1 or rounds < 1 or not 0 <= failures <= shots:
            raise InvalidSamplingRequestError('need shots >= 1, rounds >= 1 and 0 <= failures <= shots, got {0}, '
                                              '{1}, {2}'.format(shots, rounds, failures))
        self.shots = shots
        self.rounds = rounds
        self.failures = failures
        self.seed = seed
        self.basis = basis

    @property
    def p_l_k(self):
        # type: () -> float
        return self.failures / float(self.shots)

    @property
    def p_l(self):
        # type: () -> float
        return per_round_rate(self.p_l_k, self.rounds)

    @property
    def sigma(self):
        # type: () -> float
        return per_round_sigma(self.p_l_k, self.rounds, self.shots)

    def merge(self, other):
        # type: (SampleStats) -> SampleStats
        if other.rounds != self.rounds:
            raise InvalidSamplingRequestError('cannot merge {0}-round and {1}-round statistics'.format(
                self.rounds, other.rounds))
        return SampleStats(self.shots + other.shots, self.rounds, self.failures + other.failures, self.seed,
                           self.basis)

    def __repr__(self):
        return 'SampleStats(shots={0}, rounds={1}, failures={2}, p_L={3:.3e}, sigma={4:.3e})'.format(
            self.shots, self.rounds, self.failures, self.p_l, self.sigma)


class CombinedStats(object):
    """Storage error rate P_L = P_L^X + P_L^Z from a |+> and a |0> memory experiment.
    """

    def __init__(self, stats_x, stats_z):
        # type: (SampleStats, SampleStats) -> None
        self.stats_x = stats_x
        self.stats_z = stats_z

    @property
    def p_l(self):
        # type: () -> float
        return self.stats_x.p_l + self.stats_z.p_l

    @property
    def sigma(self):
        # type: () -> float
        return math.hypot(self.stats_x.sigma, self.stats_z.sigma)


def combine_bases(stats_x, stats_z):
    # type: (SampleStats, SampleStats) -> CombinedStats
    return CombinedStats(stats_x, stats_z)


class _NoisePlan(object):
    """Cumulative term probabilities and per-term Pauli masks of one noise instruction.
    """

    def __init__(self, instruction):
        self.arity = instruction.channel.arity
        targets = np.asarray(instruction.targets, dtype=np.intp)
        self.qubits = [targets[local::self.arity] for local in range(self.arity)]
        self.terms = []  # type: List[Tuple[float, float, Any]]
        cumulative = 0.0
        for pauli, probability in channel_pauli_terms(instruction.channel):
            self.terms.append((cumulative, cumulative + probability, pauli))
            cumulative += probability
        self.total = cumulative


class FrameSampler(object):
    """Samples detector and observable bits of a circuit by Pauli-frame propagation against a noiseless reference.
    """

    def __init__(self, circuit):
        # type: (Circuit) -> None
        self.circuit = circuit
        self.reference = tableau_reference(circuit.without_noise())
        self._plans = {}  # type: Dict[int, _NoisePlan]
        self._targets = {}  # type: Dict[int, np.ndarray]
        for index, instruction in enumerate(circuit.instructions):
            if instruction.kind == InstructionKindEnum.NOISE:
                self._plans[index] = _NoisePlan(instruction)
            else:
                self._targets[index] = np.asarray(instruction.targets, dtype=np.intp)

    def sample_block(self, rng, num_shots):
        # type: (np.random.Generator, int) -> Tuple[np.ndarray, np.ndarray]
        """(shots, detectors) and (shots, observables) bool matrices for one block.
        """
        circuit = self.circuit
        frame = PauliFrame(circuit.num_qubits, num_shots, rng)
        num_bits = frame.num_words * 64
        record = np.zeros((circuit.num_measurements, frame.num_words), dtype=np.uint64)
        detectors = np.zeros((circuit.num_detectors, frame.num_words), dtype=np.uint64)
        observables = np.zeros((circuit.num_observables, frame.num_words), dtype=np.uint64)
        num_measured = 0
        num_detectors = 0

        for index, instruction in enumerate(circuit.instructions):
            kind = instruction.kind
            if kind == InstructionKindEnum.NOISE:
                self._apply_noise(frame, self._plans[index], rng, num_bits)
                continue
            targets = self._targets[index]
            if kind == InstructionKindEnum.H:
                frame.h(targets)
            elif kind == InstructionKindEnum.CNOT:
                frame.cnot(targets[0::2], targets[1::2])
            elif kind == InstructionKindEnum.BELL_PREP:
                frame.bell_prep(targets[0::2], targets[1::2])
            elif kind == InstructionKindEnum.R:
                frame.reset(targets)
            elif kind == InstructionKindEnum.MZ:
                record[num_measured:num_measured + len(targets)] = frame.measure_z(targets)
                num_measured += len(targets)
            elif kind == InstructionKindEnum.MX:
                record[num_measured:num_measured + len(targets)] = frame.measure_x(targets)
                num_measured += len(targets)
            elif kind == InstructionKindEnum.DETECTOR:
                detectors[num_detectors] = np.bitwise_xor.reduce(record[targets], axis=0)
                num_detectors += 1
            elif kind == InstructionKindEnum.OBSERVABLE_INCLUDE:
                observables[instruction.observable] ^= np.bitwise_xor.reduce(record[targets], axis=0)

        detector_bits = unpack_words(detectors, num_shots).T ^ self.reference.detectors
        observable_bits_ = unpack_words(observables, num_shots).T ^ self.reference.observables
        return detector_bits, observable_bits_

    @staticmethod
    def _apply_noise(frame, plan, rng, num_bits):
        # type: (PauliFrame, _NoisePlan, np.random.Generator, int) -> None
        draws = rng.random((len(plan.qubits[0]), num_bits))
        hit_any = draws < plan.total
        if not hit_any.any():
            return
        for low, high, pauli in plan.terms:
            hits = hit_any & (draws >= low) & (draws < high)
            if not hits.any():
                continue
            words = np.packbits(hits, axis=1, bitorder='little').view(np.uint64)
            for local in pauli.x_support:
                frame.x[plan.qubits[local]] ^= words
            for local in pauli.z_support:
                frame.z[plan.qubits[local]] ^= words


def _check_seed(seed):
    # type: (int) -> None
    if not 0 <= seed < SEED_LIMIT:
        raise InvalidSamplingRequestError('seed must lie in [0, 2**64), got {0}'.format(seed))


def block_rng(seed, block_index):
    # type: (int, int) -> np.random.Generator
    """Counter-based generator keyed by the master seed and the block index.
    """
    return np.random.Generator(np.random.Philox(key=seed + (block_index << 64)))


def _block_sizes(shots):
    # type: (int) -> List[int]
    full, rest = divmod(shots, BLOCK_SHOTS)
    return [BLOCK_SHOTS] * full + ([rest] if rest else [])


def _run_blocks(function, shots, threads):
    # type: (Any, int, Optional[int]) -> List[Any]
    sizes = _block_sizes(shots)
    threads = threads or default_threads()
    if threads == 1 or len(sizes) == 1:
        return [function(block_index, size) for block_index, size in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(function, range(len(sizes)), sizes))


def sample_detectors(circuit, shots, seed, threads=None):
    # type: (Circuit, int, int, Optional[int]) -> Tuple[np.ndarray, np.ndarray]
    """Sample (shots, detectors) and (shots, observables) bool matrices.

    The result depends only on the circuit, the shot count and the seed, never on the number of threads.
    """
    if shots < 1:
        raise InvalidSamplingRequestError('shots must be positive, got {0}'.format(shots))
    _check_seed(seed)
    sampler = FrameSampler(circuit)

    def run_block(block_index, size):
        return sampler.sample_block(block_rng(seed, block_index), size)

    results = _run_blocks(run_block, shots, threads)
    detectors = np.concatenate([result[0] for result in results], axis=0)
    observables = np.concatenate([result[1] for result in results], axis=0)
    _logger.debug('Sampled %d shots in %d blocks', shots, len(results))
    return detectors, observables


def count_failures(circuit, graph, shots, seed, threads=None):
    # type: (Circuit, MatchingGraph, int, int, Optional[int]) -> int
    """Number of shots whose decoded observable prediction differs from the sampled observable.
    """
    if circuit.num_observables != 1:
        raise InvalidSamplingRequestError('logical error estimation needs exactly one observable, got {0}'.format(
            circuit.num_observables))
    if shots < 1:
        raise InvalidSamplingRequestError('shots must be positive, got {0}'.format(shots))
    _check_seed(seed)
    sampler = FrameSampler(circuit)

    def run_block(block_index, size):
        detectors, observables = sampler.sample_block(block_rng(seed, block_index), size)
        predictions = observable_bits(decode_batch(graph, detectors, SyndromeCache()), 1)
        return int(np.count_nonzero(predictions[:, 0] != observables[:, 0]))

    return sum(_run_blocks(run_block, shots, threads))


def estimate_logical_rate(circuit, shots, seed, rounds=None, threads=None, basis=None):
    # type: (Circuit, int, int, Optional[int], Optional[int], Optional[MemoryBasisEnum]) -> SampleStats
    """Decode every sampled shot with minimum-weight matching and derive the per-round logical error rate.

    rounds defaults to the number of distinct detector time coordinates minus one.
    """
    dem = build_dem(circuit)
    graph = MatchingGraph.from_dem(dem)
    if rounds is None:
        rounds = max(1, len(set(coords[-1] for coords in dem.detector_coords if coords)) - 1)
    failures = count_failures(circuit, graph, shots, seed, threads)
    stats = SampleStats(shots, rounds, failures, seed, basis)
    _logger.info('Estimated %r', stats)
    return stats


class GridPoint(object):
    """One simulated (variant, d, p, p_Bell, basis) point and its statistics.
    """

    def __init__(self, spec, stats):
        # type: (PatchSpec, SampleStats) -> None
        self.spec = spec
        self.stats = stats

    def to_row(self):
        # type: () -> Dict[Text, Text]
        return {
            'variant': self.spec.variant.value,
            'd': str(self.spec.d),
            'p': repr(self.spec.p),
            'p_Bell': repr(self.spec.p_bell),
            'basis': self.spec.basis.value,
            'shots': str(self.stats.shots),
            'failures': str(self.stats.failures),
            'p_L': repr(self.stats.p_l),
            'sigma': repr(self.stats.sigma),
            'seed': str(self.stats.seed),
        }


def simulate_spec(spec, shots, seed, threads=None):
    # type: (PatchSpec, int, int, Optional[int]) -> GridPoint
    circuit = build_circuit(spec)
    stats = estimate_logical_rate(circuit, shots, seed, rounds=spec.rounds, threads=threads, basis=spec.basis)
    return GridPoint(spec, stats)


def run_grid(specs, shots, seed, threads=None):
    # type: (Iterable[PatchSpec], int, int, Optional[int]) -> List[GridPoint]
    """Simulate every spec of a grid; point i uses seed + i so that points are independent.
    """
    points = []
    for offset, spec in enumerate(specs):
        point = simulate_spec(spec, shots, (seed + offset) % SEED_LIMIT, threads)
        _logger.info('Grid point %d: %s d=%d p=%g p_Bell=%g basis=%s -> %d/%d failures', offset,
                     spec.variant.value, spec.d, spec.p, spec.p_bell, spec.basis.value, point.stats.failures,
                     point.stats.shots)
        points.append(point)
    return points


def write_results_csv(points, stream):
    # type: (Sequence[GridPoint], Any) -> None
    stream.write(CSV_SCHEMA_LINE + '\n')
    writer = csv.DictWriter(stream, fieldnames=CSV_FIELDS, lineterminator='\n')
    writer.writeheader()
    for point in points:
        writer.writerow(point.to_row())


def results_csv_text(points):
    # type: (Sequence[GridPoint]) -> Text
    buffer = io.StringIO()
    write_results_csv(points, buffer)
    return buffer.getvalue()


def read_results_csv(stream):
    # type: (Any) -> List[Dict[Text, Any]]
    """Rows of a simulate CSV with numeric fields converted.
    """
    lines = stream.read().splitlines()
    if not lines or lines[0].strip() != CSV_SCHEMA_LINE:
        raise SimulationCsvError(1, 'missing schema line {0!r}'.format(CSV_SCHEMA_LINE))
    reader = csv.DictReader(lines[1:])
    if tuple(reader.fieldnames or ()) != CSV_FIELDS:
        raise SimulationCsvError(2, 'unexpected columns {0}'.format(reader.fieldnames))
    rows = []
    for line_number, row in enumerate(reader, start=3):
        try:
            rows.append({
                'variant': row['variant'],
                'd': int(row['d']),
                'p': float(row['p']),
                'p_Bell': float(row['p_Bell']),
                'basis': row['basis'],
                'shots': int(row['shots']),
                'failures': int(row['failures']),
                'p_L': float(row['p_L']),
                'sigma': float(row['sigma']),
                'seed': int(row['seed']) if row['seed'] not in ('', 'None') else None,
            })
        except (TypeError, ValueError) as error:
            raise SimulationCsvError(line_number, str(error))
    return rows


class ExperimentGrid(object):
    """A product grid of memory experiments: variants x d x p x p_Bell x bases.

    rounds_per_d sets rounds = rounds_per_d * d unless a fixed rounds value is given.
    """

    _FIELDS = ('variants', 'd', 'p', 'p_bell', 'bases', 'rounds', 'rounds_per_d', 'seam_offset', 'shots', 'seed')

    def __init__(self, variants, distances, p_values, p_bell_values, bases=('Z', 'X'), rounds=None,
                 rounds_per_d=3, seam_offset=0, shots=None, seed=None):
        # type: (Sequence[Text], Sequence[int], Sequence[float], Sequence[float], Sequence[Text], Optional[int], int, int, Optional[int], Optional[int]) -> None
        for name, values in (('variants', variants), ('d', distances), ('p', p_values), ('p_bell', p_bell_values),
                             ('bases', bases)):
            if not values:
                raise InvalidSamplingRequestError('grid field {0} is empty'.format(name))
        self.variants = [PatchVariantEnum(variant) for variant in variants]
        self.distances = [int(d) for d in distances]
        self.p_values = [float(p) for p in p_values]
        self.p_bell_values = [float(p_bell) for p_bell in p_bell_values]
        self.bases = [MemoryBasisEnum(basis) for basis in bases]
        self.rounds = rounds
        self.rounds_per_d = rounds_per_d
        self.seam_offset = seam_offset
        self.shots = shots
        self.seed = seed
        # Validates every point up front
        self.specs()

    @classmethod
    def from_dict(cls, document):
        # type: (Dict[Text, Any]) -> ExperimentGrid
        if not isinstance(document, dict):
            raise InvalidSamplingRequestError('expected a JSON object')
        unknown = set(document) - set(cls._FIELDS)
        if unknown:
            raise InvalidSamplingRequestError('unknown grid fields {0}'.format(', '.join(sorted(unknown))))

        def as_list(name, default=None):
            value = document.get(name, default)
            if value is None:
                raise InvalidSamplingRequestError('missing grid field {0}'.format(name))
            return value if isinstance(value, list) else [value]

        try:
            return cls(
                variants=as_list('variants', ['plain']),
                distances=as_list('d'),
                p_values=as_list('p', [0.0]),
                p_bell_values=as_list('p_bell', [0.0]),
                bases=as_list('bases', ['Z', 'X']),
                rounds=document.get('rounds'),
                rounds_per_d=int(document.get('rounds_per_d', 3)),
                seam_offset=int(document.get('seam_offset', 0)),
                shots=document.get('shots'),
                seed=document.get('seed'),
            )
        except (TypeError, ValueError) as error:
            if isinstance(error, InvalidSamplingRequestError):
                raise
            raise InvalidSamplingRequestError(str(error))

    @classmethod
    def from_json(cls, text):
        # type: (Text) -> ExperimentGrid
        try:
            document = json.loads(text)
        except ValueError as error:
            raise InvalidSamplingRequestError('not a JSON document ({0})'.format(error))
        return cls.from_dict(document)

    def specs(self):
        # type: () -> List[PatchSpec]
        specs = []
        for variant in self.variants:
            for d in self.distances:
                rounds = self.rounds if self.rounds is not None else self.rounds_per_d * d
                for p in self.p_values:
                    for p_bell in self.p_bell_values:
                        for basis in self.bases:
                            specs.append(PatchSpec(d, rounds, basis, variant, p, p_bell, self.seam_offset))
        return specs

    def to_dict(self):
        # type: () -> Dict[Text, Any]
        return {
            'variants': [variant.value for variant in self.variants],
            'd': list(self.distances),
            'p': list(self.p_values),
            'p_bell': list(self.p_bell_values),
            'bases': [basis.value for basis in self.bases],
            'rounds': self.rounds,
            'rounds_per_d': self.rounds_per_d,
            'seam_offset': self.seam_offset,
            'shots': self.shots,
            'seed': self.seed,
        }
