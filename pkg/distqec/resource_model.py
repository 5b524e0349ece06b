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
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Sequence, Text, Tuple

from distqec.ansatz_fit import SEAM_VALIDITY_CEILING, AnsatzParams, SeamBracketEnum, eval_bulk_ansatz, \
    eval_multiseam_ansatz


_logger = logging.getLogger(__name__)


DEFAULT_CYCLE_TIME = 1e-6
DEFAULT_REACTION_TIME = 1e-5
FACTORY_PROCESSORS = 2
TOFFOLI_INJECTION_CNOTS = 4.5
DEFAULT_DISTANCES = tuple(range(21, 63, 2))

DEFAULT_CONFIG_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data', 'estimate_default.json')
CSV_SCHEMA_LINE = '# distqec estimate v1'
CSV_FIELDS = (
    'mode', 'p_Bell', 'cost', 'd', 'factory', 'n_rows', 'n_proc', 'qubits_per_processor', 'total_qubits',
    'duration_s', 'duration', 'p_fail', 'metric', 'space_overhead', 'time_overhead',
)


class LayoutModeEnum(Enum):
    """Processor architecture: a chain of networked processors or one monolithic chip.
    """
    DISTRIBUTED = 'distributed'
    MONOLITHIC = 'monolithic'


class InfeasibleConfigurationError(RuntimeError):
    ERROR_MSG = 'No feasible configuration: {0}.'

    def __init__(self, reason):
        # type: (Text) -> None
        self.reason = reason

    def __str__(self):
        return self.ERROR_MSG.format(self.reason)


class InvalidEstimateConfigError(ValueError):
    ERROR_MSG = 'Invalid estimate configuration: {0}.'

    def __init__(self, reason):
        # type: (Text) -> None
        self.reason = reason

    def __str__(self):
        return self.ERROR_MSG.format(self.reason)


class FactorySpec(object):
    """A two-level CCZ synthillation factory: output error, footprint, time per state and code distances.
    """

    def __init__(self, index, p_out, qubitcycles, qubits, codecycles, distances, n_l1):
        # type: (int, float, int, int, float, Tuple[int, int, int, int, int, int], int) -> None
        self.index = index
        self.p_out = p_out
        self.qubitcycles = qubitcycles
        self.qubits = qubits
        self.codecycles = codecycles
        self.d_x, self.d_z, self.d_m, self.d_x2, self.d_z2, self.d_m2 = distances
        self.n_l1 = n_l1

    @property
    def distances(self):
        # type: () -> Tuple[int, int, int, int, int, int]
        return self.d_x, self.d_z, self.d_m, self.d_x2, self.d_z2, self.d_m2

    def __repr__(self):
        return 'FactorySpec({0}, p_out={1:.1e}, qubits={2})'.format(self.index, self.p_out, self.qubits)


FACTORY_TABLE = (
    FactorySpec(1, 2.1e-14, 11394367, 85436, 133.4, (21, 11, 11, 35, 21, 21), 4),
    FactorySpec(2, 3.0e-14, 8823434, 80700, 109.3, (21, 9, 9, 35, 21, 21), 4),
    FactorySpec(3, 9.9e-14, 8347167, 76344, 109.3, (21, 9, 9, 35, 19, 19), 4),
    FactorySpec(4, 2.1e-13, 7620887, 69716, 109.3, (19, 9, 9, 33, 19, 19), 4),
    FactorySpec(5, 6.6e-13, 7327490, 67032, 109.3, (19, 9, 9, 31, 19, 19), 4),
    FactorySpec(6, 1.6e-12, 6931679, 63424, 109.3, (17, 9, 9, 31, 19, 19), 4),
    FactorySpec(7, 2.7e-12, 6896807, 63092, 109.3, (19, 9, 9, 31, 17, 17), 4),
    FactorySpec(8, 8.1e-12, 6229603, 57000, 109.3, (17, 9, 9, 29, 17, 17), 4),
)


class AlgorithmCost(object):
    """Gate counts and logical qubits of one algorithm instance, plus its classical post-processing failure rate.
    """

    def __init__(self, label, n_toffoli, n_cnot, n_logical, p_classical=0.0):
        # type: (Text, float, float, int, float) -> None
        for name, value in (('n_toffoli', n_toffoli), ('n_cnot', n_cnot), ('n_logical', n_logical)):
            if value < 0:
                raise InvalidEstimateConfigError('{0} must be non-negative, got {1!r}'.format(name, value))
        if not 0.0 <= p_classical < 1.0:
            raise InvalidEstimateConfigError('p_classical must lie in [0, 1), got {0!r}'.format(p_classical))
        self.label = label
        self.n_toffoli = n_toffoli
        self.n_cnot = n_cnot
        self.n_logical = n_logical
        self.p_classical = p_classical

    @classmethod
    def from_dict(cls, document):
        # type: (Dict[Text, Any]) -> AlgorithmCost
        try:
            return cls(
                label=document.get('label', 'algorithm'),
                n_toffoli=float(document['n_toffoli']),
                n_cnot=float(document['n_cnot']),
                n_logical=int(document['n_logical']),
                p_classical=float(document.get('p_classical', 0.0)),
            )
        except KeyError as error:
            raise InvalidEstimateConfigError('algorithm cost is missing {0}'.format(error))
        except (TypeError, ValueError) as error:
            if isinstance(error, InvalidEstimateConfigError):
                raise
            raise InvalidEstimateConfigError('algorithm cost field: {0}'.format(error))

    def to_dict(self):
        # type: () -> Dict[Text, Any]
        return {
            'label': self.label,
            'n_toffoli': self.n_toffoli,
            'n_cnot': self.n_cnot,
            'n_logical': self.n_logical,
            'p_classical': self.p_classical,
        }


class LayoutConfig(object):
    """Processor layout: distance, logical-qubit rows per processor, processor counts and timing.
    """

    def __init__(self, d, n_rows, n_proc, mode=LayoutModeEnum.DISTRIBUTED, n_factory_proc=FACTORY_PROCESSORS,
                 t_c=DEFAULT_CYCLE_TIME, t_r=DEFAULT_REACTION_TIME):
        # type: (int, int, int, LayoutModeEnum, int, float, float) -> None
        if d < 3 or d % 2 == 0:
            raise InvalidEstimateConfigError('d must be an odd integer >= 3, got {0}'.format(d))
        if n_rows < 1 or n_proc < 1:
            raise InvalidEstimateConfigError('n_rows and n_proc must be positive, got {0} and {1}'.format(
                n_rows, n_proc))
        self.d = d
        self.n_rows = n_rows
        self.n_proc = n_proc
        self.mode = LayoutModeEnum(mode)
        self.n_factory_proc = n_factory_proc
        self.t_c = t_c
        self.t_r = t_r

    @property
    def logical_qubits_per_processor(self):
        # type: () -> int
        return 2 * self.n_rows

    @property
    def n_seam(self):
        # type: () -> int
        """Seams crossed by a routing patch spanning the whole chain.
        """
        if self.mode == LayoutModeEnum.MONOLITHIC:
            return 0
        return self.n_proc - 1


def layout_counts(d, n_rows, mode=LayoutModeEnum.DISTRIBUTED):
    # type: (int, int, LayoutModeEnum) -> Tuple[int, int]
    """Data qubits and physical qubits of one processor holding 2 * n_rows logical qubits and their routing space.
    """
    if d < 3 or d % 2 == 0:
        raise InvalidEstimateConfigError('d must be an odd integer >= 3, got {0}'.format(d))
    if n_rows < 1:
        raise InvalidEstimateConfigError('n_rows must be positive, got {0}'.format(n_rows))
    n_data = (3 * d + 2) * ((d + 1) * n_rows - 1) + (2 * d + 1) * (d + 1)
    n_phys = 2 * n_data - 1
    if LayoutModeEnum(mode) == LayoutModeEnum.DISTRIBUTED:
        n_data += d
        n_phys += 2 * d + 2 * d
    return n_data, n_phys


def bell_fidelity(p_bell):
    # type: (float) -> float
    """Fidelity of a depolarized Bell pair with |Phi+>.
    """
    if not 0.0 <= p_bell < 1.0:
        raise InvalidEstimateConfigError('p_Bell must lie in [0, 1), got {0!r}'.format(p_bell))
    return 1.0 - 0.8 * p_bell


def distillation_floor(p):
    # type: (float) -> float
    """Best output error reachable by the two-level CCZ factories at physical error rate p.
    """
    return 28.0 * (35.0 * (2.0 * p / 3.0) ** 3) ** 2


def logical_qubit_failure(d, p, n_logical, params):
    # type: (int, float, int, AnsatzParams) -> float
    """Per-round probability that any of n_logical idle logical qubits fails (X or Z).
    """
    return 1.0 - (1.0 - 2.0 * eval_bulk_ansatz(d, p, params.alpha, params.p_th)) ** n_logical


class CnotFailure(object):
    """Per-round failure terms of a lattice-surgery CNOT and the failure of the whole 4d-round operation.
    """

    def __init__(self, p_logq, p_xx, p_zz, p_cx):
        # type: (float, float, float, float) -> None
        self.p_logq = p_logq
        self.p_xx = p_xx
        self.p_zz = p_zz
        self.p_cx = p_cx


def cnot_failure_terms(d, p, p_bell, n_proc, n_rows, n_logical, params, bracket=SeamBracketEnum.UNSQUARED,
                       mode=LayoutModeEnum.DISTRIBUTED):
    # type: (int, float, float, int, int, int, AnsatzParams, SeamBracketEnum, LayoutModeEnum) -> CnotFailure
    bulk = eval_bulk_ansatz(d, p, params.alpha, params.p_th)
    p_logq = logical_qubit_failure(d, p, n_logical, params)
    # Routing patch length in units of d: the whole chain plus the rows of one processor
    routing_length = ((2 * d + 2) * n_proc + (d + 1) * n_rows) / float(d)
    if LayoutModeEnum(mode) == LayoutModeEnum.MONOLITHIC:
        p_xx = params.alpha * routing_length * (p / params.p_th) ** ((d + 1) / 2.0) + bulk
    else:
        p_xx = eval_multiseam_ansatz(d, d, n_proc - 1, p, p_bell, params, bracket,
                                     bulk_prefactor=routing_length * params.alpha2) + bulk
    p_zz = (params.alpha + params.alpha * (d + 1) * n_rows / float(d)) * (p / params.p_th) ** ((d + 1) / 2.0)
    if max(p_xx, p_zz, p_logq) >= 1.0:
        reason = 'per-round failure reaches 1 at d={0} (P_XX={1:.3g}, P_ZZ={2:.3g})'
        raise InfeasibleConfigurationError(reason.format(d, p_xx, p_zz))
    p_cx = 1.0 - (1.0 - p_logq) ** (4 * d) * (1.0 - p_xx) ** d * (1.0 - p_zz) ** d
    return CnotFailure(p_logq, p_xx, p_zz, p_cx)


def cnot_failure(d, p, p_bell, n_proc, n_rows, n_logical, params, bracket=SeamBracketEnum.UNSQUARED,
                 mode=LayoutModeEnum.DISTRIBUTED):
    # type: (int, float, float, int, int, int, AnsatzParams, SeamBracketEnum, LayoutModeEnum) -> float
    """Failure probability of one lattice-surgery CNOT (also CZ and CX...X) across the processor chain.
    """
    return cnot_failure_terms(d, p, p_bell, n_proc, n_rows, n_logical, params, bracket, mode).p_cx


def toffoli_failure(p_cx, p_logq, p_factory, t_r, t_c):
    # type: (float, float, float, float, float) -> float
    """Failure probability of a Toffoli by CCZ-state injection: factory, three interactions and the fixing step.
    """
    for name, value in (('P_CX', p_cx), ('P_logq', p_logq), ('P_factory', p_factory)):
        if not 0.0 <= value <= 1.0:
            raise InvalidEstimateConfigError('{0} must lie in [0, 1], got {1!r}'.format(name, value))
    p_interact = 1.0 - (1.0 - p_cx) ** 3
    p_fixing = 1.0 - (1.0 - p_logq) ** (t_r / t_c) * (1.0 - p_cx) ** 1.5
    return 1.0 - (1.0 - p_factory) * (1.0 - p_interact) * (1.0 - p_fixing)


def choose_n_rows(d, factory_qubits, max_rows=10000):
    # type: (int, int, int) -> int
    """Smallest number of rows whose processor has room for a magic state factory.
    """
    for n_rows in range(1, max_rows + 1):
        if layout_counts(d, n_rows)[1] >= factory_qubits:
            return n_rows
    raise InfeasibleConfigurationError('no processor of at most {0} rows fits {1} factory qubits'.format(
        max_rows, factory_qubits))


def layout_for(d, factory, cost, mode=LayoutModeEnum.DISTRIBUTED, t_c=DEFAULT_CYCLE_TIME,
               t_r=DEFAULT_REACTION_TIME):
    # type: (int, FactorySpec, AlgorithmCost, LayoutModeEnum, float, float) -> LayoutConfig
    if LayoutModeEnum(mode) == LayoutModeEnum.MONOLITHIC:
        n_rows = max(1, int(math.ceil(cost.n_logical / 2.0)))
        return LayoutConfig(d, n_rows, 1, LayoutModeEnum.MONOLITHIC, 0, t_c, t_r)
    n_rows = choose_n_rows(d, factory.qubits)
    n_proc = max(1, int(math.ceil(cost.n_logical / (2.0 * n_rows))))
    return LayoutConfig(d, n_rows, n_proc, LayoutModeEnum.DISTRIBUTED, FACTORY_PROCESSORS, t_c, t_r)


class EstimateResult(object):
    """Cost of running an algorithm on one configuration, and the space-time metric it is ranked by.
    """

    def __init__(self, cost, layout, factory, p_bell, qubits_per_processor, n_phys, duration, p_success,
                 cnot, p_ccx):
        # type: (AlgorithmCost, LayoutConfig, FactorySpec, float, int, int, float, float, CnotFailure, float) -> None
        self.cost = cost
        self.layout = layout
        self.factory = factory
        self.p_bell = p_bell
        self.qubits_per_processor = qubits_per_processor
        self.n_phys = n_phys
        self.duration = duration
        self.p_success = p_success
        self.cnot = cnot
        self.p_ccx = p_ccx

    @property
    def d(self):
        # type: () -> int
        return self.layout.d

    @property
    def p_fail(self):
        # type: () -> float
        return 1.0 - self.p_success

    @property
    def expected_duration(self):
        # type: () -> float
        """Single-run duration divided by the success probability: the expected time until a successful run.
        """
        return self.duration / self.p_success

    @property
    def metric(self):
        # type: () -> float
        return self.expected_duration * self.n_phys

    def sort_key(self):
        # type: () -> Tuple[float, int, float]
        return self.metric, self.d, self.factory.p_out

    def __repr__(self):
        return 'EstimateResult(d={0}, factory={1}, n_rows={2}, n_proc={3}, n_phys={4}, duration={5})'.format(
            self.d, self.factory.index, self.layout.n_rows, self.layout.n_proc, self.n_phys,
            format_duration(self.expected_duration))


def estimate_algorithm(cost, layout, factory, params, p, p_bell, bracket=SeamBracketEnum.UNSQUARED):
    # type: (AlgorithmCost, LayoutConfig, FactorySpec, AnsatzParams, float, float, SeamBracketEnum) -> EstimateResult
    """Duration, failure probability and qubit count of one algorithm run on one configuration.

    Raises InfeasibleConfigurationError when the success probability underflows.
    """
    d = layout.d
    monolithic = layout.mode == LayoutModeEnum.MONOLITHIC
    cnot = cnot_failure_terms(d, p, p_bell, layout.n_proc, layout.n_rows, cost.n_logical, params, bracket,
                              layout.mode)
    p_ccx = toffoli_failure(cnot.p_cx, cnot.p_logq, factory.p_out, layout.t_r, layout.t_c)

    t_cx = 4 * d * layout.t_c
    duration = cost.n_toffoli * (TOFFOLI_INJECTION_CNOTS * t_cx + layout.t_r) + cost.n_cnot * t_cx
    if p_ccx >= 1.0 or cnot.p_cx >= 1.0:
        raise InfeasibleConfigurationError('certain gate failure at d={0}'.format(d))
    log_success = (cost.n_toffoli * math.log1p(-p_ccx) + cost.n_cnot * math.log1p(-cnot.p_cx)
                   + math.log1p(-cost.p_classical))
    p_success = math.exp(log_success)
    if 1.0 - p_success == 1.0:
        raise InfeasibleConfigurationError('success probability underflows at d={0}, factory {1}'.format(
            d, factory.index))

    qubits_per_processor = layout_counts(d, layout.n_rows, layout.mode)[1]
    if monolithic:
        n_phys = qubits_per_processor + FACTORY_PROCESSORS * factory.qubits
    else:
        n_phys = layout.n_proc * qubits_per_processor + layout.n_factory_proc * factory.qubits
    return EstimateResult(cost, layout, factory, p_bell, qubits_per_processor, n_phys, duration, p_success,
                          cnot, p_ccx)


class SweepResult(object):
    """Best configuration of a sweep and every feasible point evaluated.
    """

    def __init__(self, best, results):
        # type: (EstimateResult, List[EstimateResult]) -> None
        self.best = best
        self.results = results


def optimize_configuration(costs, p, p_bell, params, factories=FACTORY_TABLE, distances=DEFAULT_DISTANCES,
                           mode=LayoutModeEnum.DISTRIBUTED, t_c=DEFAULT_CYCLE_TIME, t_r=DEFAULT_REACTION_TIME,
                           bracket=SeamBracketEnum.UNSQUARED, threads=1):
    # type: (Sequence[AlgorithmCost], float, float, AnsatzParams, Sequence[FactorySpec], Iterable[int], LayoutModeEnum, float, float, SeamBracketEnum, int) -> SweepResult
    """Exhaustive sweep over distances, factories and algorithm variants minimizing expected duration x qubits.

    Ties go to the smaller distance, then to the factory with the smaller output error.
    """
    distances = [d for d in distances if d >= 3 and d % 2 == 1]
    if not costs or not factories or not distances:
        raise InvalidEstimateConfigError('empty search space: {0} costs, {1} factories, {2} distances'.format(
            len(costs), len(factories), len(distances)))
    floor = distillation_floor(p)
    for factory in factories:
        if factory.p_out < floor:
            _logger.warning('Factory %d output error %.2e is below the distillation floor %.2e at p=%g',
                            factory.index, factory.p_out, floor, p)

    candidates = [(cost, d, factory) for cost in costs for d in distances for factory in factories]

    def evaluate(candidate):
        cost, d, factory = candidate
        try:
            layout = layout_for(d, factory, cost, mode, t_c, t_r)
            return estimate_algorithm(cost, layout, factory, params, p, p_bell, bracket)
        except InfeasibleConfigurationError as error:
            _logger.debug('Skipping d=%d factory %d: %s', d, factory.index, error)
            return None

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            evaluated = list(executor.map(evaluate, candidates))
    else:
        evaluated = [evaluate(candidate) for candidate in candidates]
    results = [result for result in evaluated if result is not None]
    if not results:
        raise InfeasibleConfigurationError('all {0} candidates fail at p={1}, p_Bell={2}'.format(
            len(candidates), p, p_bell))
    best = min(results, key=lambda result: result.sort_key())
    _logger.info('Best %s configuration at p_Bell=%g: %r', LayoutModeEnum(mode).value, p_bell, best)
    return SweepResult(best, results)


def format_duration(seconds):
    # type: (float) -> Text
    """Human-readable duration such as "23 d 15 h", "5 h 12 min" or "640 us".
    """
    if seconds >= 86400:
        days, rest = divmod(seconds, 86400)
        hours = int(round(rest / 3600.0))
        if hours == 24:
            days, hours = days + 1, 0
        return '{0} d {1} h'.format(int(days), hours)
    if seconds >= 3600:
        hours, rest = divmod(seconds, 3600)
        minutes = int(round(rest / 60.0))
        if minutes == 60:
            hours, minutes = hours + 1, 0
        return '{0} h {1} min'.format(int(hours), minutes)
    if seconds >= 1:
        return '{0:.3g} s'.format(seconds)
    if seconds >= 1e-3:
        return '{0:.3g} ms'.format(seconds * 1e3)
    return '{0:.3g} us'.format(seconds * 1e6)


class EstimateConfig(object):
    """An overhead sweep: physical error rate, Bell error rates, modes, distances, timing and costs.
    """

    def __init__(self, p, p_bell_values, modes, distances, costs, factories=FACTORY_TABLE,
                 t_c=DEFAULT_CYCLE_TIME, t_r=DEFAULT_REACTION_TIME, bracket=SeamBracketEnum.UNSQUARED,
                 params=None):
        # type: (float, Sequence[float], Sequence[LayoutModeEnum], Sequence[int], Sequence[AlgorithmCost], Sequence[FactorySpec], float, float, SeamBracketEnum, Optional[AnsatzParams]) -> None
        if not 0.0 < p < 1.0:
            raise InvalidEstimateConfigError('p must lie in (0, 1), got {0!r}'.format(p))
        for p_bell in p_bell_values:
            if not 0.0 <= p_bell <= SEAM_VALIDITY_CEILING:
                raise InvalidEstimateConfigError('p_Bell must lie in [0, {0}], got {1!r}'.format(
                    SEAM_VALIDITY_CEILING, p_bell))
        if t_c <= 0 or t_r < 0:
            raise InvalidEstimateConfigError('t_c must be positive and t_r non-negative')
        self.p = p
        self.p_bell_values = list(p_bell_values)
        self.modes = [LayoutModeEnum(mode) for mode in modes]
        self.distances = list(distances)
        self.costs = list(costs)
        self.factories = list(factories)
        self.t_c = t_c
        self.t_r = t_r
        self.bracket = SeamBracketEnum(bracket)
        self.params = params or AnsatzParams.from_table()

    @classmethod
    def from_dict(cls, document):
        # type: (Dict[Text, Any]) -> EstimateConfig
        if not isinstance(document, dict):
            raise InvalidEstimateConfigError('expected a JSON object')
        try:
            distances = document.get('distances', {})
            if isinstance(distances, dict):
                distances = range(int(distances.get('min', DEFAULT_DISTANCES[0])),
                                  int(distances.get('max', DEFAULT_DISTANCES[-1])) + 1, 2)
            factory_entries = document.get('factories')
            if factory_entries is None:
                factories = list(FACTORY_TABLE)
            else:
                by_index = {factory.index: factory for factory in FACTORY_TABLE}
                factories = [by_index[int(index)] for index in factory_entries]
            costs = [AlgorithmCost.from_dict(entry) for entry in document.get('costs', [])]
            params = document.get('params')
            return cls(
                p=float(document.get('p', 1e-3)),
                p_bell_values=[float(value) for value in document.get('p_bell', [0.0])],
                modes=[LayoutModeEnum(mode) for mode in document.get('modes', ['distributed'])],
                distances=[int(d) for d in distances],
                costs=costs,
                factories=factories,
                t_c=float(document.get('t_c', DEFAULT_CYCLE_TIME)),
                t_r=float(document.get('t_r', DEFAULT_REACTION_TIME)),
                bracket=SeamBracketEnum(document.get('seam_bracket', SeamBracketEnum.UNSQUARED.value)),
                params=AnsatzParams.from_dict(params) if params else None,
            )
        except KeyError as error:
            raise InvalidEstimateConfigError('unknown factory {0}'.format(error))
        except (TypeError, ValueError) as error:
            if isinstance(error, InvalidEstimateConfigError):
                raise
            raise InvalidEstimateConfigError(str(error))

    @classmethod
    def from_json(cls, text):
        # type: (Text) -> EstimateConfig
        try:
            document = json.loads(text)
        except ValueError as error:
            raise InvalidEstimateConfigError('not valid JSON: {0}'.format(error))
        return cls.from_dict(document)

    @classmethod
    def default(cls):
        # type: () -> EstimateConfig
        with io.open(DEFAULT_CONFIG_PATH, encoding='utf-8') as config_file:
            return cls.from_json(config_file.read())


class EstimateRow(object):
    """The best configuration for a mode and Bell error rate, with overheads.
    """

    def __init__(self, mode, p_bell, result, space_overhead=None, time_overhead=None):
        # type: (LayoutModeEnum, Optional[float], EstimateResult, Optional[float], Optional[float]) -> None
        self.mode = mode
        self.p_bell = p_bell
        self.result = result
        self.space_overhead = space_overhead
        self.time_overhead = time_overhead

    def to_row(self):
        # type: () -> Dict[Text, Text]
        result = self.result
        return {
            'mode': self.mode.value,
            'p_Bell': '' if self.p_bell is None else repr(self.p_bell),
            'cost': result.cost.label,
            'd': str(result.d),
            'factory': str(result.factory.index),
            'n_rows': str(result.layout.n_rows),
            'n_proc': str(result.layout.n_proc),
            'qubits_per_processor': str(result.qubits_per_processor),
            'total_qubits': str(result.n_phys),
            'duration_s': '{0:.6e}'.format(result.expected_duration),
            'duration': format_duration(result.expected_duration),
            'p_fail': '{0:.6e}'.format(result.p_fail),
            'metric': '{0:.6e}'.format(result.metric),
            'space_overhead': '' if self.space_overhead is None else '{0:.4f}'.format(self.space_overhead),
            'time_overhead': '' if self.time_overhead is None else '{0:.4f}'.format(self.time_overhead),
        }


def run_estimate(config, threads=1):
    # type: (EstimateConfig, int) -> List[EstimateRow]
    """Best configuration per mode and Bell error rate, with overheads against the distributed p_Bell=0 column.
    """
    if not config.costs:
        raise InvalidEstimateConfigError('no algorithm cost given')

    def sweep(mode, p_bell):
        return optimize_configuration(config.costs, config.p, p_bell, config.params, config.factories,
                                      config.distances, mode, config.t_c, config.t_r, config.bracket,
                                      threads).best

    reference = sweep(LayoutModeEnum.DISTRIBUTED, 0.0)
    rows = []
    for mode in config.modes:
        p_bell_values = [None] if mode == LayoutModeEnum.MONOLITHIC else config.p_bell_values
        for p_bell in p_bell_values:
            if mode == LayoutModeEnum.DISTRIBUTED and p_bell == 0.0:
                best = reference
            else:
                best = sweep(mode, p_bell or 0.0)
            rows.append(EstimateRow(
                mode, p_bell, best,
                space_overhead=best.n_phys / float(reference.n_phys) - 1.0,
                time_overhead=best.expected_duration / reference.expected_duration - 1.0,
            ))
    return rows


def write_estimate_csv(rows, stream):
    # type: (Sequence[EstimateRow], Any) -> None
    stream.write(CSV_SCHEMA_LINE + '\n')
    writer = csv.DictWriter(stream, fieldnames=CSV_FIELDS, lineterminator='\n')
    writer.writeheader()
    for row in rows:
        writer.writerow(row.to_row())
