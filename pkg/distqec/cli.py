# -*- coding: utf-8 -*-
from __future__ import absolute_import
from __future__ import unicode_literals

import argparse
import io
import json
import logging
import math
import sys
import time
from typing import Any, Dict, List, Optional, Sequence, Text

import numpy as np

from distqec import __version__
from distqec.ansatz_fit import AnsatzModelEnum, FitDataset, fit_least_squares
from distqec.decoder import MatchingGraph, brute_force_decode, mwpm_decode
from distqec.dem_builder import build_dem
from distqec.monte_carlo import ExperimentGrid, default_threads, read_results_csv, run_grid, write_results_csv
from distqec.patch_builder import PatchSpec, PatchVariantEnum, build_circuit
from distqec.resource_model import EstimateConfig, run_estimate, write_estimate_csv


_logger = logging.getLogger(__name__)


EXIT_SUCCESS = 0
EXIT_INVALID_INPUT = 2
EXIT_INFEASIBLE = 3

DEFAULT_SHOTS = 10000
DEFAULT_SEED = 0
DEFAULT_DECODE_TRIALS = 1000
DECODE_TEST_MAX_DEFECTS = 8
_WEIGHT_TOLERANCE = 1e-5


class DecoderMismatchError(RuntimeError):
    ERROR_MSG = 'Matching weight {0:.9g} differs from the exhaustive optimum {1:.9g} on defects {2}.'

    def __init__(self, mwpm_weight, brute_force_weight, defects):
        # type: (float, float, List[int]) -> None
        self.mwpm_weight = mwpm_weight
        self.brute_force_weight = brute_force_weight
        self.defects = defects

    def __str__(self):
        return self.ERROR_MSG.format(self.mwpm_weight, self.brute_force_weight, self.defects)


class RunManifest(object):
    """Everything needed to reproduce one command's outputs; wall-clock time is informational only.
    """

    def __init__(self, command, parameters, seed, outputs, wall_clock=None):
        # type: (Text, Dict[Text, Any], Optional[int], List[Text], Optional[float]) -> None
        self.command = command
        self.parameters = parameters
        self.seed = seed
        self.version = __version__
        self.outputs = outputs
        self.wall_clock = wall_clock

    def to_dict(self):
        # type: () -> Dict[Text, Any]
        return {
            'command': self.command,
            'parameters': self.parameters,
            'seed': self.seed,
            'version': self.version,
            'outputs': self.outputs,
            'wall_clock': self.wall_clock,
        }

    def write(self, out_path):
        # type: (Text) -> Text
        path = manifest_path(out_path)
        with io.open(path, 'w', encoding='utf-8') as manifest_file:
            manifest_file.write(json.dumps(self.to_dict(), indent=2, sort_keys=True) + '\n')
        return path


def manifest_path(out_path):
    # type: (Text) -> Text
    return out_path + '.manifest.json'


def _read_text(path):
    # type: (Text) -> Text
    with io.open(path, encoding='utf-8') as input_file:
        return input_file.read()


def _write_text(path, text):
    # type: (Optional[Text], Text) -> None
    if path is None:
        sys.stdout.write(text)
        return
    with io.open(path, 'w', encoding='utf-8', newline='') as output_file:
        output_file.write(text)


def _threads(args):
    # type: (argparse.Namespace) -> int
    return args.threads if args.threads is not None else default_threads()


def cmd_simulate(args):
    # type: (argparse.Namespace) -> Dict[Text, Any]
    grid = ExperimentGrid.from_json(_read_text(args.spec))
    shots = args.shots if args.shots is not None else (grid.shots or DEFAULT_SHOTS)
    seed = args.seed if args.seed is not None else (grid.seed if grid.seed is not None else DEFAULT_SEED)
    points = run_grid(grid.specs(), shots, seed, _threads(args))
    buffer = io.StringIO()
    write_results_csv(points, buffer)
    _write_text(args.out, buffer.getvalue())
    return {'grid': grid.to_dict(), 'shots': shots, 'seed': seed}


def cmd_fit(args):
    # type: (argparse.Namespace) -> Dict[Text, Any]
    with io.open(args.data, encoding='utf-8') as data_file:
        rows = read_results_csv(data_file)
    model = AnsatzModelEnum(args.model)
    dataset = FitDataset.from_results(rows, basis=args.basis)
    result = fit_least_squares(dataset, model, min_distance=args.min_distance)
    _write_text(args.out, result.to_json() + '\n')
    return {'data': args.data, 'model': model.value, 'basis': args.basis, 'min_distance': args.min_distance}


def cmd_estimate(args):
    # type: (argparse.Namespace) -> Dict[Text, Any]
    config = EstimateConfig.from_json(_read_text(args.config)) if args.config else EstimateConfig.default()
    rows = run_estimate(config, _threads(args))
    buffer = io.StringIO()
    write_estimate_csv(rows, buffer)
    _write_text(args.out, buffer.getvalue())
    return {'config': args.config or 'default'}


def cmd_dem(args):
    # type: (argparse.Namespace) -> Dict[Text, Any]
    spec = PatchSpec.from_json(_read_text(args.spec))
    dem = build_dem(build_circuit(spec))
    _write_text(args.out, dem.to_text())
    return {'spec': spec.to_dict()}


def random_syndromes(num_detectors, trials, max_defects, rng):
    # type: (int, int, int, np.random.Generator) -> List[np.ndarray]
    syndromes = []
    for _ in range(trials):
        count = int(rng.integers(0, min(max_defects, num_detectors) + 1))
        syndrome = np.zeros(num_detectors, dtype=np.bool_)
        syndrome[rng.choice(num_detectors, size=count, replace=False)] = True
        syndromes.append(syndrome)
    return syndromes


def compare_decoders(graph, syndromes):
    # type: (MatchingGraph, Sequence[np.ndarray]) -> int
    """Number of syndromes checked; raises DecoderMismatchError on the first weight disagreement.
    """
    for syndrome in syndromes:
        _, mwpm_weight = mwpm_decode(graph, syndrome)
        _, brute_force_weight = brute_force_decode(graph, syndrome)
        if not math.isclose(mwpm_weight, brute_force_weight, rel_tol=_WEIGHT_TOLERANCE, abs_tol=_WEIGHT_TOLERANCE):
            raise DecoderMismatchError(mwpm_weight, brute_force_weight,
                                       [int(index) for index in np.flatnonzero(syndrome)])
    return len(syndromes)


def cmd_decode_test(args):
    # type: (argparse.Namespace) -> Dict[Text, Any]
    if args.spec:
        specs = [PatchSpec.from_json(_read_text(args.spec))]
    else:
        specs = [PatchSpec(d, 3, variant=PatchVariantEnum.SEAM, p=1e-3, p_bell=1e-2) for d in (3, 5)]
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    rng = np.random.default_rng(seed)
    report = []
    for spec in specs:
        graph = MatchingGraph.from_dem(build_dem(build_circuit(spec)))
        syndromes = random_syndromes(graph.num_detectors, args.trials, DECODE_TEST_MAX_DEFECTS, rng)
        checked = compare_decoders(graph, syndromes)
        _logger.info('Decoders agree on %d syndromes for %r', checked, spec)
        report.append({'spec': spec.to_dict(), 'syndromes': checked, 'mismatches': 0})
    _write_text(args.out, json.dumps(report, indent=2, sort_keys=True) + '\n')
    return {'specs': [spec.to_dict() for spec in specs], 'trials': args.trials, 'seed': seed}


def build_parser():
    # type: () -> argparse.ArgumentParser
    parser = argparse.ArgumentParser(
        prog='distqec',
        description='Simulate, decode, fit and cost surface code memories split across networked processors.',
    )
    parser.add_argument('--verbose', action='store_true', help='log DEBUG messages to stderr')
    subparsers = parser.add_subparsers(dest='command')
    subparsers.required = True

    def add_common(subparser):
        subparser.add_argument('--out', help='output file (stdout when omitted); a manifest is written beside it')
        subparser.add_argument('--threads', type=int,
                               help='worker threads (default from DISTQEC_THREADS, else the CPU count)')

    simulate = subparsers.add_parser('simulate', help='Monte Carlo memory experiments over a JSON grid')
    simulate.add_argument('--spec', required=True, help='experiment grid JSON')
    simulate.add_argument('--shots', type=int, help='shots per grid point')
    simulate.add_argument('--seed', type=int, help='master seed')
    add_common(simulate)
    simulate.set_defaults(handler=cmd_simulate)

    fit = subparsers.add_parser('fit', help='fit an ansatz to simulate results')
    fit.add_argument('--data', required=True, help='CSV written by the simulate command')
    fit.add_argument('--model', default=AnsatzModelEnum.SEAM.value,
                     choices=[model.value for model in AnsatzModelEnum])
    fit.add_argument('--basis', default='Z', help='memory basis to fit')
    fit.add_argument('--min-distance', dest='min_distance', type=int, default=5)
    add_common(fit)
    fit.set_defaults(handler=cmd_fit)

    estimate = subparsers.add_parser('estimate', help='resource estimate sweep')
    estimate.add_argument('--config', help='estimate configuration JSON (shipped default when omitted)')
    add_common(estimate)
    estimate.set_defaults(handler=cmd_estimate)

    dem = subparsers.add_parser('dem', help='write the detector error model of a patch')
    dem.add_argument('--spec', required=True, help='PatchSpec JSON')
    add_common(dem)
    dem.set_defaults(handler=cmd_dem)

    decode_test = subparsers.add_parser('decode-test', help='compare matching with exhaustive decoding')
    decode_test.add_argument('--spec', help='PatchSpec JSON (d=3 and d=5 seam patches when omitted)')
    decode_test.add_argument('--trials', type=int, default=DEFAULT_DECODE_TRIALS)
    decode_test.add_argument('--seed', type=int, help='seed of the random syndromes')
    add_common(decode_test)
    decode_test.set_defaults(handler=cmd_decode_test)
    return parser


def main(argv=None):
    # type: (Optional[Sequence[Text]]) -> int
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')

    start = time.time()
    try:
        parameters = args.handler(args)
    except (ValueError, IOError) as error:
        sys.stderr.write('distqec {0}: {1}\n'.format(args.command, error))
        return EXIT_INVALID_INPUT
    except RuntimeError as error:
        sys.stderr.write('distqec {0}: {1}\n'.format(args.command, error))
        return EXIT_INFEASIBLE

    if args.out:
        parameters['threads'] = args.threads
        manifest = RunManifest(args.command, parameters, parameters.get('seed'), [args.out], time.time() - start)
        manifest.write(args.out)
    return EXIT_SUCCESS


if __name__ == '__main__':
    sys.exit(main())
