#!/usr/bin/env python
# -*- coding: utf-8 -*-
from __future__ import absolute_import
from __future__ import unicode_literals

import json
import unittest

import numpy as np

from distqec.ansatz_fit import SEAM_VALIDITY_CEILING, AnsatzDomainError, AnsatzModelEnum, AnsatzParams, \
    DegenerateFitError, FitDataset, FitRow, InsufficientDataError, SeamBracketEnum, chi_squared, eval_bulk_ansatz, \
    eval_multiseam_ansatz, eval_seam_ansatz, fit_least_squares, fit_power_law_slope, log_spaced, synthetic_dataset


class AnsatzParamsTests(unittest.TestCase):

    def test_table_values(self):
        params = AnsatzParams.from_table()
        self.assertEqual(params.alpha1, 0.09789)
        self.assertEqual(params.p_star, 0.007176)
        self.assertEqual(params.uncertainties['p_bell_star'], 0.0110)

    def test_from_dict_overrides(self):
        params = AnsatzParams.from_dict({'alpha1': 0.98})
        self.assertEqual(params.alpha1, 0.98)
        self.assertEqual(params.alpha2, 0.04507)
        self.assertEqual(AnsatzParams.from_dict(params.to_dict()).to_dict(), params.to_dict())

    def test_invalid_params(self):
        with self.assertRaisesRegex(AnsatzDomainError, 'strictly positive'):
            AnsatzParams.from_table().replace(alpha3=0.0)
        with self.assertRaisesRegex(AnsatzDomainError, 'below 1'):
            AnsatzParams.from_table().replace(p_bell_star=1.5)
        with self.assertRaisesRegex(AnsatzDomainError, 'must be a number'):
            AnsatzParams.from_dict({'alpha': 'large'})


class EvalAnsatzTests(unittest.TestCase):

    def test_bulk(self):
        self.assertAlmostEqual(eval_bulk_ansatz(5, 1e-3, 0.05, 7.43e-3), 1.22e-4, delta=5e-7)
        self.assertAlmostEqual(eval_bulk_ansatz(13, 1e-3, 0.05, 7.43e-3), 4.0e-8, delta=2e-10)

    def test_seam(self):
        # Given the tabulated constants
        params = AnsatzParams.from_table()

        # Then a distance-5 seam at p = 0.1% and 2% Bell infidelity fails at about 5.4e-4 per round
        self.assertAlmostEqual(eval_seam_ansatz(5, 1e-3, 0.02, params), 5.383e-4, delta=1e-6)

    def test_seam_grows_with_bell_infidelity(self):
        params = AnsatzParams.from_table()
        rates = [eval_seam_ansatz(7, 1e-3, p_bell, params) for p_bell in (0.0, 0.01, 0.02, 0.05)]
        self.assertEqual(rates, sorted(rates))
        self.assertLess(rates[0], rates[1])

    def test_squared_bracket_is_larger(self):
        params = AnsatzParams.from_table()
        unsquared = eval_seam_ansatz(7, 1e-3, 0.02, params)
        squared = eval_seam_ansatz(7, 1e-3, 0.02, params, SeamBracketEnum.SQUARED)
        self.assertGreater(squared, unsquared)
        self.assertEqual(eval_seam_ansatz(7, 1e-3, 0.0, params, SeamBracketEnum.SQUARED),
                         eval_seam_ansatz(7, 1e-3, 0.0, params))

    def test_multiseam(self):
        params = AnsatzParams.from_table()
        single = eval_multiseam_ansatz(5, 5, 1, 1e-3, 0.02, params)
        self.assertEqual(single, eval_seam_ansatz(5, 1e-3, 0.02, params))
        double = eval_multiseam_ansatz(5, 5, 2, 1e-3, 0.02, params)
        bulk = params.alpha2 * (1e-3 / params.p_star) ** 3
        self.assertAlmostEqual(double - bulk, 2 * (single - bulk))

    def test_domain(self):
        params = AnsatzParams.from_table()
        with self.assertRaisesRegex(AnsatzDomainError, 'pseudo-threshold'):
            eval_seam_ansatz(5, params.p_star, 0.02, params)

    def test_bell_validity_ceiling(self):
        # Given the tabulated constants
        params = AnsatzParams.from_table()

        # When the Bell error rate sits exactly on the ceiling, the ansatz still evaluates
        self.assertGreater(eval_seam_ansatz(5, 1e-3, SEAM_VALIDITY_CEILING, params), 0.0)

        # Then any rate past it, or below zero, is outside the domain of both seam ansatzes
        with self.assertRaisesRegex(AnsatzDomainError, r'p_Bell=0.06 is outside \[0, 0.05\]'):
            eval_seam_ansatz(5, 1e-3, 0.06, params)
        with self.assertRaisesRegex(AnsatzDomainError, r'p_Bell=0.08 is outside'):
            eval_multiseam_ansatz(5, 5, 3, 1e-3, 0.08, params)
        with self.assertRaisesRegex(AnsatzDomainError, r'p_Bell=-0.01 is outside'):
            eval_seam_ansatz(5, 1e-3, -0.01, params)


def _seam_rows(params, distances, p_values, p_bell_values, relative_sigma=0.05):
    rows = []
    for d in distances:
        for p in p_values:
            for p_bell in p_bell_values:
                rate = eval_seam_ansatz(d, p, p_bell, params)
                rows.append(FitRow(d, p, p_bell, rate, relative_sigma * rate))
    return FitDataset(rows)


class FitLeastSquaresTests(unittest.TestCase):

    def test_vectorized_model_matches_scalar(self):
        params = AnsatzParams.from_table()
        dataset = _seam_rows(params, (5, 7, 9), (5e-4, 2e-3), (0.0, 0.03))
        values = params.values(('alpha1', 'alpha2', 'alpha3', 'alpha_c', 'p_star', 'p_bell_star'))
        self.assertAlmostEqual(chi_squared(AnsatzModelEnum.SEAM, values, dataset), 0.0, places=12)

    def test_bulk_fit_recovers_parameters(self):
        # Given binomial samples of the bulk ansatz with known constants
        truth = AnsatzParams.from_table()
        rng = np.random.default_rng(12)
        dataset = synthetic_dataset(AnsatzModelEnum.BULK, truth, (5, 7, 9), log_spaced(1e-3, 5e-3, 5), [0.0],
                                    10 ** 9, rng)

        # When fitted from a perturbed start
        result = fit_least_squares(dataset, AnsatzModelEnum.BULK, initial=truth.replace(alpha=0.08, p_th=6e-3))

        # Then the constants come back
        fitted = result.params()
        self.assertTrue(result.converged)
        self.assertAlmostEqual(fitted.alpha, truth.alpha, delta=0.1 * truth.alpha)
        self.assertAlmostEqual(fitted.p_th, truth.p_th, delta=0.03 * truth.p_th)
        self.assertEqual(result.dof, 13)
        self.assertLess(result.chi2, 3 * result.dof)

    def _assert_recovered_within_three_sigma(self, model, truth, sample, repetitions=50, required=48):
        misses = {}
        for _ in range(repetitions):
            result = fit_least_squares(sample(), model)
            self.assertTrue(result.converged)
            for name, value, sigma in zip(result.names, result.values, result.uncertainties):
                if abs(value - getattr(truth, name)) > 3 * sigma:
                    misses[name] = misses.get(name, 0) + 1
        for name, count in misses.items():
            self.assertLessEqual(count, repetitions - required, '{0} missed {1} times'.format(name, count))

    def test_repeated_bulk_fits_cover_truth(self):
        # Given 50 independent binomial samples of the bulk ansatz
        truth = AnsatzParams.from_table()
        rng = np.random.default_rng(31)

        def sample():
            return synthetic_dataset(AnsatzModelEnum.BULK, truth, (5, 7, 9), log_spaced(1e-3, 5e-3, 5), [0.0],
                                     10 ** 9, rng)

        # Then each fitted constant lies within three standard errors of its true value in at least 48 of them
        self._assert_recovered_within_three_sigma(AnsatzModelEnum.BULK, truth, sample)

    def test_repeated_seam_fits_cover_truth(self):
        # Given 50 independent binomial samples of the seam ansatz
        truth = AnsatzParams.from_table()
        rng = np.random.default_rng(37)

        def sample():
            return synthetic_dataset(AnsatzModelEnum.SEAM, truth, (5, 7, 9), (5e-4, 1e-3, 2e-3),
                                     (0.01, 0.02, 0.04, 0.05), 10 ** 12, rng)

        # Then each fitted constant lies within three standard errors of its true value in at least 48 of them
        self._assert_recovered_within_three_sigma(AnsatzModelEnum.SEAM, truth, sample)

    def test_seam_fit_on_exact_data(self):
        # Given noiseless seam rates spanning several Bell infidelities
        truth = AnsatzParams.from_table()
        dataset = _seam_rows(truth, (5, 7, 9), (5e-4, 1e-3, 2e-3), (0.01, 0.02, 0.04, 0.05))

        # When fitted from the true values
        result = fit_least_squares(dataset)

        # Then the fit stays there
        self.assertLess(result.chi2, 1e-6)
        for name, value in zip(result.names, result.values):
            self.assertAlmostEqual(value, getattr(truth, name), delta=1e-3 * getattr(truth, name))
        report = json.loads(result.to_json())
        self.assertEqual(report['model'], 'seam')
        self.assertEqual(report['filter']['used'], 36)
        self.assertEqual(report['alternatives'], {'alpha1': 0.98})
        self.assertEqual(sorted(report['parameters']), sorted(result.names))

    def test_bell_free_data_is_degenerate(self):
        # Given seam rows measured without Bell noise only
        dataset = _seam_rows(AnsatzParams.from_table(), (5, 7, 9), (1e-3, 2e-3), (0.0,))

        # Then the Bell parameters cannot be identified
        with self.assertRaisesRegex(DegenerateFitError, 'not identifiable'):
            fit_least_squares(dataset)

    def test_insufficient_rows(self):
        # Given rows that the filter mostly drops
        rows = [
            FitRow(3, 1e-3, 0.01, 1e-3, 1e-5),
            FitRow(5, 1e-3, 0.01, 1e-3, 9e-4),
            FitRow(5, 1e-3, 0.02, 2e-3, 1e-5),
        ]
        usable, counts = FitDataset(rows).filtered()
        self.assertEqual((counts.dropped_distance, counts.dropped_sigma, counts.used), (1, 1, 1))
        self.assertEqual(len(usable), 1)

        # Then fitting is refused
        with self.assertRaisesRegex(InsufficientDataError, 'got 1'):
            fit_least_squares(FitDataset(rows))

    def test_from_results(self):
        results = [
            {'d': 5, 'p': 1e-3, 'p_Bell': 0.01, 'basis': 'Z', 'p_L': 1e-4, 'sigma': 1e-6},
            {'d': 5, 'p': 1e-3, 'p_Bell': 0.01, 'basis': 'X', 'p_L': 2e-4, 'sigma': 1e-6},
        ]
        self.assertEqual(len(FitDataset.from_results(results)), 1)
        self.assertEqual(len(FitDataset.from_results(results, basis=None)), 2)

    def test_power_law_slope(self):
        p_values = [1e-3, 2e-3, 4e-3]
        slope, _ = fit_power_law_slope(p_values, [2 * p ** 3 for p in p_values])
        self.assertAlmostEqual(slope, 3.0)
        with self.assertRaises(InsufficientDataError):
            fit_power_law_slope(p_values, [0.0, 0.0, 1e-3])


if __name__ == '__main__':
    unittest.main()
