# -*- coding: utf-8 -*-
from __future__ import absolute_import
from __future__ import unicode_literals

import json
import logging
import math
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Sequence, Text, Tuple

import numpy as np
from scipy.optimize import least_squares

from distqec.monte_carlo import SampleStats


_logger = logging.getLogger(__name__)


MIN_FIT_DISTANCE = 5
FTOL = 1e-10
MAX_ITERATIONS = 200
SEAM_VALIDITY_CEILING = 0.05

# Rates returned for parameter trials past the pseudo-threshold, so that least squares steers away from them
_OUT_OF_DOMAIN_RATE = 1e3


class AnsatzModelEnum(Enum):
    """Fittable logical error models.
    """
    BULK = 'bulk'
    SEAM = 'seam'
    SEAM_SQUARED = 'seam_squared'


class SeamBracketEnum(Enum):
    """Form of the pseudo-threshold correction applied to the Bell error rate.
    """
    UNSQUARED = 'unsquared'
    SQUARED = 'squared'


class AnsatzDomainError(ValueError):
    ERROR_MSG = 'Ansatz evaluated outside its domain: {0}.'

    def __init__(self, reason):
        # type: (Text) -> None
        self.reason = reason

    def __str__(self):
        return self.ERROR_MSG.format(self.reason)


class InsufficientDataError(ValueError):
    ERROR_MSG = 'Fitting {0} parameters needs at least as many rows after filtering, got {1}.'

    def __init__(self, num_parameters, num_rows):
        # type: (int, int) -> None
        self.num_parameters = num_parameters
        self.num_rows = num_rows

    def __str__(self):
        return self.ERROR_MSG.format(self.num_parameters, self.num_rows)


class DegenerateFitError(RuntimeError):
    ERROR_MSG = 'Singular normal matrix: the parameter combination {0} is not identifiable from the data.'

    def __init__(self, combination):
        # type: (Dict[Text, float]) -> None
        self.combination = combination

    def __str__(self):
        terms = ' + '.join('{0:.3f}*log({1})'.format(weight, name) for name, weight in self.combination.items())
        return self.ERROR_MSG.format(terms)


BULK_PARAMETER_NAMES = ('alpha', 'p_th')
SEAM_PARAMETER_NAMES = ('alpha1', 'alpha2', 'alpha3', 'alpha_c', 'p_star', 'p_bell_star')


class AnsatzParams(object):
    """The six seam-ansatz constants plus the bulk pair (alpha, p_th).
    """

    # Rounded values quoted for some constants that disagree with the fitted ones; reported, never used
    ALTERNATIVE_VALUES = {'alpha1': 0.98}

    def __init__(self, alpha1, alpha2, alpha3, alpha_c, p_star, p_bell_star, alpha, p_th, uncertainties=None):
        # type: (float, float, float, float, float, float, float, float, Optional[Dict[Text, float]]) -> None
        self.alpha1 = alpha1
        self.alpha2 = alpha2
        self.alpha3 = alpha3
        self.alpha_c = alpha_c
        self.p_star = p_star
        self.p_bell_star = p_bell_star
        self.alpha = alpha
        self.p_th = p_th
        self.uncertainties = uncertainties or {}
        for name in SEAM_PARAMETER_NAMES + BULK_PARAMETER_NAMES:
            value = getattr(self, name)
            if not value > 0:
                raise AnsatzDomainError('{0} must be strictly positive, got {1!r}'.format(name, value))
        for name in ('p_star', 'p_bell_star', 'p_th'):
            if not getattr(self, name) < 1:
                raise AnsatzDomainError('{0} must be below 1, got {1!r}'.format(name, getattr(self, name)))

    @classmethod
    def from_table(cls):
        # type: () -> AnsatzParams
        """Published fit of the seam ansatz and of the bulk threshold, with their 1-sigma uncertainties.
        """
        return cls(
            alpha1=0.09789, alpha2=0.04507, alpha3=0.05326, alpha_c=0.2057, p_star=0.007176, p_bell_star=0.2983,
            alpha=0.05, p_th=7.43e-3,
            uncertainties={
                'alpha1': 0.01499, 'alpha2': 0.00108, 'alpha3': 0.00108, 'alpha_c': 0.0157,
                'p_star': 0.000039, 'p_bell_star': 0.0110, 'alpha': 0.002, 'p_th': 0.08e-3,
            },
        )

    def values(self, names):
        # type: (Sequence[Text]) -> np.ndarray
        return np.array([getattr(self, name) for name in names], dtype=float)

    def replace(self, **changes):
        # type: (**float) -> AnsatzParams
        fields = self.to_dict()
        fields.update(changes)
        return AnsatzParams.from_dict(fields)

    def to_dict(self):
        # type: () -> Dict[Text, Any]
        document = {name: getattr(self, name) for name in SEAM_PARAMETER_NAMES + BULK_PARAMETER_NAMES}
        document['uncertainties'] = dict(self.uncertainties)
        return document

    @classmethod
    def from_dict(cls, document):
        # type: (Dict[Text, Any]) -> AnsatzParams
        table = cls.from_table()
        fields = {}
        for name in SEAM_PARAMETER_NAMES + BULK_PARAMETER_NAMES:
            value = document.get(name, getattr(table, name))
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise AnsatzDomainError('{0} must be a number, got {1!r}'.format(name, value))
            fields[name] = float(value)
        return cls(uncertainties=dict(document.get('uncertainties') or {}), **fields)


def eval_bulk_ansatz(d, p, alpha, p_th):
    # type: (int, float, float, float) -> float
    """Logical error rate per round of a plain patch, alpha * (p / p_th)^((d+1)/2).
    """
    return alpha * (p / p_th) ** ((d + 1) / 2.0)


def _effective_bell_ratio(p, p_bell, params, bracket):
    # type: (float, float, AnsatzParams, SeamBracketEnum) -> float
    if p >= params.p_star:
        raise AnsatzDomainError('p={0!r} is not below the pseudo-threshold p*={1!r}'.format(p, params.p_star))
    if not 0.0 <= p_bell <= SEAM_VALIDITY_CEILING:
        raise AnsatzDomainError('p_Bell={0!r} is outside [0, {1}] where the seam ansatz holds'.format(
            p_bell, SEAM_VALIDITY_CEILING))
    correction = 1.0 + params.alpha_c / (1.0 - math.sqrt(p / params.p_star))
    if bracket == SeamBracketEnum.SQUARED:
        correction *= correction
    return p_bell / params.p_bell_star * correction


def eval_multiseam_ansatz(d_x, d_z, n_seam, p, p_bell, params, bracket=SeamBracketEnum.UNSQUARED,
                          bulk_prefactor=None):
    # type: (int, int, int, float, float, AnsatzParams, SeamBracketEnum, Optional[float]) -> float
    """X logical error rate of a d_x x d_z patch crossed by n_seam well separated seams.

    bulk_prefactor replaces alpha2 * d_z / d_x when the bulk term is scaled by some other patch length.
    """
    exponent = (d_x + 1) / 2.0
    bell_ratio = _effective_bell_ratio(p, p_bell, params, bracket)
    bulk_ratio = p / params.p_star
    if bulk_prefactor is None:
        bulk_prefactor = params.alpha2 * d_z / float(d_x)
    rate = params.alpha1 * n_seam * (p_bell / params.p_bell_star) ** exponent
    rate += bulk_prefactor * bulk_ratio ** exponent
    cross = sum(bell_ratio ** (i / 2.0) * bulk_ratio ** ((d_x + 1 - i) / 2.0) for i in range(1, d_x + 1))
    return rate + params.alpha3 * n_seam * cross


def eval_seam_ansatz(d, p, p_bell, params, bracket=SeamBracketEnum.UNSQUARED):
    # type: (int, float, float, AnsatzParams, SeamBracketEnum) -> float
    """X logical error rate per round of a d x (d+1) patch with one seam.

    Raises AnsatzDomainError for p at or above p* and for p_Bell outside [0, SEAM_VALIDITY_CEILING].
    """
    return eval_multiseam_ansatz(d, d, 1, p, p_bell, params, bracket)


class FitRow(object):

    def __init__(self, d, p, p_bell, p_l, sigma):
        # type: (int, float, float, float, float) -> None
        self.d = d
        self.p = p
        self.p_bell = p_bell
        self.p_l = p_l
        self.sigma = sigma

    def __repr__(self):
        return 'FitRow(d={0}, p={1}, p_bell={2}, p_l={3:.3e}, sigma={4:.3e})'.format(
            self.d, self.p, self.p_bell, self.p_l, self.sigma)


class FilterCounts(object):

    def __init__(self, total, dropped_sigma, dropped_distance):
        # type: (int, int, int) -> None
        self.total = total
        self.dropped_sigma = dropped_sigma
        self.dropped_distance = dropped_distance

    @property
    def used(self):
        # type: () -> int
        return self.total - self.dropped_sigma - self.dropped_distance

    def to_dict(self):
        # type: () -> Dict[Text, int]
        return {
            'total': self.total,
            'dropped_sigma': self.dropped_sigma,
            'dropped_distance': self.dropped_distance,
            'used': self.used,
        }


class FitDataset(object):
    """Rows of (d, p, p_Bell, p_L, sigma) to fit an ansatz to.
    """

    def __init__(self, rows):
        # type: (Iterable[FitRow]) -> None
        self.rows = list(rows)

    def __len__(self):
        return len(self.rows)

    @classmethod
    def from_results(cls, results, basis='Z'):
        # type: (Iterable[Dict[Text, Any]], Optional[Text]) -> FitDataset
        """Build a dataset from parsed simulate rows, keeping one memory basis (all of them when basis is None).
        """
        return cls(FitRow(row['d'], row['p'], row['p_Bell'], row['p_L'], row['sigma'])
                   for row in results if basis is None or row['basis'] == basis)

    def filtered(self, min_distance=MIN_FIT_DISTANCE):
        # type: (int) -> Tuple[FitDataset, FilterCounts]
        """Rows with sigma < p_L / 2 and d >= min_distance, and how many of each rule dropped.
        """
        kept = []
        dropped_sigma = 0
        dropped_distance = 0
        for row in self.rows:
            if not row.sigma < row.p_l / 2.0:
                dropped_sigma += 1
            elif row.d < min_distance:
                dropped_distance += 1
            else:
                kept.append(row)
        counts = FilterCounts(len(self.rows), dropped_sigma, dropped_distance)
        if dropped_sigma or dropped_distance:
            _logger.warning('Filtering dropped %d rows on sigma and %d rows on distance, %d left',
                            dropped_sigma, dropped_distance, counts.used)
        return FitDataset(kept), counts

    def columns(self):
        # type: () -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]
        return (np.array([row.d for row in self.rows], dtype=float),
                np.array([row.p for row in self.rows], dtype=float),
                np.array([row.p_bell for row in self.rows], dtype=float),
                np.array([row.p_l for row in self.rows], dtype=float),
                np.array([row.sigma for row in self.rows], dtype=float))


def parameter_names(model):
    # type: (AnsatzModelEnum) -> Tuple[Text, ...]
    return BULK_PARAMETER_NAMES if model == AnsatzModelEnum.BULK else SEAM_PARAMETER_NAMES


def _model_rates(model, theta, d, p, p_bell):
    # type: (AnsatzModelEnum, np.ndarray, np.ndarray, np.ndarray, np.ndarray) -> np.ndarray
    """Vectorized ansatz over dataset columns; trials past the pseudo-threshold map to a large constant rate.
    """
    exponent = (d + 1) / 2.0
    if model == AnsatzModelEnum.BULK:
        alpha, p_th = theta
        return alpha * (p / p_th) ** exponent
    alpha1, alpha2, alpha3, alpha_c, p_star, p_bell_star = theta
    bulk_ratio = p / p_star
    valid = bulk_ratio < 1.0
    safe_ratio = np.where(valid, bulk_ratio, 0.0)
    correction = 1.0 + alpha_c / (1.0 - np.sqrt(safe_ratio))
    if model == AnsatzModelEnum.SEAM_SQUARED:
        correction = correction ** 2
    bell_ratio = p_bell / p_bell_star * correction
    rates = alpha1 * (p_bell / p_bell_star) ** exponent + alpha2 * safe_ratio ** exponent
    cross = np.zeros_like(p)
    for i in range(1, int(d.max()) + 1):
        term = bell_ratio ** (i / 2.0) * safe_ratio ** ((d + 1 - i) / 2.0)
        cross += np.where(i <= d, term, 0.0)
    rates = rates + alpha3 * cross
    return np.where(valid, rates, _OUT_OF_DOMAIN_RATE)


class FitResult(object):
    """Fitted parameters with covariance, chi-squared and the filtering that preceded the fit.
    """

    def __init__(self, model, names, values, covariance, chi2, dof, counts, iterations, converged):
        # type: (AnsatzModelEnum, Tuple[Text, ...], np.ndarray, np.ndarray, float, int, FilterCounts, int, bool) -> None
        self.model = model
        self.names = names
        self.values = values
        self.covariance = covariance
        self.chi2 = chi2
        self.dof = dof
        self.counts = counts
        self.iterations = iterations
        self.converged = converged

    @property
    def uncertainties(self):
        # type: () -> np.ndarray
        return np.sqrt(np.diag(self.covariance))

    def params(self, base=None):
        # type: (Optional[AnsatzParams]) -> AnsatzParams
        """Fitted values merged into base (the table values by default), with 1-sigma uncertainties.
        """
        base = base or AnsatzParams.from_table()
        fitted = base.replace(**dict(zip(self.names, (float(value) for value in self.values))))
        fitted.uncertainties = {name: float(sigma) for name, sigma in zip(self.names, self.uncertainties)}
        return fitted

    def to_report(self):
        # type: () -> Dict[Text, Any]
        return {
            'model': self.model.value,
            'parameters': {name: float(value) for name, value in zip(self.names, self.values)},
            'uncertainties': {name: float(sigma) for name, sigma in zip(self.names, self.uncertainties)},
            'chi2': float(self.chi2),
            'dof': self.dof,
            'converged': self.converged,
            'iterations': self.iterations,
            'filter': self.counts.to_dict(),
            'alternatives': {name: value for name, value in AnsatzParams.ALTERNATIVE_VALUES.items()
                             if name in self.names},
        }

    def to_json(self):
        # type: () -> Text
        return json.dumps(self.to_report(), indent=2, sort_keys=True)


def chi_squared(model, values, dataset):
    # type: (AnsatzModelEnum, Sequence[float], FitDataset) -> float
    d, p, p_bell, p_l, sigma = dataset.columns()
    residuals = (p_l - _model_rates(model, np.asarray(values, dtype=float), d, p, p_bell)) / sigma
    return float(np.dot(residuals, residuals))


def fit_least_squares(dataset, model=AnsatzModelEnum.SEAM, initial=None, min_distance=MIN_FIT_DISTANCE):
    # type: (FitDataset, AnsatzModelEnum, Optional[AnsatzParams], int) -> FitResult
    """Levenberg-Marquardt minimization of chi^2 over the logarithms of the ansatz parameters.

    Rows are filtered first (sigma < p_L / 2, d >= min_distance). Raises InsufficientDataError when fewer rows than
    parameters remain and DegenerateFitError when the normal matrix at the optimum is singular.
    """
    names = parameter_names(model)
    usable, counts = dataset.filtered(min_distance)
    if len(usable) < len(names):
        raise InsufficientDataError(len(names), len(usable))
    d, p, p_bell, p_l, sigma = usable.columns()
    start = np.log((initial or AnsatzParams.from_table()).values(names))

    def residuals(log_theta):
        return (p_l - _model_rates(model, np.exp(log_theta), d, p, p_bell)) / sigma

    solution = least_squares(residuals, start, method='lm', ftol=FTOL, xtol=FTOL,
                             max_nfev=MAX_ITERATIONS * (len(names) + 1))
    converged = solution.status > 0
    if not converged:
        _logger.warning('Fit of %s stopped at the iteration cap: %s', model.value, solution.message)

    jacobian = solution.jac
    normal = jacobian.T.dot(jacobian)
    eigenvalues, eigenvectors = np.linalg.eigh(normal)
    if eigenvalues[0] <= eigenvalues[-1] * 1e-14 or eigenvalues[-1] <= 0:
        direction = eigenvectors[:, 0]
        raise DegenerateFitError({name: float(weight) for name, weight in zip(names, direction)
                                  if abs(weight) > 0.1})

    theta = np.exp(solution.x)
    log_covariance = np.linalg.inv(normal)
    covariance = np.diag(theta).dot(log_covariance).dot(np.diag(theta))
    chi2 = float(np.dot(solution.fun, solution.fun))
    result = FitResult(model, names, theta, covariance, chi2, len(usable) - len(names), counts, solution.nfev,
                       converged)
    _logger.info('Fitted %s on %d rows: chi2=%.4g, %s', model.value, len(usable), chi2,
                 ', '.join('{0}={1:.4g}'.format(name, value) for name, value in zip(names, theta)))
    return result


def fit_power_law_slope(p_values, rates):
    # type: (Sequence[float], Sequence[float]) -> Tuple[float, float]
    """Slope and intercept of log(rate) against log(p); zero rates are skipped.
    """
    pairs = [(math.log(p), math.log(rate)) for p, rate in zip(p_values, rates) if rate > 0 and p > 0]
    if len(pairs) < 2:
        raise InsufficientDataError(2, len(pairs))
    log_p, log_rate = zip(*pairs)
    slope, intercept = np.polyfit(log_p, log_rate, 1)
    return float(slope), float(intercept)


def model_rate(model, params, d, p, p_bell):
    # type: (AnsatzModelEnum, AnsatzParams, int, float, float) -> float
    if model == AnsatzModelEnum.BULK:
        return eval_bulk_ansatz(d, p, params.alpha, params.p_th)
    bracket = SeamBracketEnum.SQUARED if model == AnsatzModelEnum.SEAM_SQUARED else SeamBracketEnum.UNSQUARED
    return eval_seam_ansatz(d, p, p_bell, params, bracket)


def synthetic_dataset(model, params, distances, p_values, p_bell_values, shots, rng):
    # type: (AnsatzModelEnum, AnsatzParams, Sequence[int], Sequence[float], Sequence[float], int, np.random.Generator) -> FitDataset
    """Binomially sampled rates of a known ansatz on a grid, one round per shot.
    """
    rows = []
    for d in distances:
        for p in p_values:
            for p_bell in p_bell_values:
                rate = model_rate(model, params, d, p, p_bell)
                failures = int(rng.binomial(shots, min(rate, 1.0)))
                stats = SampleStats(shots, 1, failures)
                rows.append(FitRow(d, p, p_bell, stats.p_l, stats.sigma))
    return FitDataset(rows)


def log_spaced(low, high, count):
    # type: (float, float, int) -> List[float]
    return [float(value) for value in np.logspace(math.log10(low), math.log10(high), count)]
