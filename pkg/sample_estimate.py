#!/usr/bin/env python
# -*- coding: utf-8 -*-
from __future__ import print_function
from __future__ import absolute_import
from __future__ import unicode_literals

from distqec.ansatz_fit import AnsatzParams, eval_seam_ansatz
from distqec.monte_carlo import estimate_logical_rate
from distqec.patch_builder import PatchSpec, PatchVariantEnum, build_circuit
from distqec.resource_model import EstimateConfig, format_duration, run_estimate

spec = PatchSpec(5, variant=PatchVariantEnum.SEAM, p=1e-3, p_bell=0.02)
circuit = build_circuit(spec)

print('Seam patch')
print(spec)
stats = estimate_logical_rate(circuit, 20000, seed=7, threads=4)
print('{0} logical failures in {1} shots, {2:.3e} per round'.format(stats.failures, stats.shots, stats.p_l))

params = AnsatzParams.from_table()
print('\nAnsatz prediction per round')
print('{0:.3e}'.format(eval_seam_ansatz(spec.d, spec.p, spec.p_bell, params)))

print('\nDefault overhead sweep')
for row in run_estimate(EstimateConfig.default(), threads=4):
    result = row.result
    print('{0:<12} p_Bell={1:<5} d={2} factory={3} qubits={4} time={5} space +{6:.1%} time +{7:.1%}'.format(
        row.mode.value, '-' if row.p_bell is None else row.p_bell, result.d, result.factory.index, result.n_phys,
        format_duration(result.expected_duration), row.space_overhead, row.time_overhead))
