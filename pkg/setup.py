#!/usr/bin/env python
# -*- coding: utf-8 -*-
from __future__ import absolute_import

from distqec import __author__, __version__
from setuptools import setup


DISTQEC_SETUP = {
    'name': 'distqec',
    'version': __version__,
    'packages': ['distqec'],
    'package_data': {'distqec': ['data/*.json']},
    'description': 'Rotated surface code memories split across networked processors: circuits, decoding, '
                   'Monte Carlo, ansatz fits and resource estimates.',
    'python_requires': '>=3.7',
    'install_requires': ['numpy>=1.17', 'scipy>=1.4', 'networkx>=2.4'],
    'entry_points': {'console_scripts': ['distqec = distqec.cli:main']},
    'author': __author__,

    'test_suite': 'run_tests.load_suite',
}


if __name__ == "__main__":
    setup(**DISTQEC_SETUP)
