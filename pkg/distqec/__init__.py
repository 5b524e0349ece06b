# -*- coding: utf-8 -*-


__author__ = 'distqec developers'
__version__ = '0.1.0'
