# -*- coding: utf-8 -*-

from .helper import run_unit_test, run_cov_test
