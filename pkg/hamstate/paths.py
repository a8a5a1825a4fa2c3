# -*- coding: utf-8 -*-

from pathlib import Path

dir_here = Path(__file__).absolute().parent
dir_package = dir_here
PACKAGE_NAME = dir_package.name

dir_project_root = dir_package.parent

# ------------------------------------------------------------------------------
# Test Related
# ------------------------------------------------------------------------------
dir_htmlcov = dir_project_root / "htmlcov"
path_cov_index_html = dir_htmlcov / "index.html"

# ------------------------------------------------------------------------------
# Config Related
# ------------------------------------------------------------------------------
path_presets = dir_package / "config" / "presets.toml"

# ------------------------------------------------------------------------------
# Experiment Related
# ------------------------------------------------------------------------------
dir_default_output = dir_project_root / "output"
"""
Default ``--out-dir`` of the command line interface.
"""
