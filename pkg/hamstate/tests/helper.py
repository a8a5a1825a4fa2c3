# -*- coding: utf-8 -*-

"""
Run one test file (or the whole suite) from its ``__main__`` block, with or
without coverage.
"""

import subprocess
from pathlib import Path
import sys
import webbrowser

from ..paths import dir_project_root, dir_htmlcov, path_cov_index_html


def run_unit_test(
    script: str,
):
    args = [sys.executable, "-m", "pytest", script, "-s", "--tb=native"]
    subprocess.run(args, cwd=f"{dir_project_root}", check=False)


def run_cov_test(
    script: str,
    module: str,
    preview: bool = False,
    is_folder: bool = False,
):
    """
    :param module: dotted name of the module whose coverage is reported
    :param is_folder: ``script`` is a test folder runner, test its whole
        directory
    """
    target = str(Path(script).parent) if is_folder else script
    args = [
        sys.executable,
        "-m",
        "pytest",
        target,
        "-s",
        "--tb=native",
        f"--cov={module}",
        "--cov-report",
        "term-missing",
        "--cov-report",
        f"html:{dir_htmlcov}",
    ]
    subprocess.run(args, cwd=f"{dir_project_root}", check=False)
    if preview:  # pragma: no cover
        webbrowser.open(path_cov_index_html.as_uri())
