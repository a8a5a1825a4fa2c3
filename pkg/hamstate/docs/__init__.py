# -*- coding: utf-8 -*-

"""
Data rendered into the Sphinx documentation through ``sphinx-jinja``.
"""

from ..config.loader import load_presets

doc_data = dict(
    presets=load_presets(),
)
