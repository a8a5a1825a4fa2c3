# -*- coding: utf-8 -*-

"""
Configuration layer: preset inheritance, layered merging and validation.
"""

from .inherit import DEFAULTS
from .inherit import inherit_value
from .inherit import apply_inheritance
from .merge import deep_merge
from .schema import Mode
from .schema import SensorLayout
from .schema import ModelConfig
from .schema import TimeConfig
from .schema import ReducedConfig
from .schema import ObservationConfig
from .schema import TransportConfig
from .schema import ExperimentConfig
from .schema import TransportRunConfig
from .loader import load_presets
from .loader import preset_names
from .loader import resolve_mapping
from .loader import load_config
from .loader import load_transport_config
