"""
Data Module

Data expressions and the run configuration.
"""

from .config import CheckSettings, ConstantOverrides, RunConfig, config_from_dict, parse_config
from .expression import Expression

__all__ = [
    "CheckSettings",
    "ConstantOverrides",
    "Expression",
    "RunConfig",
    "config_from_dict",
    "parse_config",
]
