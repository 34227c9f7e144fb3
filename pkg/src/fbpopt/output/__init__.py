"""
Output Module

Report data models and JSON/CSV rendering.
"""

from .formatter import field_frame, format_report, format_table
from .models import (
    BallReport,
    CheckStatus,
    ContractionReport,
    FeasibilityReport,
    GrowthReport,
    LipschitzReport,
    OptResult,
    SOCReport,
    StationarityReport,
)

__all__ = [
    "BallReport",
    "CheckStatus",
    "ContractionReport",
    "FeasibilityReport",
    "GrowthReport",
    "LipschitzReport",
    "OptResult",
    "SOCReport",
    "StationarityReport",
    "field_frame",
    "format_report",
    "format_table",
]
