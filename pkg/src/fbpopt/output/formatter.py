"""
Output Formatter

Renders reports to JSON and fields, traces and check tables to CSV.
CSV uses 17 significant digits, a comma delimiter and a header row, so the
same inputs always give byte-identical files.
"""

from __future__ import annotations

import json
import logging
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

import numpy as np
import pandas as pd

from ..fem.fields import BoundaryCurve, BulkField, ControlProfile

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"

Rows = Union[pd.DataFrame, Iterable[Dict[str, Any]]]


def format_report(payload: Dict[str, Any], save_path: Optional[Union[str, Path]] = None) -> str:
    """
    Render a report dict as indented JSON.

    Args:
        payload:   Report content (NumPy scalars and arrays are converted).
        save_path: When provided the output is also written to this path.

    Returns:
        The rendered string.
    """
    output = json.dumps(payload, indent=2, ensure_ascii=False, default=_json_default) + "\n"
    if save_path:
        _write(Path(save_path), output)
    return output


def format_table(rows: Rows, save_path: Optional[Union[str, Path]] = None) -> str:
    """Render rows (or a frame) as CSV; written to *save_path* when given."""
    frame = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(list(rows))
    output = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    if save_path:
        _write(Path(save_path), output)
    return output


# ---------------------------------------------------------------------------
# Field tables
# ---------------------------------------------------------------------------

def field_frame(fields: Dict[str, Union[BoundaryCurve, ControlProfile, BulkField]]) -> pd.DataFrame:
    """
    Long-format table of nodal fields: ``field, node, x1, x2, value``.

    Interval fields are placed on Gamma (``x2 = 1``).
    """
    frames: List[pd.DataFrame] = []
    for name, f in fields.items():
        if isinstance(f, BulkField):
            x1, x2 = f.mesh.x1, f.mesh.x2
        else:
            x1 = f.mesh.nodes
            x2 = np.ones_like(x1)
        frames.append(pd.DataFrame({
            "field": name,
            "node": np.arange(f.values.size),
            "x1": x1,
            "x2": x2,
            "value": f.values,
        }))
    return pd.concat(frames, ignore_index=True)


# ---------------------------------------------------------------------------
# Private helpers
# ---------------------------------------------------------------------------

def _write(path: Path, output: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(output, encoding="utf-8")
    logger.info("Wrote %s.", path)


def _json_default(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, Path):
        return str(obj)
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable.")
