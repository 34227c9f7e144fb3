"""
Run Configuration

:func:`parse_config` reads a YAML (or JSON) file into a validated
:class:`RunConfig`.  Every violation is collected before raising one
:class:`~fbpopt.errors.ConfigError`; unknown keys are violations too.

Layout::

    n_interval: 32            # required
    n_square: 32              # required, multiple of n_interval
    kappa: 1.0                # required
    lambda: 0.1               # required
    p: 4                      # required, > 2
    v: "0.05*x2*sin(pi*x1)"   # expression, number or nodal table
    gamma_d: "0.1*sin(pi*x1)"
    y_d: 0
    u0: 0
    fp_tol: 1.0e-11
    ...
    constants:                # ledger overrides
      alpha: 2.0
    checks:                   # sampling and ladder parameters
      n_samples: 50
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Tuple, Union

import yaml

from ..errors import ConfigError, ExpressionError
from .expression import Expression

if TYPE_CHECKING:
    from ..model.problem import ProblemData

logger = logging.getLogger(__name__)

DataValue = Union[Expression, float, List[Any]]

REQUIRED_KEYS = ("n_interval", "n_square", "kappa", "lambda", "p")
DATA_KEYS = ("v", "gamma_d", "y_d", "u0")
LINEAR_SOLVERS = ("direct", "cg")
C_A_COMBINE = ("max", "sum")


@dataclass(frozen=True)
class ConstantOverrides:
    """Ledger constants fixed by the user instead of estimated."""

    alpha:       Optional[float] = None
    beta:        Optional[float] = None
    C_A:         Optional[float] = None
    C_E:         Optional[float] = None
    theta1:      Optional[float] = None
    theta2:      Optional[float] = None
    L_Gprime:    Optional[float] = None
    L_Gsecond:   Optional[float] = None
    C_A_combine: str = "max"

    def ledger_overrides(self) -> Dict[str, float]:
        return {k: v for k, v in asdict(self).items() if k != "C_A_combine" and v is not None}


@dataclass(frozen=True)
class CheckSettings:
    """Sample sizes and ladders of the verification commands."""

    n_samples:          int   = 50
    n_pairs:            int   = 20
    n_contraction_pairs: int  = 100
    n_duality:          int   = 20
    fd_eps:             Tuple[float, ...] = (1e-2, 1e-3, 1e-4)
    frechet_eps:        Tuple[float, ...] = (1e-1, 5e-2, 2.5e-2, 1.25e-2, 6.25e-3)
    frechet_order:      int   = 1
    gradient_rtol:      float = 1e-4
    gradient_eps:       float = 1e-3
    duality_tol:        float = 1e-9


@dataclass(frozen=True)
class RunConfig:
    """
    Validated run configuration.

    Data entries hold a parsed :class:`~fbpopt.data.expression.Expression`,
    a number, or a (nested) list giving a nodal table.
    """

    n_interval:   int
    n_square:     int
    kappa:        float
    lam:          float
    p:            float
    v:            DataValue = 0.0
    gamma_d:      DataValue = 0.0
    y_d:          DataValue = 0.0
    u0:           DataValue = 0.0
    fp_tol:       float = 1e-11
    res_tol:      float = 1e-9
    opt_tol:      float = 1e-9
    max_fp_iter:  int   = 200
    max_opt_iter: int   = 200
    weight_floor: float = 1e-8
    linear_solver: str  = "direct"
    radius:       Optional[float] = None
    out_dir:      str   = "results"
    seed:         int   = 0
    constants:    ConstantOverrides = field(default_factory=ConstantOverrides)
    checks:       CheckSettings = field(default_factory=CheckSettings)

    def problem_data(self) -> "ProblemData":
        from ..model.problem import ProblemData

        return ProblemData(
            kappa=self.kappa,
            lam=self.lam,
            p=self.p,
            v=self.v,
            gamma_d=self.gamma_d,
            y_d=self.y_d,
            u0=self.u0,
        )

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            key = "lambda" if f.name == "lam" else f.name
            if isinstance(value, Expression):
                value = value.text
            elif isinstance(value, (ConstantOverrides, CheckSettings)):
                value = {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(value).items()}
            out[key] = value
        return out


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def parse_config(path: Union[str, Path]) -> RunConfig:
    """
    Load and validate a run configuration.

    Raises:
        FileNotFoundError: *path* does not exist.
        ConfigError:       Syntax error (with line and column) or any
                           validation failure (all listed).
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")
    try:
        with path.open("r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark is not None else ""
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"{path}: parse error{where}: {problem}") from exc

    config = config_from_dict(raw if raw is not None else {})
    logger.info("Loaded configuration from '%s'.", path)
    return config


def config_from_dict(raw: Any) -> RunConfig:
    """Validate an already-loaded mapping (see :func:`parse_config`)."""
    if not isinstance(raw, dict):
        raise ConfigError("Top level of the config must be a mapping.")
    errors: List[str] = []

    top_names = {f.name for f in fields(RunConfig)} - {"lam"} | {"lambda"}
    _reject_unknown(raw, top_names, "", errors)
    for key in REQUIRED_KEYS:
        if key not in raw:
            errors.append(f"missing required key '{key}'")

    values: Dict[str, Any] = {}
    n_interval = _integer(raw, "n_interval", None, 2, errors)
    n_square = _integer(raw, "n_square", None, 2, errors)
    if n_interval is not None and n_square is not None and n_square % n_interval:
        errors.append(f"n_square ({n_square}) must be a multiple of n_interval ({n_interval})")
    values["n_interval"], values["n_square"] = n_interval, n_square

    values["kappa"] = _positive(raw, "kappa", None, errors)
    values["lam"] = _positive(raw, "lambda", None, errors)
    p = _number(raw, "p", None, errors)
    if p is not None and not p > 2.0:
        errors.append(f"p must be > 2, got {p!r}")
    values["p"] = p

    for key in DATA_KEYS:
        values[key] = _data_value(raw.get(key, 0.0), key, errors)

    for key in ("fp_tol", "res_tol", "opt_tol", "weight_floor"):
        values[key] = _positive(raw, key, getattr(RunConfig, key), errors)
    for key in ("max_fp_iter", "max_opt_iter"):
        values[key] = _integer(raw, key, getattr(RunConfig, key), 1, errors)
    values["seed"] = _integer(raw, "seed", 0, 0, errors)

    solver = raw.get("linear_solver", "direct")
    if solver not in LINEAR_SOLVERS:
        errors.append(f"linear_solver must be one of {LINEAR_SOLVERS}, got {solver!r}")
    values["linear_solver"] = solver

    values["radius"] = _positive(raw, "radius", None, errors) if raw.get("radius") is not None else None
    out_dir = raw.get("out_dir", "results")
    if not isinstance(out_dir, str) or not out_dir:
        errors.append("out_dir must be a non-empty string")
    values["out_dir"] = out_dir

    values["constants"] = _constants(raw.get("constants") or {}, errors)
    values["checks"] = _checks(raw.get("checks") or {}, errors)

    if errors:
        raise ConfigError(errors)
    return RunConfig(**values)


# ---------------------------------------------------------------------------
# Private helpers
# ---------------------------------------------------------------------------

def _reject_unknown(raw: Dict[str, Any], allowed: set, prefix: str, errors: List[str]) -> None:
    for key in raw:
        if key not in allowed:
            errors.append(f"unknown key '{prefix}{key}'")


def _number(raw: Dict[str, Any], key: str, default: Any, errors: List[str], prefix: str = "") -> Optional[float]:
    value = raw.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        errors.append(f"{prefix}{key} must be a finite number, got {value!r}")
        return None
    return float(value)


def _positive(raw: Dict[str, Any], key: str, default: Any, errors: List[str], prefix: str = "") -> Optional[float]:
    value = _number(raw, key, default, errors, prefix)
    if value is not None and not value > 0.0:
        errors.append(f"{prefix}{key} must be > 0, got {value!r}")
    return value


def _integer(
    raw: Dict[str, Any], key: str, default: Any, minimum: int, errors: List[str], prefix: str = ""
) -> Optional[int]:
    value = raw.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        errors.append(f"{prefix}{key} must be an integer, got {value!r}")
        return None
    if value < minimum:
        errors.append(f"{prefix}{key} must be >= {minimum}, got {value!r}")
    return value


def _data_value(value: Any, key: str, errors: List[str]) -> Optional[DataValue]:
    if isinstance(value, bool):
        errors.append(f"{key} must be an expression, a number or a table, got {value!r}")
        return None
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return Expression.parse(value)
        except ExpressionError as exc:
            errors.append(f"{key}: {exc}")
            return None
    if isinstance(value, list) and value:
        return value
    errors.append(f"{key} must be an expression, a number or a table, got {value!r}")
    return None


def _constants(raw: Any, errors: List[str]) -> ConstantOverrides:
    if not isinstance(raw, dict):
        errors.append("constants must be a mapping")
        return ConstantOverrides()
    names = {f.name for f in fields(ConstantOverrides)}
    _reject_unknown(raw, names, "constants.", errors)
    values: Dict[str, Any] = {}
    for name in sorted(names - {"C_A_combine"}):
        if raw.get(name) is not None:
            values[name] = _positive(raw, name, None, errors, "constants.")
    combine = raw.get("C_A_combine", "max")
    if combine not in C_A_COMBINE:
        errors.append(f"constants.C_A_combine must be one of {C_A_COMBINE}, got {combine!r}")
    values["C_A_combine"] = combine
    return ConstantOverrides(**values)


def _checks(raw: Any, errors: List[str]) -> CheckSettings:
    if not isinstance(raw, dict):
        errors.append("checks must be a mapping")
        return CheckSettings()
    defaults = CheckSettings()
    _reject_unknown(raw, {f.name for f in fields(CheckSettings)}, "checks.", errors)
    values: Dict[str, Any] = {}
    for name in ("n_samples", "n_pairs", "n_contraction_pairs", "n_duality"):
        values[name] = _integer(raw, name, getattr(defaults, name), 1, errors, "checks.")
    for name in ("fd_eps", "frechet_eps"):
        ladder = raw.get(name, list(getattr(defaults, name)))
        if not isinstance(ladder, list) or not ladder or not all(
            isinstance(e, (int, float)) and not isinstance(e, bool) and e > 0 for e in ladder
        ):
            errors.append(f"checks.{name} must be a non-empty list of positive numbers")
            ladder = list(getattr(defaults, name))
        values[name] = tuple(float(e) for e in ladder)
    order = raw.get("frechet_order", defaults.frechet_order)
    if order not in (1, 2):
        errors.append(f"checks.frechet_order must be 1 or 2, got {order!r}")
    values["frechet_order"] = order
    for name in ("gradient_rtol", "gradient_eps", "duality_tol"):
        values[name] = _positive(raw, name, getattr(defaults, name), errors, "checks.")
    return CheckSettings(**values)
