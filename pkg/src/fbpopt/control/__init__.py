from .cost import ReducedCost
from .optimizer import optimize, stationarity_residual
from .projection import l2_inner, l2_norm, on_boundary, project_Uad
from .soc import check_quadratic_growth, check_stationarity, in_cone, sample_cone_directions, verify_soc

__all__ = [
    "ReducedCost",
    "check_quadratic_growth",
    "check_stationarity",
    "in_cone",
    "l2_inner",
    "l2_norm",
    "on_boundary",
    "optimize",
    "project_Uad",
    "sample_cone_directions",
    "stationarity_residual",
    "verify_soc",
]
