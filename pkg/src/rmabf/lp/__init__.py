from .build import build_elp, build_offline_lp
from .model import (ConfidenceModel, LpSolution, LpStatus, OccupancyMeasure, StandardFormLP,
                    occupancy_from_solution)
from .solve import HighsSolver, solve_lp

__all__ = [
    "ConfidenceModel", "HighsSolver", "LpSolution", "LpStatus", "OccupancyMeasure",
    "StandardFormLP", "build_elp", "build_offline_lp", "occupancy_from_solution", "solve_lp",
]
