"""Optimal transport with repulsive Coulomb cost.

Exact discrete Kantorovich solver with a forbidden diagonal, closed-form
optimal maps in one dimension and for radial densities, energy functionals,
the marginal re-instatement and mollification machinery, and generalised
Legendre transforms.
"""

from .costs import COULOMB, CostSpec, coulomb, power_cost
from .densities import Density, discretize, dilate, lp_norms, median_split, mollify, normalize
from .exact_maps import (
    MedianSplitMap,
    RadialMap,
    evaluate,
    monge_cost,
    pushforward_residual,
    solve_map_1d,
    solve_map_radial,
)
from .exceptions import CoulombOTError
from .functionals import EnergyReport, e_ot, energy_report, lda, mean_field_j
from .kantorovich import KantorovichSolver, brute_force_oracle, solve
from .legendre import PotentialField, c_transform, generalized_legendre
from .measures import DiscreteMeasure, TransportPlan

__version__ = "0.1.0"

__all__ = [
    "COULOMB",
    "CostSpec",
    "CoulombOTError",
    "Density",
    "DiscreteMeasure",
    "EnergyReport",
    "KantorovichSolver",
    "MedianSplitMap",
    "PotentialField",
    "RadialMap",
    "TransportPlan",
    "brute_force_oracle",
    "c_transform",
    "coulomb",
    "dilate",
    "discretize",
    "e_ot",
    "energy_report",
    "evaluate",
    "generalized_legendre",
    "lda",
    "lp_norms",
    "mean_field_j",
    "median_split",
    "mollify",
    "monge_cost",
    "normalize",
    "power_cost",
    "pushforward_residual",
    "solve",
    "solve_map_1d",
    "solve_map_radial",
]
