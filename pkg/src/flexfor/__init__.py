"""Feasible operation region identification for synthetic LV feeders."""

from .feeder import FeederModel, FeederSpec, build_feeder, standard_feeder
from .geometry import ForPolygon, convex_hull, jaccard
from .powerflow import solve, solve_many
from .revol import RevolConfig, sweep
from .sampling import DirichletConfig, sample_dirichlet_two_stage, sample_uniform

__version__ = "0.1.0"

__all__ = [
    "FeederModel",
    "FeederSpec",
    "build_feeder",
    "standard_feeder",
    "ForPolygon",
    "convex_hull",
    "jaccard",
    "solve",
    "solve_many",
    "RevolConfig",
    "sweep",
    "DirichletConfig",
    "sample_dirichlet_two_stage",
    "sample_uniform",
    "__version__",
]
