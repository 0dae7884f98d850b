"""Branch-and-cut for mixed integer bilevel linear programs."""

from ._kernels import BACKEND
from .bilevel import BilevelOracle, check_feasibility, classify_relaxation_solution, phi, reaction
from .bruteforce import enumerate as enumerate_bilevel
from .model import MiblpInstance, Point, RawInstance, canonicalize, check_assumptions, interdiction_instance
from .search import SolverConfig, bundle, default_config, solve

__all__ = [
    "BACKEND", "BilevelOracle", "MiblpInstance", "Point", "RawInstance", "SolverConfig",
    "bundle", "canonicalize", "check_assumptions", "check_feasibility", "classify_relaxation_solution",
    "default_config", "enumerate_bilevel", "interdiction_instance", "phi", "reaction", "solve",
]
__version__ = "0.1.0"
