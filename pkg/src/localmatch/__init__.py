"""Local matching algorithms on configuration-model graphs.

Simulation of greedy-family matching algorithms built jointly with the
multigraph (uniform stub pairing), the measure-valued state they induce, and
fixed-step RK4 solvers for the corresponding large-graph limit ODE systems,
with Monte Carlo versus fluid comparison tooling.
"""

from .criteria import CriterionKind, choose_first, choose_match, kernel_pair
from .degrees import DegreeModel, DegreeVector, parse_model_spec, pmf_truncated, sample_degree_vector
from .fluid import FluidSystem, rhs, solve, solve_poisson_greedy
from .measures import CountingMeasure, RealMeasure, moment, normalize, remove_atom, shift_atom_down, size_biased
from .offline import SimpleGraph, enumerate_offline, run_offline
from .rng import RandomSource
from . import cm

__version__ = "0.1.0"

__all__ = [
    "CriterionKind", "choose_first", "choose_match", "kernel_pair",
    "DegreeModel", "DegreeVector", "parse_model_spec", "pmf_truncated", "sample_degree_vector",
    "FluidSystem", "rhs", "solve", "solve_poisson_greedy",
    "CountingMeasure", "RealMeasure", "moment", "normalize", "remove_atom",
    "shift_atom_down", "size_biased",
    "SimpleGraph", "enumerate_offline", "run_offline",
    "RandomSource", "cm", "__version__",
]
