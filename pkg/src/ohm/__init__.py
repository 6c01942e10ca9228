"""Decentralized electrical-flow estimation on weighted graphs.

Two round-based processes approximate the Kirchhoff potentials of a
source/sink network: deterministic Jacobi exchange (:mod:`ohm.jacobi`) and
randomized token diffusion (:mod:`ohm.tokens`).  :mod:`ohm.oracle` solves the
system exactly and :mod:`ohm.spectral` evaluates the spectral quantities that
govern convergence.
"""

from .exceptions import *  # noqa: F401,F403
from .graph import (
    OperatorBundle,
    WeightedGraph,
    build_graph,
    demand_vector,
    grounded_operators,
    operator_matrices,
    parse_graph,
    read_graph,
    serialize_graph,
    write_graph,
)
from .oracle import edge_flows, energy, solve_grounded
from .generators import default_suite, generate
from .estimators import (
    JacobiSolver,
    KirchhoffSolver,
    SpectralProfile,
    TokenDiffusionEstimator,
    check_graph,
)

__version__ = "0.1.0"
