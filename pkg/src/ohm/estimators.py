"""scikit-learn style wrappers.

Each estimator is fitted on a graph and exposes node potentials through
``predict``.  ``X`` may be a :class:`~ohm.graph.WeightedGraph` or an
``(m, 3)`` array of ``u, v, w`` rows, in which case ``source`` and ``sink``
must be given (to ``fit`` or the constructor).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .graph import WeightedGraph, build_graph
from .jacobi import error_decomposition, run_jacobi
from .oracle import edge_flows, energy, solve_grounded
from .spectral import spectral_report
from .tokens import expected_iterates, run_diffusion

__all__ = [
    "check_graph",
    "KirchhoffSolver",
    "JacobiSolver",
    "TokenDiffusionEstimator",
    "SpectralProfile",
]


def check_graph(X, source=None, sink=None, n=None) -> WeightedGraph:
    """Coerce ``X`` to a validated :class:`WeightedGraph`.

    Given a graph, ``source``/``sink`` (if not None) must match it.  Given an
    edge array, ``n`` defaults to one more than the largest node id.
    """
    if isinstance(X, WeightedGraph):
        for name, want, have in (("source", source, X.source), ("sink", sink, X.sink)):
            if want is not None and want != have:
                raise ValueError(f"{name}={want} conflicts with graph {name}={have}")
        return X
    E = np.asarray(X, dtype=float)
    if E.ndim != 2 or E.shape[1] != 3:
        raise ValueError(f"expected an (m, 3) edge array, got shape {E.shape}")
    if source is None or sink is None:
        raise ValueError("source and sink are required with an edge array")
    ids = E[:, :2]
    if not np.all(ids == np.round(ids)):
        raise ValueError("node ids must be integers")
    if n is None:
        n = int(ids.max()) + 1 if len(E) else 0
    return build_graph(n, [(int(u), int(v), w) for u, v, w in E], source, sink)


def _select(values: np.ndarray, nodes):
    if nodes is None:
        return values.copy()
    return values[np.asarray(nodes, dtype=int)]


class _PotentialMixin:
    def predict(self, X=None):
        """Potentials at node ids ``X`` (all nodes when omitted)."""
        check_is_fitted(self, "potentials_")
        return _select(self.potentials_, X)


class KirchhoffSolver(_PotentialMixin, BaseEstimator):
    """Exact grounded potentials by direct factorization."""

    def __init__(self, source=None, sink=None):
        self.source = source
        self.sink = sink

    def fit(self, X, y=None):
        g = check_graph(X, self.source, self.sink)
        self.graph_ = g
        self.potentials_ = solve_grounded(g)
        self.energy_ = energy(g, self.potentials_)
        self.flows_ = edge_flows(g, self.potentials_)
        return self


class JacobiSolver(_PotentialMixin, BaseEstimator):
    """Decentralized Jacobi iteration.

    Potentials are only defined up to an additive constant; ``potentials_``
    is the raw final iterate and ``grounded_potentials_`` shifts it so the
    sink reads zero.
    """

    def __init__(self, rounds=200, beta=1.0, stop_tol=1e-12, p0=None, source=None, sink=None):
        self.rounds = rounds
        self.beta = beta
        self.stop_tol = stop_tol
        self.p0 = p0
        self.source = source
        self.sink = sink

    def fit(self, X, y=None):
        g = check_graph(X, self.source, self.sink)
        traj = run_jacobi(g, self.rounds, beta=self.beta, p0=self.p0, stop_tol=self.stop_tol)
        last = traj[-1]
        self.graph_ = g
        self.trajectory_ = traj
        self.n_rounds_ = last.t
        self.messages_ = last.messages_sent
        self.potentials_ = last.p_tilde.copy()
        self.grounded_potentials_ = last.p_tilde - last.p_tilde[g.sink]
        return self

    def score(self, X=None, y=None):
        """Negative norm of the zero-mean error against the exact solution."""
        check_is_fitted(self, "potentials_")
        ref = solve_grounded(self.graph_)
        return -float(np.linalg.norm(error_decomposition(ref, self.potentials_).e_perp))


class TokenDiffusionEstimator(_PotentialMixin, BaseEstimator):
    """Monte-Carlo token diffusion; ``potentials_`` is the replication mean
    of the final-round estimate and ``expected_`` its exact expectation."""

    def __init__(self, K=100, rounds=100, seed=0, replications=1, source=None, sink=None):
        self.K = K
        self.rounds = rounds
        self.seed = seed
        self.replications = replications
        self.source = source
        self.sink = sink

    def fit(self, X, y=None):
        if self.seed is None:
            raise ValueError("seed is required for token runs")
        g = check_graph(X, self.source, self.sink)
        run = run_diffusion(g, self.K, self.rounds, self.seed, self.replications)
        self.graph_ = g
        self.run_ = run
        self.potentials_ = run.mean()[-1]
        self.variance_ = run.variance()[-1]
        self.expected_ = expected_iterates(g, self.rounds)[-1]
        return self


class SpectralProfile(BaseEstimator):
    """Spectral quantities of a graph as fitted attributes."""

    def __init__(self, source=None, sink=None):
        self.source = source
        self.sink = sink

    def fit(self, X, y=None):
        self.graph_ = check_graph(X, self.source, self.sink)
        r = spectral_report(self.graph_)
        self.report_ = r
        self.eigenvalues_ = np.array(r.rho)
        self.rho_star_ = r.rho_star
        self.rho_under_ = r.rho_under
        self.conductance_ = r.phi_cond
        self.edge_expansion_ = r.theta
        return self
