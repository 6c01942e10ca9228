"""Exact Kirchhoff solver and derived electrical quantities."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .exceptions import SingularSystem
from .graph import WeightedGraph, demand_vector, grounded_operators, operator_matrices

__all__ = [
    "solve_grounded",
    "solve_grounded_mp",
    "neumann_potentials",
    "edge_flows",
    "energy",
    "residual_inf",
]


def solve_grounded(g: WeightedGraph) -> np.ndarray:
    """Potentials ``p`` with ``L p = b`` and ``p[sink] = 0``.

    The sink row and column are removed from the Laplacian; what remains is
    symmetric positive definite on a connected graph and is solved by
    Cholesky factorization.
    """
    L = operator_matrices(g).L
    b = demand_vector(g)
    keep = np.delete(np.arange(g.n), g.sink)
    try:
        c = scipy.linalg.cho_factor(L[np.ix_(keep, keep)])
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"reduced Laplacian not positive definite: {exc}") from exc
    p = np.zeros(g.n)
    p[keep] = scipy.linalg.cho_solve(c, b[keep])
    return p


def solve_grounded_mp(g: WeightedGraph, dps: int):
    """Grounded potentials as a list of ``mpmath.mpf`` at ``dps`` digits."""
    import mpmath

    with mpmath.workdps(dps):
        keep = [u for u in range(g.n) if u != g.sink]
        idx = {u: i for i, u in enumerate(keep)}
        Lr = mpmath.zeros(len(keep), len(keep))
        for u, v, w in g.edges:
            w = mpmath.mpf(w)
            for a, c in ((u, v), (v, u)):
                if a in idx:
                    Lr[idx[a], idx[a]] += w
                    if c in idx:
                        Lr[idx[a], idx[c]] -= w
        rhs = mpmath.zeros(len(keep), 1)
        rhs[idx[g.source]] = 1
        x = mpmath.lu_solve(Lr, rhs)
        p = [mpmath.mpf(0)] * g.n
        for u in keep:
            p[u] = x[idx[u]]
        return p


def neumann_potentials(g: WeightedGraph, tol: float = 1e-15, max_terms: int = 1_000_000):
    """``(I - P_under)^{-1} D^{-1} b_under`` summed as a Neumann series.

    Independent of :func:`solve_grounded`: uses only matrix-vector products
    with the grounded transition matrix.  Summation stops once a term's
    infinity norm falls below ``tol`` times the running sum.
    """
    P_under, b_under, _ = grounded_operators(g)
    term = b_under / g.volumes
    total = term.copy()
    for _ in range(max_terms):
        term = P_under @ term
        total += term
        if np.abs(term).max() <= tol * np.abs(total).max():
            return total
    raise SingularSystem("Neumann series did not converge")


def edge_flows(g: WeightedGraph, p) -> dict[tuple[int, int], float]:
    """Current on each ordered edge: ``f(u, v) = w_uv (p_u - p_v)``."""
    p = np.asarray(p, dtype=float)
    f = {}
    for u, v, w in g.edges:
        f[(u, v)] = w * (p[u] - p[v])
        f[(v, u)] = -f[(u, v)]
    return f


def energy(g: WeightedGraph, p) -> float:
    """Dissipated energy ``p^T L p``."""
    p = np.asarray(p, dtype=float)
    return float(p @ operator_matrices(g).L @ p)


def residual_inf(g: WeightedGraph, p) -> float:
    p = np.asarray(p, dtype=float)
    return float(np.abs(operator_matrices(g).L @ p - demand_vector(g)).max())
