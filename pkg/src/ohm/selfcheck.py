"""Invariant suite run by ``ohm selfcheck``.

Checks are evaluated in a fixed order per graph; the first failure is what
the command line reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import jacobi, oracle, spectral, tokens
from .graph import WeightedGraph, demand_vector, grounded_operators, operator_matrices

__all__ = ["CheckResult", "graph_checks", "run_selfcheck", "convergence_bound_holds"]

SELFCHECK_SEED = 20240601


@dataclass(frozen=True)
class CheckResult:
    graph: str
    name: str
    ok: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.graph}: {self.name} ({self.detail})"


def convergence_bound_holds(g: WeightedGraph, rounds: int = 300) -> tuple[bool, float]:
    """Check ``||phi_t - p|| <= bound(t)`` for ``t <= rounds`` in extended
    precision.  Returns ``(holds, worst ratio)``.

    Precision is chosen so that rounding stays far below the smallest bound
    value; in double precision the bound drops under the roundoff floor long
    before ``t = 300`` on fast-mixing graphs.
    """
    import mpmath

    rho, _ = spectral.grounded_spectral_radius(g)
    smallest = tokens.diffusion_rate_bound(g, rounds, rho) if rho > 0 else 1.0
    dps = 40 + (int(-math.log10(smallest)) if smallest > 0 else 0)
    dps = max(dps, 40)
    with mpmath.workdps(dps):
        rho_mp = spectral.grounded_spectral_radius_mp(g, dps)
        phi = tokens.expected_iterates(g, rounds, dps=dps)
        p = oracle.solve_grounded_mp(g, dps)
        worst = mpmath.mpf(0)
        holds = True
        for t in range(rounds + 1):
            diff = mpmath.sqrt(mpmath.fsum((a - b) ** 2 for a, b in zip(phi[t], p)))
            bound = tokens.diffusion_rate_bound(g, t, rho_mp)
            if diff > bound:
                holds = False
            if bound > 0:
                worst = max(worst, diff / bound)
        return holds, float(worst)


def graph_checks(g: WeightedGraph, name: str = "graph", ops=None):
    """Yield a :class:`CheckResult` per invariant for one graph.

    ``ops`` overrides the operator bundle (the fault-injection hook).
    """
    ops = operator_matrices(g) if ops is None else ops
    A, L, P, N = ops.A, ops.L, ops.P, ops.N
    n = g.n
    ones = np.ones(n)
    b = demand_vector(g)

    def res(check, ok, detail):
        return CheckResult(name, check, bool(ok), detail)

    err = np.abs(A - A.T).max()
    yield res("adjacency_symmetry", err == 0, f"max|A-A^T|={err:.3g}")
    err = np.abs(P @ ones - 1).max()
    yield res("transition_rows", err <= 1e-12, f"max|P1-1|={err:.3g}")
    err = np.abs(L @ ones).max()
    yield res("laplacian_kernel", err <= 1e-12, f"max|L1|={err:.3g}")
    dh = np.sqrt(np.diag(ops.D))
    err = np.abs(N - dh[:, None] * P / dh[None, :]).max()
    yield res("normalized_similarity", err <= 1e-12, f"max|N-D^.5 P D^-.5|={err:.3g}")

    P_under, _, P_ground = grounded_operators(g)
    ev_under = np.sort(np.linalg.eigvals(P_under).real)
    ev_ground = np.sort(np.append(np.linalg.eigvals(P_ground).real, 0.0))
    err = np.abs(ev_under - ev_ground).max()
    yield res("grounded_spectrum", err <= 1e-9, f"max eig gap={err:.3g}")

    p = oracle.solve_grounded(g)
    err = oracle.residual_inf(g, p)
    yield res("oracle_residual", err <= 1e-9 and p[g.sink] == 0, f"|Lp-b|={err:.3g}")
    err = np.abs(oracle.neumann_potentials(g) - p).max()
    yield res("oracle_neumann", err <= 1e-8, f"|p-series|={err:.3g}")
    err = abs(oracle.energy(g, p) - p[g.source])
    yield res("energy_source_potential", err <= 1e-9, f"|E-p_s|={err:.3g}")
    f = oracle.edge_flows(g, p)
    net = np.zeros(n)
    for (u, v), x in f.items():
        net[u] += x
    err = np.abs(net - b).max()
    yield res("flow_conservation", err <= 1e-9, f"max|net-b|={err:.3g}")

    traj = jacobi.run_jacobi(g, 200, beta=1.0, stop_tol=0.0)
    rho_s = spectral.rho_star(g)
    e0 = np.linalg.norm(jacobi.error_decomposition(p, traj[0].p_tilde).e_perp)
    worst = -np.inf
    for s in traj:
        ratio = np.linalg.norm(jacobi.error_decomposition(p, s.p_tilde).e_perp) / e0
        worst = max(worst, ratio - jacobi.jacobi_rate_bound(g, s.t, rho_s))
    yield res("jacobi_rate_bound", worst <= 1e-9, f"max(ratio-bound)={worst:.3g}")
    ok = all(s.messages_sent == 2 * g.m * s.t for s in traj)
    yield res("jacobi_messages", ok, f"2m={2 * g.m}")
    shifted = jacobi.run_jacobi(g, 50, p0=np.full(n, 7.0), stop_tol=0.0)
    err = max(np.abs(a.p_tilde + 7.0 - c.p_tilde).max() for a, c in zip(traj, shifted))
    yield res("jacobi_kernel_shift", err <= 1e-12, f"max shift error={err:.3g}")

    phi = tokens.expected_iterates(g, 300)
    ok = bool(np.all(phi >= 0) and np.all(np.diff(phi, axis=0) >= 0) and np.all(phi[:, g.sink] == 0))
    yield res("expected_monotone", ok, "phi >= 0, nondecreasing, sink 0")
    holds, worst = convergence_bound_holds(g)
    yield res("diffusion_rate_bound", holds, f"max ratio={worst:.3g}")

    rho_u, rhs = spectral.perron_identity(g)
    yield res("perron_identity", abs(rho_u - rhs) <= 1e-9, f"gap={abs(rho_u - rhs):.3g}")
    if n > 2:
        ok = 0 < rho_u < 1
    else:
        ok = rho_u == 0
    yield res("grounded_radius_range", ok, f"rho_under={rho_u:.6g}")
    _, y2 = spectral.perturbed_eigvec_norm(g)
    ok = 1 / ops.vol_max - 1e-10 <= y2 <= 1 / ops.vol_min + 1e-10
    yield res("y_norm_sandwich", ok, f"|y|^2={y2:.6g}")
    checks = [spectral.check_min_lambda(g)]
    if n <= spectral.MAX_EXACT_NODES:
        checks = [spectral.check_cheeger(g), spectral.check_lambda2_expansion(g)] + checks
    for c in checks:
        yield res(c.name, c.holds, f"{c.lhs:.6g} <= {c.rhs:.6g}" + (" vacuous" if c.vacuous else ""))

    run = tokens.run_diffusion(g, 8, 40, SELFCHECK_SEED, replications=4)
    c = run.counts
    ok = bool(np.all(c[:, :, g.sink] == 0) and np.all(c >= 0))
    conserved = np.all(
        c[1:].sum(axis=2) == c[:-1].sum(axis=2) - run.absorbed[1:] + run.K
    )
    yield res("token_sink_empty", ok, "Z_sink = 0, Z >= 0")
    yield res("token_conservation", bool(conserved), "end = start - absorbed + K")
    again = tokens.run_diffusion(g, 8, 40, SELFCHECK_SEED, replications=4)
    yield res("token_determinism", bool(np.array_equal(c, again.counts)), "same seed, same counts")


def run_selfcheck(graphs: dict[str, WeightedGraph] | None = None, inject_fault: bool = False):
    """Run :func:`graph_checks` over ``graphs`` (default suite) and return
    the list of results.

    ``inject_fault`` corrupts one adjacency weight of the first graph on one
    side only, which must be caught.
    """
    from .generators import default_suite

    graphs = default_suite() if graphs is None else graphs
    results = []
    for i, (name, g) in enumerate(graphs.items()):
        ops = None
        if inject_fault and i == 0:
            ops = operator_matrices(g)
            u, v, w = g.edges[0]
            A = ops.A.copy()
            A[u, v] = 1.5 * w
            ops = ops._replace(A=A)
        results.extend(graph_checks(g, name, ops))
    return results
