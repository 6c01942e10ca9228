"""Spectral and combinatorial quantities, and numerical checks of the bounds
that depend on them.

All eigenvalues are taken from symmetric conjugates (``N``, the grounded
``N``, graph Laplacians) with a dense symmetric solver.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .exceptions import BoundViolation, TooLargeForExact
from .graph import WeightedGraph, operator_matrices

__all__ = [
    "MAX_EXACT_NODES",
    "BoundCheck",
    "SpectralReport",
    "eigen_spectrum",
    "rho_star",
    "grounded_spectral_radius",
    "grounded_spectral_radius_mp",
    "perron_identity",
    "perturbed_eigvec_norm",
    "conductance",
    "edge_expansion",
    "laplacian_lambda2",
    "check_cheeger",
    "check_lambda2_expansion",
    "check_min_lambda",
    "spectral_report",
]

MAX_EXACT_NODES = 24
BOUND_TOL = 1e-10


class BoundCheck(NamedTuple):
    """One side-by-side inequality evaluation.

    ``lhs`` and ``rhs`` are oriented so the claim is always ``lhs <= rhs``
    (up to ``BOUND_TOL``).  ``vacuous`` marks a check whose hypothesis fails.
    """

    name: str
    lhs: float
    rhs: float
    holds: bool
    vacuous: bool = False


def _raise_if_violated(check: BoundCheck, strict: bool) -> BoundCheck:
    check = check._replace(lhs=float(check.lhs), rhs=float(check.rhs), holds=bool(check.holds))
    if strict and not check.holds:
        raise BoundViolation(f"{check.name}: {check.lhs!r} > {check.rhs!r}")
    return check


def eigen_spectrum(g: WeightedGraph) -> np.ndarray:
    """Eigenvalues of the transition matrix, descending (via ``N``)."""
    N = operator_matrices(g).N
    return np.linalg.eigvalsh(N)[::-1]


def rho_star(g: WeightedGraph) -> float:
    rho = eigen_spectrum(g)
    return float(max(abs(rho[1]), abs(rho[-1])))


def _grounded_normalized(g: WeightedGraph):
    keep = np.delete(np.arange(g.n), g.sink)
    A = g.adjacency[np.ix_(keep, keep)]
    s = 1.0 / np.sqrt(g.volumes[keep])
    return s[:, None] * A * s[None, :], keep


def grounded_spectral_radius(g: WeightedGraph):
    """Return ``(rho_under, v)``.

    ``v`` is the left Perron vector of the grounded transition matrix (sink
    deleted), nonnegative with unit l1 norm.  It is recovered from the top
    eigenvector ``x`` of the grounded ``N`` as ``D^{1/2} x``.
    """
    Ng, keep = _grounded_normalized(g)
    evals, evecs = np.linalg.eigh(Ng)
    rho = float(evals[-1])
    # Perron root of a nonnegative matrix dominates every |eigenvalue|.
    rho = max(rho, 0.0)
    x = np.abs(evecs[:, -1])  # eigenspace blocks have disjoint supports
    v = np.sqrt(g.volumes[keep]) * x
    v /= v.sum()
    return rho, v


def grounded_spectral_radius_mp(g: WeightedGraph, dps: int):
    """Grounded spectral radius as an ``mpmath.mpf`` at ``dps`` digits."""
    import mpmath

    Ng, keep = _grounded_normalized(g)
    with mpmath.workdps(dps):
        vol = [mpmath.mpf(float(x)) for x in g.volumes[keep]]
        k = len(keep)
        M = mpmath.zeros(k, k)
        for i in range(k):
            for j in range(k):
                a = g.adjacency[keep[i], keep[j]]
                if a:
                    M[i, j] = mpmath.mpf(float(a)) / mpmath.sqrt(vol[i] * vol[j])
        if k == 1:
            return +M[0, 0]
        evals = mpmath.eigsy(M, eigvals_only=True)
        return max(evals)


def perron_identity(g: WeightedGraph) -> tuple[float, float]:
    """Return ``(rho_under, 1 - sum_i v_i P[i, sink])``; the two agree."""
    rho, v = grounded_spectral_radius(g)
    P = operator_matrices(g).P
    keep = np.delete(np.arange(g.n), g.sink)
    return rho, float(1.0 - v @ P[keep, g.sink])


def perturbed_eigvec_norm(g: WeightedGraph) -> tuple[float, float]:
    """Return ``(lambda_under, ||y||^2)``.

    ``x`` is the unit eigenvector of the perturbed normalized Laplacian
    ``I - N_ground`` for its smallest eigenvalue ``lambda_under`` and
    ``y = D^{-1/2} x`` with the original volumes.
    """
    Ng, keep = _grounded_normalized(g)
    evals, evecs = np.linalg.eigh(np.eye(len(keep)) - Ng)
    y = evecs[:, 0] / np.sqrt(g.volumes[keep])
    return float(evals[0]), float(y @ y)


# -- exhaustive cuts -------------------------------------------------------


def _cut_table(g: WeightedGraph):
    """Cut weight, volume and size for every nonempty proper subset.

    Subsets are indexed by bitmask; returns arrays over masks ``1..2^n-2``.
    """
    n = g.n
    if n > MAX_EXACT_NODES:
        raise TooLargeForExact(f"exhaustive cuts need n <= {MAX_EXACT_NODES}, got {n}")
    masks = np.arange(1, (1 << n) - 1, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    vol = bits @ g.volumes
    cut = np.zeros(len(masks))
    for u, v, w in g.edges:
        cut += w * (bits[:, u] != bits[:, v])
    return masks, bits, cut, vol


def conductance(g: WeightedGraph):
    """Exact graph conductance and one minimizing set (sorted node ids)."""
    masks, bits, cut, vol = _cut_table(g)
    ok = vol <= g.volumes.sum() / 2
    ratio = np.where(ok, cut / np.where(ok, vol, 1.0), np.inf)
    i = int(np.argmin(ratio))
    return float(ratio[i]), tuple(int(u) for u in np.flatnonzero(bits[i]))


def edge_expansion(g: WeightedGraph):
    """Exact edge expansion and one minimizing set (sorted node ids)."""
    masks, bits, cut, _ = _cut_table(g)
    size = bits.sum(axis=1)
    ok = size <= g.n / 2
    ratio = np.where(ok, cut / np.maximum(size, 1), np.inf)
    i = int(np.argmin(ratio))
    return float(ratio[i]), tuple(int(u) for u in np.flatnonzero(bits[i]))


def laplacian_lambda2(L: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(L)[1])


# -- bound checks ----------------------------------------------------------


def check_cheeger(g: WeightedGraph, strict: bool = False) -> BoundCheck:
    """``rho_2 <= 1 - phi^2 / 2``."""
    rho2 = float(eigen_spectrum(g)[1])
    phi, _ = conductance(g)
    rhs = 1.0 - phi**2 / 2
    return _raise_if_violated(
        BoundCheck("cheeger", rho2, rhs, rho2 <= rhs + BOUND_TOL), strict
    )


def check_lambda2_expansion(g: WeightedGraph, strict: bool = False) -> BoundCheck:
    """``lambda_2 >= vol_max - sqrt(vol_max^2 - theta^2)``.

    Reported as ``lhs = vol_max - sqrt(...)`` and ``rhs = lambda_2``.
    """
    ops = operator_matrices(g)
    lam2 = laplacian_lambda2(ops.L)
    theta, _ = edge_expansion(g)
    vmax = ops.vol_max
    lower = vmax - np.sqrt(max(vmax**2 - theta**2, 0.0))
    return _raise_if_violated(
        BoundCheck("lambda2_expansion", float(lower), lam2, lower <= lam2 + BOUND_TOL),
        strict,
    )


def _sink_removed_laplacian(g: WeightedGraph):
    keep = np.delete(np.arange(g.n), g.sink)
    A = g.adjacency[np.ix_(keep, keep)]
    return np.diag(A.sum(axis=1)) - A, keep


def _connected_without_sink(g: WeightedGraph) -> bool:
    keep = [u for u in range(g.n) if u != g.sink]
    if len(keep) < 2:
        return False
    seen = {keep[0]}
    stack = [keep[0]]
    while stack:
        u = stack.pop()
        for v in g.neighbors[u][0]:
            v = int(v)
            if v != g.sink and v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(keep)


def min_lambda_bound(g: WeightedGraph):
    """Lower bound on ``lambda_under``; ``None`` when the sink-removed graph is
    disconnected or a single node.  Returns ``(bound, lambda_bar_2)``."""
    if not _connected_without_sink(g):
        return None, (0.0 if g.n > 2 else float("nan"))
    Lbar, keep = _sink_removed_laplacian(g)
    lam_bar2 = laplacian_lambda2(Lbar)
    w_sink = g.adjacency[keep, g.sink]
    s = float(np.sum(w_sink / (w_sink + lam_bar2)))
    vmax = float(g.volumes.max())
    return lam_bar2 / (2 * vmax * (g.n - 1)) * s, lam_bar2


def check_min_lambda(g: WeightedGraph, strict: bool = False) -> BoundCheck:
    """``lambda_under >= lambda_bar_2 / (2 vol_max (n-1)) * sum_i w_is/(w_is + lambda_bar_2)``.

    Reported as ``lhs = bound`` and ``rhs = lambda_under``.  Vacuous (and
    reported as holding) when the sink-removed graph is not connected.
    """
    rho, _ = grounded_spectral_radius(g)
    lam = 1.0 - rho
    bound, _ = min_lambda_bound(g)
    if bound is None:
        return BoundCheck("min_lambda", 0.0, lam, True, vacuous=True)
    return _raise_if_violated(
        BoundCheck("min_lambda", bound, lam, lam >= bound - BOUND_TOL), strict
    )


# -- report ----------------------------------------------------------------


@dataclass
class SpectralReport:
    rho: list
    rho_star: float
    rho_under: float
    lambda_under: float
    lambda_bar_2: float | None
    phi_cond: float | None
    phi_witness: list | None
    theta: float | None
    theta_witness: list | None
    vol_min: float
    vol_max: float
    perron_gap: float
    degenerate_ground: bool
    checks: dict = field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return all(c["holds"] for c in self.checks.values())

    def to_dict(self) -> dict:
        return asdict(self)


def spectral_report(g: WeightedGraph) -> SpectralReport:
    """Every spectral quantity plus pass/fail for each bound.

    Cut-based quantities (conductance, expansion and the two checks using
    them) are omitted when ``n`` exceeds :data:`MAX_EXACT_NODES`.
    """
    ops = operator_matrices(g)
    rho = eigen_spectrum(g)
    rho_u, perron_rhs = perron_identity(g)
    checks = {}
    phi = phi_w = theta = theta_w = None
    if g.n <= MAX_EXACT_NODES:
        phi, phi_w = conductance(g)
        theta, theta_w = edge_expansion(g)
        for c in (check_cheeger(g), check_lambda2_expansion(g)):
            checks[c.name] = c._asdict()
    c = check_min_lambda(g)
    checks[c.name] = c._asdict()
    _, lam_bar2 = min_lambda_bound(g)
    return SpectralReport(
        rho=[float(x) for x in rho],
        rho_star=float(max(abs(rho[1]), abs(rho[-1]))),
        rho_under=rho_u,
        lambda_under=1.0 - rho_u,
        lambda_bar_2=None if np.isnan(lam_bar2) else float(lam_bar2),
        phi_cond=phi,
        phi_witness=list(phi_w) if phi_w else None,
        theta=theta,
        theta_witness=list(theta_w) if theta_w else None,
        vol_min=ops.vol_min,
        vol_max=ops.vol_max,
        perron_gap=abs(rho_u - perron_rhs),
        degenerate_ground=g.n == 2,
        checks=checks,
    )
