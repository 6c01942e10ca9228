"""Token diffusion: absorbing random walks that estimate grounded potentials.

Every round ``K`` tokens are injected at the source; each token already in
the network moves to one neighbour chosen with probability ``w_uv / vol(u)``
and tokens landing on the sink are absorbed.  The count ``Z(u)`` at node ``u``
gives the estimate ``Z(u) / (K vol(u))``, whose expectation follows a
deterministic affine recurrence with the grounded transition matrix.

Round phases, in order: all tokens present at the start of the round move
simultaneously; ``K`` fresh tokens appear at the source; the sink is emptied.
Freshly injected tokens first move in the following round.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import _rng
from .exceptions import DegenerateSpectrum, ParameterOutOfRange, TokenOverflow
from .graph import WeightedGraph, grounded_operators
from .oracle import energy, solve_grounded
from .spectral import grounded_spectral_radius

__all__ = [
    "TokenState",
    "DiffusionRun",
    "initial_tokens",
    "diffusion_round",
    "estimate",
    "expected_iterate_step",
    "expected_iterates",
    "diffusion_rate_bound",
    "accuracy_threshold",
    "min_injection_rate",
    "token_count_bound",
    "run_diffusion",
    "violation_frequency",
]

MAX_COUNT = 2**53


@dataclass(frozen=True)
class TokenState:
    Z: np.ndarray
    K: int
    t: int = 0
    seed: int = 0
    moves_total: int = 0
    replication: int = 0

    @property
    def total(self) -> int:
        return int(self.Z.sum())


def initial_tokens(g: WeightedGraph, K: int, seed: int, replication: int = 0) -> TokenState:
    if K < 1:
        raise ParameterOutOfRange(f"K must be >= 1, got {K}")
    return TokenState(Z=np.zeros(g.n, dtype=np.int64), K=int(K), seed=int(seed),
                      replication=int(replication))


@lru_cache(maxsize=64)
def _move_tables(g: WeightedGraph):
    """Padded per-node neighbour ids and cumulative move probabilities.

    Neighbours are in increasing id order; each row's CDF ends exactly at 1
    and padding is ``inf`` so it is never selected by a draw in ``[0, 1)``.
    """
    dmax = max(len(nbrs) for nbrs, _ in g.neighbors)
    nbr = np.zeros((g.n, dmax), dtype=np.int64)
    cdf = np.full((g.n, dmax), np.inf)
    for u, (nbrs, w) in enumerate(g.neighbors):
        c = np.cumsum(w) / w.sum()
        c[-1] = 1.0
        nbr[u, : len(nbrs)] = nbrs
        cdf[u, : len(nbrs)] = c
    return nbr, cdf


def _advance(g: WeightedGraph, Z: np.ndarray, K: int, seed: int, reps: np.ndarray, rnd: int):
    """Play round ``rnd`` for a batch of replications.

    ``Z`` has shape ``(R, n)``; ``reps`` holds the replication index of each
    row.  Returns ``(Z_next, moved, absorbed)``, the last two per row.
    """
    R, n = Z.shape
    nbr, cdf = _move_tables(g)
    counts = Z.ravel()
    moved = Z.sum(axis=1)
    node = np.repeat(np.tile(np.arange(n), R), counts)
    row = np.repeat(np.repeat(np.arange(R), n), counts)
    # token index within its replication, in node-id order
    offsets = np.concatenate(([0], np.cumsum(moved)[:-1]))
    index = np.arange(node.size, dtype=np.int64) - offsets[row]
    keys = _rng.stream_keys(seed, reps, rnd)
    U = _rng.uniforms(keys[row], index)
    choice = (cdf[node] <= U[:, None]).sum(axis=1)
    dest = nbr[node, choice]
    Z_next = np.bincount(row * n + dest, minlength=R * n).reshape(R, n).astype(np.int64)
    absorbed = Z_next[:, g.sink].copy()
    Z_next[:, g.source] += K
    Z_next[:, g.sink] = 0
    if Z_next.size and Z_next.max() > MAX_COUNT:
        raise TokenOverflow(f"token count exceeded 2^53 in round {rnd}")
    return Z_next, moved, absorbed


def diffusion_round(g: WeightedGraph, state: TokenState) -> TokenState:
    """Advance one round; randomness depends only on
    ``(seed, replication, round, token index)``."""
    Z, moved, _ = _advance(
        g, state.Z[None, :], state.K, state.seed,
        np.array([state.replication]), state.t + 1,
    )
    return replace(state, Z=Z[0], t=state.t + 1,
                   moves_total=state.moves_total + int(moved[0]))


def estimate(state: TokenState, g: WeightedGraph) -> np.ndarray:
    return state.Z / (state.K * g.volumes)


def expected_iterate_step(g: WeightedGraph, phi) -> np.ndarray:
    """``P_under phi + D^{-1} b_under``; zero at the sink."""
    P_under, b_under, _ = grounded_operators(g)
    return P_under @ np.asarray(phi, dtype=float) + b_under / g.volumes


def expected_iterates(g: WeightedGraph, rounds: int, dps: int | None = None):
    """Expected estimates for ``t = 0..rounds`` starting from zero.

    Returns an array of shape ``(rounds + 1, n)``.  With ``dps`` set, the
    recurrence runs in ``mpmath`` at that many digits and a list of lists of
    ``mpf`` is returned instead.
    """
    if dps is None:
        P_under, b_under, _ = grounded_operators(g)
        c = b_under / g.volumes
        out = np.zeros((rounds + 1, g.n))
        for t in range(rounds):
            out[t + 1] = P_under @ out[t] + c
        return out

    import mpmath

    with mpmath.workdps(dps):
        vol = [mpmath.mpf(0)] * g.n
        for u, v, w in g.edges:
            vol[u] += mpmath.mpf(w)
            vol[v] += mpmath.mpf(w)
        # row u of P_under as (v, w_uv / vol(u)) pairs
        rows = [[] for _ in range(g.n)]
        for u, v, w in g.edges:
            if g.sink in (u, v):
                continue
            rows[u].append((v, mpmath.mpf(w) / vol[u]))
            rows[v].append((u, mpmath.mpf(w) / vol[v]))
        phi = [mpmath.mpf(0)] * g.n
        out = [phi]
        for _ in range(rounds):
            nxt = [mpmath.fsum(p * phi[v] for v, p in rows[u]) for u in range(g.n)]
            nxt[g.source] += 1 / vol[g.source]
            out.append(nxt)
            phi = nxt
        return out


def diffusion_rate_bound(g: WeightedGraph, t: int, rho_under=None):
    """``sqrt(vol_max/vol_min) * rho**t / ((1 - rho) vol(source))``.

    ``rho_under`` may be an ``mpmath.mpf``; the result then is too.
    """
    if rho_under is None:
        rho_under, _ = grounded_spectral_radius(g)
    if rho_under >= 1:
        raise DegenerateSpectrum(f"grounded spectral radius {rho_under} >= 1")
    vol = g.volumes
    scale = math.sqrt(vol.max() / vol.min()) / vol[g.source]
    if isinstance(rho_under, float):
        return float(scale * rho_under**t / (1.0 - rho_under))
    return scale * rho_under**t / (1 - rho_under)


def _check_eps_delta(eps, delta):
    if not (0 < eps <= 1 and 0 < delta < 1):
        raise ParameterOutOfRange(f"need 0 < eps <= 1 and 0 < delta < 1, got {eps}, {delta}")


def accuracy_threshold(eps: float, delta: float, K: float, g: WeightedGraph, u: int) -> float:
    """Smallest expected potential for which the estimate at ``u`` is an
    ``(eps, delta)``-approximation: ``3 ln(2/delta) / (eps^2 K vol(u))``."""
    _check_eps_delta(eps, delta)
    if K < 1:
        raise ParameterOutOfRange(f"K must be >= 1, got {K}")
    return 3.0 * math.log(2.0 / delta) / (eps**2 * K * g.volumes[u])


def min_injection_rate(eps: float, delta: float, floor: float, g: WeightedGraph, u: int) -> float:
    """Real-valued ``K`` at which potentials ``>= floor`` at ``u`` reach the
    ``(eps, delta)`` guarantee; round up for an integer rate."""
    _check_eps_delta(eps, delta)
    if floor <= 0:
        raise ParameterOutOfRange(f"potential floor must be positive, got {floor}")
    return 3.0 * math.log(2.0 / delta) / (eps**2 * floor * g.volumes[u])


def token_count_bound(g: WeightedGraph, K: int, p=None) -> tuple[float, float]:
    """Stationary expected token total and its upper bound ``K n vol_max E``."""
    if p is None:
        p = solve_grounded(g)
    exact = K * float(g.volumes @ p)
    bound = K * g.n * float(g.volumes.max()) * energy(g, p)
    return exact, bound


def violation_frequency(est: np.ndarray, phi: np.ndarray, eps: float) -> np.ndarray:
    """Per-node fraction of rows with ``|est - phi| > eps * phi``."""
    return (np.abs(est - phi) > eps * phi).mean(axis=0)


@dataclass
class DiffusionRun:
    """Counts for every replication and round.

    ``counts[t, r, u]`` is ``Z(u)`` at the end of round ``t`` of replication
    ``r``; ``moves[t, r]`` and ``absorbed[t, r]`` refer to round ``t``
    (both zero for ``t = 0``).
    """

    graph: WeightedGraph
    K: int
    seed: int
    counts: np.ndarray
    moves: np.ndarray
    absorbed: np.ndarray

    @property
    def rounds(self) -> int:
        return self.counts.shape[0] - 1

    @property
    def replications(self) -> int:
        return self.counts.shape[1]

    def estimates(self) -> np.ndarray:
        return self.counts / (self.K * self.graph.volumes)

    # statistics are taken on the integer counts, then scaled, so that a
    # constant count has exactly zero variance
    def mean(self) -> np.ndarray:
        return self.counts.mean(axis=1) / (self.K * self.graph.volumes)

    def variance(self) -> np.ndarray:
        if self.replications < 2:
            return np.zeros((self.rounds + 1, self.graph.n))
        return self.counts.var(axis=1, ddof=1) / (self.K * self.graph.volumes) ** 2

    def std_error(self) -> np.ndarray:
        return np.sqrt(self.variance() / self.replications)

    def summary(self) -> dict:
        g = self.graph
        T = self.rounds
        phi = expected_iterates(g, T)
        try:
            rate = diffusion_rate_bound(g, T)
        except DegenerateSpectrum:
            rate = None
        exact, bound = token_count_bound(g, self.K)
        return {
            "K": self.K,
            "seed": self.seed,
            "rounds": T,
            "replications": self.replications,
            "mean": self.mean()[T].tolist(),
            "variance": self.variance()[T].tolist(),
            "phi": phi[T].tolist(),
            "moves_mean": self.moves.mean(axis=1).tolist(),
            "bounds": {
                "convergence": rate,
                "expected_tokens": exact,
                "token_count_bound": bound,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        g = self.graph
        phi = expected_iterates(g, self.rounds)
        est = self.estimates()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["replication", "t", "node", "Z", "estimate", "phi", "moves"])
        for r in range(self.replications):
            for t in range(self.rounds + 1):
                for u in range(g.n):
                    w.writerow([r, t, u, int(self.counts[t, r, u]), repr(float(est[t, r, u])),
                                repr(float(phi[t, u])), int(self.moves[t, r])])
        return buf.getvalue()


def run_diffusion(g: WeightedGraph, K: int, rounds: int, seed: int,
                  replications: int = 1) -> DiffusionRun:
    """Simulate ``replications`` independent runs of ``rounds`` rounds.

    Replication ``r`` draws from the stream ``(seed, r)``, so results do not
    depend on how many replications run alongside it.
    """
    if rounds < 0:
        raise ParameterOutOfRange(f"rounds must be >= 0, got {rounds}")
    if replications < 1:
        raise ParameterOutOfRange(f"replications must be >= 1, got {replications}")
    if K < 1:
        raise ParameterOutOfRange(f"K must be >= 1, got {K}")
    R = replications
    reps = np.arange(R)
    counts = np.zeros((rounds + 1, R, g.n), dtype=np.int64)
    moves = np.zeros((rounds + 1, R), dtype=np.int64)
    absorbed = np.zeros((rounds + 1, R), dtype=np.int64)
    for t in range(rounds):
        counts[t + 1], moves[t + 1], absorbed[t + 1] = _advance(
            g, counts[t], K, seed, reps, t + 1
        )
    return DiffusionRun(graph=g, K=int(K), seed=int(seed), counts=counts,
                        moves=moves, absorbed=absorbed)
