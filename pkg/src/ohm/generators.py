"""Graph families used as test substrates, and the default verification suite."""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .exceptions import ConnectivityRetryExhausted, Disconnected, InvalidParams
from .graph import WeightedGraph, build_graph, read_graph

__all__ = ["FAMILIES", "generate", "default_suite", "random_suite", "SUITE_ENV"]

FAMILIES = ("path", "cycle", "complete", "grid", "barbell", "random")
SUITE_ENV = "OHM_SUITE_DIR"
MAX_RETRIES = 1000


def _finish(n, edges, source, sink):
    source = 0 if source is None else source
    sink = n - 1 if sink is None else sink
    return build_graph(n, edges, source, sink)


def generate(family: str, n: int, *, p: float = 0.5, wmin: float = 0.1, wmax: float = 10.0,
             seed: int = 0, source: int | None = None, sink: int | None = None,
             weight: float = 1.0) -> WeightedGraph:
    """Build a graph from a named family.

    ``path``, ``cycle`` and ``complete`` have ``n`` nodes; ``grid`` is the
    ``n x n`` lattice; ``barbell`` joins two ``K_n`` by one edge (``2n``
    nodes).  These use uniform ``weight``.  ``random`` is an Erdos-Renyi graph
    with edge probability ``p`` and weights log-uniform on ``[wmin, wmax]``,
    redrawn until connected.  Source defaults to node 0 and sink to the last
    node.
    """
    if family not in FAMILIES:
        raise InvalidParams(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    n = int(n)
    if weight <= 0:
        raise InvalidParams(f"weight must be positive, got {weight}")

    if family == "path":
        if n < 2:
            raise InvalidParams("path needs n >= 2")
        return _finish(n, [(i, i + 1, weight) for i in range(n - 1)], source, sink)
    if family == "cycle":
        if n < 3:
            raise InvalidParams("cycle needs n >= 3")
        return _finish(n, [(i, (i + 1) % n, weight) for i in range(n)], source, sink)
    if family == "complete":
        if n < 2:
            raise InvalidParams("complete needs n >= 2")
        edges = [(i, j, weight) for i in range(n) for j in range(i + 1, n)]
        return _finish(n, edges, source, sink)
    if family == "grid":
        if n < 2:
            raise InvalidParams("grid needs side n >= 2")
        edges = []
        for r in range(n):
            for c in range(n):
                u = r * n + c
                if c + 1 < n:
                    edges.append((u, u + 1, weight))
                if r + 1 < n:
                    edges.append((u, u + n, weight))
        return _finish(n * n, edges, source, sink)
    if family == "barbell":
        if n < 2:
            raise InvalidParams("barbell needs clique size n >= 2")
        edges = [(i, j, weight) for i in range(n) for j in range(i + 1, n)]
        edges += [(n + i, n + j, weight) for i in range(n) for j in range(i + 1, n)]
        edges.append((n - 1, n, weight))
        return _finish(2 * n, edges, source, sink)

    # random
    if n < 2:
        raise InvalidParams("random needs n >= 2")
    if not 0 < p <= 1:
        raise InvalidParams(f"edge probability must lie in (0, 1], got {p}")
    if not 0 < wmin <= wmax:
        raise InvalidParams(f"need 0 < wmin <= wmax, got [{wmin}, {wmax}]")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    for _ in range(MAX_RETRIES):
        keep = rng.random(iu.size) < p
        w = np.exp(rng.uniform(np.log(wmin), np.log(wmax), size=iu.size))
        edges = [(int(i), int(j), float(x)) for i, j, x in zip(iu[keep], ju[keep], w[keep])]
        try:
            return _finish(n, edges, source, sink)
        except Disconnected:
            continue
    raise ConnectivityRetryExhausted(
        f"no connected random({n}, {p}) graph after {MAX_RETRIES} draws"
    )


def random_suite(count: int, n_range=(3, 12), p: float = 0.5, seed: int = 0):
    """``count`` connected random graphs with ``n`` drawn from ``n_range``."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        out.append(generate("random", n, p=p, seed=seed * 100_003 + i))
    return out


def _builtin_suite() -> dict[str, WeightedGraph]:
    suite = {
        "single_edge": generate("path", 2),
        "P3": generate("path", 3),
        "K4": generate("complete", 4),
        "C5": generate("cycle", 5, sink=2),
        "grid3": generate("grid", 3),
        "barbell4": generate("barbell", 4),
    }
    for s in range(10):
        suite[f"random8_s{s}"] = generate("random", 8, p=0.5, seed=s)
    return suite


def default_suite() -> dict[str, WeightedGraph]:
    """Named suite graphs.

    When ``OHM_SUITE_DIR`` is set, every ``*.txt`` edge-list file in that
    directory is loaded instead (keyed by file stem, sorted).
    """
    root = os.environ.get(SUITE_ENV)
    if root:
        files = sorted(Path(root).glob("*.txt"))
        return {f.stem: read_graph(f) for f in files}
    return _builtin_suite()
