"""Weighted source/sink graphs and the matrix operators built from them.

Nodes are the dense integers ``0..n-1``.  Every matrix is dense; the package
targets verification at desk scale, not large sparse systems.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple

import numpy as np

from .exceptions import (
    Disconnected,
    DuplicateEdge,
    GraphSyntaxError,
    IdOutOfRange,
    NonPositiveWeight,
    SourceEqualsSink,
)

__all__ = [
    "WeightedGraph",
    "OperatorBundle",
    "build_graph",
    "operator_matrices",
    "demand_vector",
    "grounded_operators",
    "parse_graph",
    "serialize_graph",
    "read_graph",
    "write_graph",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class WeightedGraph:
    """Connected undirected graph with positive conductances.

    ``edges`` holds ``(u, v, w)`` triples with ``u < v``, sorted.  Instances
    are validated by :func:`build_graph`; construct them through it.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]
    source: int
    sink: int

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        for u, v, w in self.edges:
            A[u, v] = A[v, u] = w
        return _frozen(A)

    @cached_property
    def volumes(self) -> np.ndarray:
        return _frozen(self.adjacency.sum(axis=1))

    @cached_property
    def neighbors(self) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
        """Per node: neighbor ids in increasing order and matching weights."""
        A = self.adjacency
        out = []
        for u in range(self.n):
            nbrs = np.flatnonzero(A[u])
            out.append((_frozen(nbrs), _frozen(A[u, nbrs].copy())))
        return tuple(out)

    def weight(self, u: int, v: int) -> float:
        return float(self.adjacency[u, v])

    def __repr__(self) -> str:
        return (
            f"WeightedGraph(n={self.n}, m={self.m}, "
            f"source={self.source}, sink={self.sink})"
        )


class OperatorBundle(NamedTuple):
    A: np.ndarray
    D: np.ndarray
    L: np.ndarray
    P: np.ndarray
    N: np.ndarray
    vol_min: float
    vol_max: float


def _is_connected(n: int, edges: Iterable[tuple[int, int, float]]) -> bool:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    components = n
    for u, v, _ in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            components -= 1
    return components == 1


def build_graph(n, edge_list, source, sink) -> WeightedGraph:
    """Validate raw input and return a :class:`WeightedGraph`.

    Raises
    ------
    IdOutOfRange, SourceEqualsSink, DuplicateEdge, NonPositiveWeight,
    Disconnected
    """
    n = int(n)
    if n < 2:
        raise IdOutOfRange(f"need at least 2 nodes, got n={n}")
    source, sink = int(source), int(sink)
    for name, node in (("source", source), ("sink", sink)):
        if not 0 <= node < n:
            raise IdOutOfRange(f"{name} {node} outside 0..{n - 1}")
    if source == sink:
        raise SourceEqualsSink(f"source and sink are both {source}")

    seen = {}
    for item in edge_list:
        u, v, w = item
        u, v, w = int(u), int(v), float(w)
        if not (0 <= u < n and 0 <= v < n):
            raise IdOutOfRange(f"edge ({u}, {v}) outside 0..{n - 1}")
        if u == v:
            raise IdOutOfRange(f"self-loop at node {u}")
        if not (w > 0 and np.isfinite(w)):
            raise NonPositiveWeight(f"edge ({u}, {v}) has weight {w}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise DuplicateEdge(f"edge {key} listed twice")
        seen[key] = w

    edges = tuple(sorted((u, v, w) for (u, v), w in seen.items()))
    if not _is_connected(n, edges):
        raise Disconnected("graph is not connected")
    return WeightedGraph(n=n, edges=edges, source=source, sink=sink)


def operator_matrices(g: WeightedGraph) -> OperatorBundle:
    """Adjacency, volume, Laplacian, transition and normalized matrices."""
    A = g.adjacency.copy()
    vol = g.volumes
    D = np.diag(vol)
    L = D - A
    P = A / vol[:, None]
    s = 1.0 / np.sqrt(vol)
    N = s[:, None] * A * s[None, :]
    return OperatorBundle(
        A=A, D=D, L=L, P=P, N=N, vol_min=float(vol.min()), vol_max=float(vol.max())
    )


def demand_vector(g: WeightedGraph) -> np.ndarray:
    """Unit current: +1 at the source, -1 at the sink."""
    b = np.zeros(g.n)
    b[g.source] = 1.0
    b[g.sink] = -1.0
    return b


def grounded_operators(g: WeightedGraph):
    """Return ``(P_under, b_under, P_ground)``.

    ``P_under`` is the transition matrix with the sink row and column zeroed,
    ``b_under`` the demand with the sink entry zeroed, and ``P_ground`` is
    ``P_under`` with the sink row and column deleted (order of the remaining
    nodes preserved).
    """
    P = operator_matrices(g).P
    P_under = P.copy()
    P_under[g.sink, :] = 0.0
    P_under[:, g.sink] = 0.0
    b_under = demand_vector(g)
    b_under[g.sink] = 0.0
    keep = np.delete(np.arange(g.n), g.sink)
    P_ground = P_under[np.ix_(keep, keep)]
    return P_under, b_under, P_ground


# -- edge-list text format -------------------------------------------------


def serialize_graph(g: WeightedGraph) -> str:
    buf = io.StringIO()
    buf.write(f"{g.n}\n")
    for u, v, w in g.edges:
        buf.write(f"{u} {v} {w!r}\n")
    buf.write(f"source {g.source}\n")
    buf.write(f"sink {g.sink}\n")
    return buf.getvalue()


def parse_graph(text: str) -> WeightedGraph:
    """Parse the edge-list format.

    First non-comment line is ``n``; then ``u v w`` lines; ``source <id>`` and
    ``sink <id>`` may appear anywhere after ``n``.  ``#`` starts a comment.
    """
    n = None
    source = sink = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if n is None:
            if len(fields) != 1:
                raise GraphSyntaxError("expected node count on first line", lineno)
            n = _parse_int(fields[0], lineno)
            continue
        head = fields[0].lower()
        if head in ("source", "sink"):
            if len(fields) != 2:
                raise GraphSyntaxError(f"expected '{head} <id>'", lineno)
            if (source if head == "source" else sink) is not None:
                raise GraphSyntaxError(f"{head} declared twice", lineno)
            node = _parse_int(fields[1], lineno)
            if head == "source":
                source = node
            else:
                sink = node
            continue
        if len(fields) != 3:
            raise GraphSyntaxError("expected 'u v w'", lineno)
        u = _parse_int(fields[0], lineno)
        v = _parse_int(fields[1], lineno)
        try:
            w = float(fields[2])
        except ValueError:
            raise GraphSyntaxError(f"bad weight {fields[2]!r}", lineno) from None
        edges.append((u, v, w))

    if n is None:
        raise GraphSyntaxError("empty document")
    if source is None or sink is None:
        raise GraphSyntaxError("missing 'source' or 'sink' declaration")
    return build_graph(n, edges, source, sink)


def _parse_int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise GraphSyntaxError(f"expected integer, got {token!r}", lineno) from None


def read_graph(path) -> WeightedGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


def write_graph(g: WeightedGraph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_graph(g))
