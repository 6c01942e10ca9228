import numpy as np
import pytest
from hypothesis import strategies as st

from ohm import build_graph, generate


@pytest.fixture
def edge():
    return build_graph(2, [(0, 1, 1.0)], 0, 1)


@pytest.fixture
def p3():
    return build_graph(3, [(0, 1, 1.0), (1, 2, 1.0)], 0, 2)


@pytest.fixture
def k3():
    return generate("complete", 3)


@pytest.fixture
def k4():
    return generate("complete", 4)


@st.composite
def graphs(draw, min_n=2, max_n=8):
    """Connected weighted graphs: a random spanning tree plus extra edges."""
    n = draw(st.integers(min_n, max_n))
    weight = st.floats(0.1, 10.0)
    edges = {}
    for v in range(1, n):
        u = draw(st.integers(0, v - 1))
        edges[(u, v)] = draw(weight)
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=n))
    for u, v in extra:
        if u != v:
            edges.setdefault((min(u, v), max(u, v)), draw(weight))
    source = draw(st.integers(0, n - 1))
    sink = draw(st.integers(0, n - 1).filter(lambda s: s != source))
    return build_graph(n, [(u, v, w) for (u, v), w in edges.items()], source, sink)


def brute_force_potentials(g):
    """Grounded potentials from a plain dense solve of the full Laplacian with
    the sink equation replaced by ``p_sink = 0``."""
    n = g.n
    L = np.zeros((n, n))
    for u, v, w in g.edges:
        L[u, u] += w
        L[v, v] += w
        L[u, v] -= w
        L[v, u] -= w
    b = np.zeros(n)
    b[g.source], b[g.sink] = 1.0, -1.0
    L[g.sink] = 0.0
    L[g.sink, g.sink] = 1.0
    b[g.sink] = 0.0
    return np.linalg.solve(L, b)
