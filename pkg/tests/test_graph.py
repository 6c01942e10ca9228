import numpy as np
import pytest
from hypothesis import given, settings

from ohm import (
    build_graph,
    demand_vector,
    generate,
    grounded_operators,
    operator_matrices,
    parse_graph,
    serialize_graph,
)
from ohm.exceptions import (
    Disconnected,
    DuplicateEdge,
    GraphSyntaxError,
    IdOutOfRange,
    NonPositiveWeight,
    SourceEqualsSink,
)

from conftest import graphs


def test_smallest_graph(edge):
    assert (edge.n, edge.m, edge.source, edge.sink) == (2, 1, 0, 1)


def test_path_construction(p3):
    assert p3.edges == ((0, 1, 1.0), (1, 2, 1.0))


@pytest.mark.parametrize(
    "args, exc",
    [
        ((3, [(0, 1, 1.0)], 0, 2), Disconnected),
        ((2, [(0, 1, 1.0), (1, 0, 2.0)], 0, 1), DuplicateEdge),
        ((2, [(0, 1, 0.0)], 0, 1), NonPositiveWeight),
        ((2, [(0, 1, -1.0)], 0, 1), NonPositiveWeight),
        ((2, [(0, 1, float("nan"))], 0, 1), NonPositiveWeight),
        ((2, [(0, 1, 1.0)], 1, 1), SourceEqualsSink),
        ((2, [(0, 2, 1.0)], 0, 1), IdOutOfRange),
        ((2, [(0, 1, 1.0)], 0, 5), IdOutOfRange),
        ((1, [], 0, 0), IdOutOfRange),
        ((3, [(0, 0, 1.0), (0, 1, 1.0), (1, 2, 1.0)], 0, 2), IdOutOfRange),
    ],
)
def test_build_graph_rejects(args, exc):
    with pytest.raises(exc):
        build_graph(*args)


def test_graph_is_immutable(p3):
    with pytest.raises(AttributeError):
        p3.n = 4
    with pytest.raises(ValueError):
        p3.adjacency[0, 1] = 5.0


def test_operators_single_edge(edge):
    ops = operator_matrices(edge)
    np.testing.assert_array_equal(ops.D, np.eye(2))
    np.testing.assert_array_equal(ops.L, [[1, -1], [-1, 1]])
    np.testing.assert_array_equal(ops.P, [[0, 1], [1, 0]])


def test_operators_p3_volumes(p3):
    ops = operator_matrices(p3)
    np.testing.assert_array_equal(np.diag(ops.D), [1, 2, 1])
    assert (ops.vol_min, ops.vol_max) == (1.0, 2.0)


def test_operators_k4_transition(k4):
    P = operator_matrices(k4).P
    expected = (np.ones((4, 4)) - np.eye(4)) / 3
    np.testing.assert_allclose(P, expected, atol=1e-15)
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-15)


@pytest.mark.parametrize(
    "fixture, expected",
    [("edge", [1, -1]), ("p3", [1, 0, -1]), ("k4", [1, 0, 0, -1])],
)
def test_demand_vector(request, fixture, expected):
    np.testing.assert_array_equal(demand_vector(request.getfixturevalue(fixture)), expected)


def test_grounded_single_edge(edge):
    P_under, b_under, P_ground = grounded_operators(edge)
    np.testing.assert_array_equal(P_under, np.zeros((2, 2)))
    np.testing.assert_array_equal(P_ground, [[0.0]])
    np.testing.assert_array_equal(b_under, [1, 0])


def test_grounded_p3(p3):
    P_under, b_under, P_ground = grounded_operators(p3)
    np.testing.assert_array_equal(P_ground, [[0, 1], [0.5, 0]])
    np.testing.assert_array_equal(b_under, [1, 0, 0])
    assert not P_under[2].any() and not P_under[:, 2].any()


def test_grounded_interior_sink():
    g = build_graph(3, [(0, 1, 1.0), (1, 2, 3.0)], 0, 1)
    P_under, _, P_ground = grounded_operators(g)
    np.testing.assert_array_equal(P_ground, np.zeros((2, 2)))
    assert P_under.shape == (3, 3)


@settings(max_examples=60, deadline=None)
@given(graphs())
def test_operator_invariants(g):
    ops = operator_matrices(g)
    ones = np.ones(g.n)
    np.testing.assert_allclose(ops.P @ ones, ones, atol=1e-12)
    np.testing.assert_allclose(ops.L @ ones, 0, atol=1e-12)
    np.testing.assert_array_equal(ops.L, ops.L.T)
    assert np.linalg.eigvalsh(ops.L).min() > -1e-12
    dh = np.sqrt(np.diag(ops.D))
    np.testing.assert_allclose(ops.N, dh[:, None] * ops.P / dh[None, :], atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(graphs(min_n=3))
def test_grounded_spectrum_adds_one_zero(g):
    P_under, _, P_ground = grounded_operators(g)
    under = np.sort_complex(np.linalg.eigvals(P_under))
    ground = np.sort_complex(np.append(np.linalg.eigvals(P_ground), 0.0))
    np.testing.assert_allclose(under.real, ground.real, atol=1e-9)


# -- text format -----------------------------------------------------------


def test_parse_minimal():
    g = parse_graph("2\n0 1 1.0\nsource 0\nsink 1")
    assert g == build_graph(2, [(0, 1, 1.0)], 0, 1)


def test_parse_comments_and_blank_lines():
    text = "# a path\n3  # nodes\n\n0 1 1.0\n1 2 2.5 # heavy\nsink 2\nsource 0\n"
    g = parse_graph(text)
    assert g.edges == ((0, 1, 1.0), (1, 2, 2.5)) and g.sink == 2


def test_roundtrip_p3(p3):
    assert parse_graph(serialize_graph(p3)) == p3


@settings(max_examples=40, deadline=None)
@given(graphs())
def test_roundtrip_random(g):
    assert parse_graph(serialize_graph(g)) == g


def test_parse_negative_weight():
    with pytest.raises(NonPositiveWeight):
        parse_graph("2\n0 1 -1.0\nsource 0\nsink 1\n")


@pytest.mark.parametrize(
    "text, lineno",
    [
        ("2\n0 1\nsource 0\nsink 1\n", 2),
        ("2\n0 1 abc\nsource 0\nsink 1\n", 2),
        ("2 3\n", 1),
        ("2\n0 1 1.0\nsource x\nsink 1\n", 3),
        ("2\n0 1 1.0\nsource 0\nsource 1\nsink 1\n", 4),
    ],
)
def test_parse_syntax_errors_carry_line(text, lineno):
    with pytest.raises(GraphSyntaxError) as info:
        parse_graph(text)
    assert info.value.lineno == lineno
    assert f"line {lineno}" in str(info.value)


def test_parse_missing_declarations():
    with pytest.raises(GraphSyntaxError):
        parse_graph("2\n0 1 1.0\n")
    with pytest.raises(GraphSyntaxError):
        parse_graph("# nothing\n")


def test_serialize_format(p3):
    assert serialize_graph(p3) == "3\n0 1 1.0\n1 2 1.0\nsource 0\nsink 2\n"


def test_generated_suite_graphs_valid():
    g = generate("grid", 3)
    assert (g.n, g.m) == (9, 12)
