import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ohm import demand_vector, generate, operator_matrices
from ohm.exceptions import ParameterOutOfRange
from ohm.jacobi import (
    JacobiState,
    error_decomposition,
    initial_state,
    jacobi_rate_bound,
    jacobi_step,
    run_jacobi,
    trajectory_csv,
)
from ohm.oracle import solve_grounded

from conftest import graphs


def perp_norm(p_ref, p):
    return np.linalg.norm(error_decomposition(p_ref, p).e_perp)


def test_step_single_edge(edge):
    s = jacobi_step(edge, initial_state(edge))
    np.testing.assert_array_equal(s.p_tilde, [1, -1])
    assert (s.t, s.messages_sent) == (1, 2)


def test_single_edge_oscillates(edge):
    s = jacobi_step(edge, JacobiState(p_tilde=np.array([1.0, -1.0])))
    np.testing.assert_array_equal(s.p_tilde, [0, 0])


def test_damped_single_edge_fixed_point(edge):
    traj = run_jacobi(edge, 200, beta=0.5)
    p = traj[-1].p_tilde
    np.testing.assert_allclose(p, [0.5, -0.5], atol=1e-12)
    L = operator_matrices(edge).L
    np.testing.assert_allclose(L @ p, demand_vector(edge), atol=1e-12)


def test_p3_converges(p3):
    traj = run_jacobi(p3, 200, beta=1.0)
    assert perp_norm(solve_grounded(p3), traj[-1].p_tilde) <= 1e-6


def test_zero_rounds(k4):
    traj = run_jacobi(k4, 0)
    assert len(traj) == 1 and traj[0].t == 0
    np.testing.assert_array_equal(traj[0].p_tilde, np.zeros(4))


def test_k4_rate_is_one_third(k4):
    p = solve_grounded(k4)
    traj = run_jacobi(k4, 50, stop_tol=0.0)
    e0 = perp_norm(p, traj[0].p_tilde)
    for t in (1, 10, 50):
        ratio = perp_norm(p, traj[t].p_tilde) / e0
        # below (1/3)^t only up to float64 roundoff once t is large
        assert ratio <= (1 / 3) ** t + 1e-9
    assert perp_norm(p, traj[10].p_tilde) / e0 == pytest.approx(3.0**-10, rel=1e-9)


def test_error_decomposition_examples(p3):
    d = error_decomposition([1, 0], [0, 0])
    np.testing.assert_allclose(d.e_perp, [0.5, -0.5])
    assert d.alpha == 0.5

    p = solve_grounded(p3)
    d = error_decomposition(p, p + 7)
    np.testing.assert_allclose(d.e_perp, 0, atol=1e-14)
    assert d.alpha == pytest.approx(-7)

    d = error_decomposition(p, np.zeros(3))
    np.testing.assert_allclose(d.e_perp, [1, 0, -1], atol=1e-14)
    assert d.alpha == pytest.approx(1)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=10),
       st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=10))
def test_error_decomposition_property(a, b):
    k = min(len(a), len(b))
    d = error_decomposition(a[:k], b[:k])
    np.testing.assert_allclose(d.e_perp + d.alpha, d.e, atol=1e-9)
    assert abs(d.e_perp.sum()) <= 1e-9 * max(1.0, np.abs(d.e).sum())


def test_rate_bound_examples(k4, edge, p3):
    assert jacobi_rate_bound(k4, 10) == pytest.approx(3.0**-10, rel=1e-9)
    for t in (0, 1, 17):
        assert jacobi_rate_bound(edge, t) == pytest.approx(1.0)
    assert jacobi_rate_bound(p3, 0) == pytest.approx(math.sqrt(2))


@settings(max_examples=40, deadline=None)
@given(graphs())
def test_rate_bound_holds(g):
    p = solve_grounded(g)
    traj = run_jacobi(g, 200, stop_tol=0.0)
    e0 = perp_norm(p, traj[0].p_tilde)
    for s in traj:
        assert perp_norm(p, s.p_tilde) / e0 <= jacobi_rate_bound(g, s.t) + 1e-9


@settings(max_examples=40, deadline=None)
@given(graphs(), st.floats(-50, 50))
def test_kernel_shift_equivariance(g, c):
    a = run_jacobi(g, 60, stop_tol=0.0)
    b = run_jacobi(g, 60, p0=np.full(g.n, c), stop_tol=0.0)
    for x, y in zip(a, b):
        np.testing.assert_allclose(y.p_tilde, x.p_tilde + c, atol=1e-12 * max(1, abs(c)))


@settings(max_examples=30, deadline=None)
@given(graphs(), st.integers(0, 40))
def test_message_accounting(g, rounds):
    traj = run_jacobi(g, rounds, stop_tol=0.0)
    assert [s.messages_sent for s in traj] == [2 * g.m * t for t in range(rounds + 1)]


@settings(max_examples=30, deadline=None)
@given(graphs())
def test_fixed_point_when_stopped(g):
    stop_tol = 1e-12
    traj = run_jacobi(g, 20000, beta=0.5, stop_tol=stop_tol)
    if traj[-1].t < 20000:
        L = operator_matrices(g).L
        res = np.abs(L @ traj[-1].p_tilde - demand_vector(g)).max()
        assert res <= 10 * stop_tol * operator_matrices(g).vol_max


def test_invalid_parameters(p3):
    with pytest.raises(ParameterOutOfRange):
        run_jacobi(p3, -1)
    with pytest.raises(ParameterOutOfRange):
        run_jacobi(p3, 5, beta=0.0)
    with pytest.raises(ParameterOutOfRange):
        run_jacobi(p3, 5, p0=[0.0, 0.0])


def test_trajectory_csv(k4):
    traj = run_jacobi(k4, 5, stop_tol=0.0)
    rows = list(csv.reader(io.StringIO(trajectory_csv(k4, traj))))
    assert rows[0] == ["t", "err_perp_norm", "bound", "residual_inf", "messages"]
    assert len(rows) == 7
    assert [int(r[4]) for r in rows[1:]] == [12 * t for t in range(6)]
    assert float(rows[6][2]) == pytest.approx(3.0**-5)


def test_lazy_jacobi_converges_on_bipartite_grid():
    g = generate("grid", 3)
    p = solve_grounded(g)
    # from zero the -1 eigencomponent happens to vanish by symmetry
    p0 = np.random.default_rng(3).normal(size=g.n)
    plain = run_jacobi(g, 400, beta=1.0, p0=p0, stop_tol=0.0)
    lazy = run_jacobi(g, 400, beta=0.5, p0=p0, stop_tol=0.0)
    assert perp_norm(p, lazy[-1].p_tilde) < 1e-6
    assert perp_norm(p, plain[-1].p_tilde) > 1e-3
