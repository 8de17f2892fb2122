"""Loop system evaluation (F, F', H) and the NR / HC iterations."""

import numpy as np
import pytest

from loopflow import (
    InvalidReferenceFlow,
    InvalidVector,
    SingularH,
    Termination,
    basis_from_steps,
    build_loop_system,
    eval_F,
    eval_H,
    eval_jacobian,
    flows,
    fundamental_basis,
    h_diagonal,
    hc_step,
    nr_step,
    solve,
    tree_reference_flow,
)

from conftest import make_network


def k4_equations(x):
    """The four-vertex example written out equation by equation."""
    x1, x2, x3 = x
    q = np.array([
        1.0 - x1,
        1.0 - x1 + x3,
        x1 - x2,
        1.0 - x2 + x3,
        x2,
        2.0 - x3,
    ])
    s = q * np.abs(q)
    f1 = -s[0] - s[1] + s[2]
    f2 = -s[2] - s[3] + s[4]
    f3 = s[1] + s[3] - s[5]
    return q, np.array([f1, f2, f3])


def test_flows_goldens(k4_system, triple_system):
    assert np.array_equal(flows(k4_system, np.zeros(3)), [1, 1, 0, 1, 0, 2])
    assert np.array_equal(flows(triple_system, np.array([1.0, 1.0])), [1, 1, 1])
    assert np.array_equal(flows(triple_system, np.zeros(2)), [0, 0, 3])


def test_eval_F_matches_written_equations(k4_system):
    rng = np.random.default_rng(2)
    for _ in range(50):
        x = rng.uniform(-3, 3, size=3)
        q_expect, f_expect = k4_equations(x)
        assert np.allclose(flows(k4_system, x), q_expect, atol=1e-14)
        assert np.allclose(eval_F(k4_system, x), f_expect, atol=1e-12)


def test_eval_F_goldens(k4_system, triple_system):
    assert np.array_equal(eval_F(k4_system, np.zeros(3)), [-2.0, -1.0, -2.0])
    assert np.array_equal(eval_F(triple_system, np.array([1.0, 1.0])), [0.0, 0.0])


def test_eval_jacobian_triple_golden(triple_system):
    J = eval_jacobian(triple_system, np.array([1.0, 1.0]))
    assert np.array_equal(J, 2.0 * np.array([[2.0, 1.0], [1.0, 2.0]]))


def test_eval_jacobian_zero_flows():
    net = make_network(3, [(1, 2), (2, 3), (1, 3)], [0.0, 0.0, 0.0])
    sys = build_loop_system(net)
    assert np.array_equal(eval_jacobian(sys, np.zeros(1)), [[0.0]])


def test_eval_jacobian_symmetric(k4_system):
    rng = np.random.default_rng(4)
    for _ in range(20):
        J = eval_jacobian(k4_system, rng.uniform(-2, 2, size=3))
        assert np.array_equal(J, J.T)


def test_eval_H_goldens(triple_system):
    assert np.array_equal(eval_H(triple_system, np.array([1.0, 1.0])), np.diag([4.0, 4.0]))


def test_eval_H_is_diagonal_of_jacobian(k4_system):
    rng = np.random.default_rng(6)
    for _ in range(100):
        x = rng.uniform(-2, 2, size=3)
        assert np.array_equal(h_diagonal(k4_system, x), np.diag(eval_jacobian(k4_system, x)))


def test_nr_step_fixed_point(triple_system):
    x_star = np.array([1.0, 1.0])
    assert np.array_equal(nr_step(triple_system, x_star), x_star)
    assert np.array_equal(hc_step(triple_system, x_star), x_star)


def test_nr_step_quadratic_contraction(triple_system):
    x1 = nr_step(triple_system, np.array([1.01, 1.01]))
    assert np.max(np.abs(x1 - 1.0)) <= 1e-3


def test_hc_step_halves_and_reflects_error(triple_system):
    for eps in (0.01, 0.001):
        up = hc_step(triple_system, np.array([1 + eps, 1 + eps]))
        assert np.max(np.abs(up - (1 - eps / 2))) <= 1e-12
        down = hc_step(triple_system, np.array([1 - eps, 1 - eps]))
        assert np.max(np.abs(down - (1 + eps / 2))) <= 1e-12


def test_single_cycle_steps_coincide():
    net = make_network(3, [(1, 2), (2, 3), (1, 3)], [3.0, 0.0, -3.0])
    sys = build_loop_system(net)
    rng = np.random.default_rng(8)
    for _ in range(25):
        x = rng.uniform(-2, 4, size=1)
        if np.all(np.abs(flows(sys, x)) < 1e-6):
            continue
        a = nr_step(sys, x)
        b = hc_step(sys, x)
        assert np.max(np.abs(a - b)) <= 1e-15
        # identical to scalar Newton on the single loop equation
        f = eval_F(sys, x)[0]
        fp = h_diagonal(sys, x)[0]
        assert a[0] == pytest.approx(x[0] - f / fp, abs=1e-15)


def test_hc_singular_when_cycle_flows_vanish():
    net = make_network(3, [(1, 2), (2, 3), (1, 3)], [0.0, 0.0, 0.0])
    sys = build_loop_system(net)
    with pytest.raises(SingularH):
        hc_step(sys, np.zeros(1))


def test_sweep_mode_differs_and_converges(triple_system):
    x0 = np.array([1.01, 1.01])
    sim = hc_step(triple_system, x0, mode="simultaneous")
    swp = hc_step(triple_system, x0, mode="sweep")
    assert not np.allclose(sim, swp)
    trace = solve(triple_system, x0, method="hc", hc_mode="sweep")
    assert trace.termination is Termination.RESIDUAL_TOL
    assert np.allclose(trace.final, [1.0, 1.0], atol=1e-6)


def test_solve_nr_k4(k4_system, k4_x0):
    trace = solve(k4_system, k4_x0, method="nr")
    assert trace.termination is Termination.RESIDUAL_TOL
    assert trace.iterations <= 8
    assert trace.residual_norms[-1] <= 1e-10


def test_solve_hc_error_ratio_half(triple_system):
    trace = solve(triple_system, np.array([1.01, 1.01]), method="hc")
    assert trace.termination is Termination.RESIDUAL_TOL
    errors = np.max(np.abs(np.array(trace.iterates) - 1.0), axis=1)
    ratios = errors[1:15] / errors[:14]
    assert np.allclose(ratios, 0.5, atol=1e-6)


def test_solve_trivial_zero_system():
    net = make_network(3, [(1, 2), (2, 3), (1, 3)], [0.0, 0.0, 0.0])
    sys = build_loop_system(net, psi=np.zeros(3))
    trace = solve(sys, np.zeros(1))
    assert trace.termination is Termination.RESIDUAL_TOL
    assert trace.iterations == 0
    assert trace.residual_norms == [0.0]


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_solve_diverged_on_overflowing_start(triple_system):
    trace = solve(triple_system, np.array([1e200, 1e200]), method="hc")
    assert trace.termination is Termination.DIVERGED


def test_solve_max_iters(triple_system):
    trace = solve(triple_system, np.array([1.01, 1.01]), method="hc", max_iters=3)
    assert trace.termination is Termination.MAX_ITERS
    assert trace.iterations == 3


def test_solve_step_tol(k4_system, k4_x0):
    trace = solve(k4_system, k4_x0, method="nr", tol_residual=1e-30)
    assert trace.termination is Termination.STEP_TOL


def test_solve_records_singular_h_termination():
    # circulation on one triangle; the second triangle carries no flow at
    # all, so its H entry is zero while the residual is not
    net = make_network(
        6,
        [(1, 2), (2, 3), (1, 3), (3, 4), (4, 5), (5, 6), (4, 6)],
        [0.0] * 6,
    )
    basis = [
        ((1, 1), (2, 1), (3, -1)),
        ((5, 1), (6, 1), (7, -1)),
    ]
    sys = build_loop_system(
        net,
        basis=basis_from_steps(net, basis),
        psi=np.array([1.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0]),
    )
    hc = solve(sys, np.zeros(2), method="hc")
    assert hc.termination is Termination.SINGULAR_H
    nr = solve(sys, np.zeros(2), method="nr")
    assert nr.termination is Termination.SINGULAR_JACOBIAN
    assert nr.residual_norms[0] == 3.0


def test_solve_rejects_bad_inputs(k4_system):
    with pytest.raises(InvalidVector):
        solve(k4_system, np.zeros(2))
    with pytest.raises(ValueError):
        solve(k4_system, np.zeros(3), method="bogus")
    with pytest.raises(ValueError):
        hc_step(k4_system, np.zeros(3), mode="bogus")


def test_build_loop_system_validates_psi(k4_doc):
    with pytest.raises(InvalidReferenceFlow):
        build_loop_system(k4_doc.network, psi=np.ones(6))


def test_record_flows(k4_system, k4_x0):
    trace = solve(k4_system, k4_x0, record_flows=True)
    assert trace.flows is not None
    assert len(trace.flows) == len(trace.iterates)
    for x, q in zip(trace.iterates, trace.flows):
        assert np.array_equal(q, flows(k4_system, x))


def test_default_system_uses_tree_flow_and_fundamental_basis(k4_doc):
    net = k4_doc.network
    sys = build_loop_system(net)
    basis = fundamental_basis(net)
    assert sys.k == basis.k
    assert np.array_equal(sys.psi, tree_reference_flow(net).psi)
