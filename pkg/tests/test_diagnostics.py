"""Convergence-order estimation from error sequences."""

import numpy as np
import pytest

from loopflow import (
    InsufficientData,
    basis_from_steps,
    OrderEstimate,
    Termination,
    build_loop_system,
    error_sequence,
    estimate_order,
    solve,
    tight_solution,
)

from conftest import make_network


def test_error_sequence_hc_halving(triple_system):
    trace = solve(triple_system, np.array([1.01, 1.01]), method="hc")
    errors = error_sequence(trace, np.array([1.0, 1.0]))
    assert errors[0] == pytest.approx(0.01)
    for e_prev, e_next in zip(errors[:6], errors[1:7]):
        assert e_next / e_prev == pytest.approx(0.5, abs=1e-6)
    assert np.all(errors >= 1e-14)


def test_error_sequence_empty_at_solution(triple_system):
    trace = solve(triple_system, np.array([1.0, 1.0]))
    errors = error_sequence(trace, np.array([1.0, 1.0]))
    assert errors.size == 0


def test_estimate_order_linear_golden():
    est = estimate_order([1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4])
    assert est.omega == pytest.approx(1.0, abs=1e-9)
    assert est.rate == pytest.approx(0.5, rel=1e-12)
    assert est.classification == "linear"
    assert est.samples_used == 4


def test_estimate_order_quadratic_golden():
    est = estimate_order([1e-1, 1e-2, 1e-4, 1e-8])
    assert est.omega == pytest.approx(2.0, abs=1e-9)
    assert est.classification == "quadratic"
    assert est.samples_used == 3


def test_estimate_order_stagnation_is_inconclusive():
    est = estimate_order([1e-3, 1e-3, 1e-3, 1e-3])
    assert est.omega == 0.0
    assert est.classification == "inconclusive"


def test_slow_geometric_decay_is_inconclusive():
    errors = [0.96 ** t for t in range(8)]
    est = estimate_order(errors)
    assert est.omega == pytest.approx(1.0, abs=1e-9)
    assert est.rate == pytest.approx(0.96, rel=1e-12)
    assert est.classification == "inconclusive"


def test_estimate_order_drops_trailing_floor():
    est = estimate_order([1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4, 1e-16])
    assert est.classification == "linear"
    assert est.samples_used == 4


def test_estimate_order_window_is_capped():
    errors = [0.5 ** t for t in range(12)]
    est = estimate_order(errors)
    assert est.samples_used == 6
    assert est.classification == "linear"


def test_insufficient_data_paths():
    with pytest.raises(InsufficientData):
        estimate_order([])
    with pytest.raises(InsufficientData):
        estimate_order([1e-2, 5e-3, 2.5e-3])
    with pytest.raises(InsufficientData):
        estimate_order([1e-2, -5e-3, 2.5e-3, 1.25e-3, 6e-4])
    with pytest.raises(InsufficientData):
        estimate_order([1e-2, float("nan"), 2.5e-3, 1.25e-3, 6e-4])


@pytest.mark.parametrize("omega", [1.0, 1.5, 2.0])
@pytest.mark.parametrize("c", [0.1, 0.5])
def test_synthetic_order_recovery(omega, c):
    errors = [0.5]
    while errors[-1] >= 1e-14 and len(errors) < 25:
        errors.append(c * errors[-1] ** omega)
    est = estimate_order(errors)
    assert est.omega == pytest.approx(omega, abs=0.1)


def test_tight_solution_k4(k4_system, k4_x0):
    x_star = tight_solution(k4_system, k4_x0)
    assert np.allclose(
        x_star, [1.38449916, 1.00160343, 0.92713047], atol=1e-7
    )


def test_tight_solution_failure():
    # stuck circulation: second loop carries no flow, Jacobian is singular
    net = make_network(
        6,
        [(1, 2), (2, 3), (1, 3), (3, 4), (4, 5), (5, 6), (4, 6)],
        [0.0] * 6,
    )
    steps = [((1, 1), (2, 1), (3, -1)), ((5, 1), (6, 1), (7, -1))]
    sys = build_loop_system(
        net,
        basis=basis_from_steps(net, steps),
        psi=np.array([1.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0]),
    )
    with pytest.raises(InsufficientData):
        tight_solution(sys, np.zeros(2))


def test_order_estimate_as_dict():
    est = OrderEstimate(omega=1.0, rate=0.5, classification="linear", samples_used=4)
    assert est.as_dict() == {
        "omega": 1.0,
        "rate": 0.5,
        "classification": "linear",
        "samples_used": 4,
    }


def test_end_to_end_hc_order(triple_system):
    x_star = tight_solution(triple_system, np.array([1.01, 1.01]))
    trace = solve(triple_system, np.array([1.01, 1.01]), method="hc")
    assert trace.termination is Termination.RESIDUAL_TOL
    est = estimate_order(error_sequence(trace, x_star))
    assert est.classification == "linear"
    assert est.rate == pytest.approx(0.5, abs=1e-3)
