"""A-priori convergence certificates: constants, verdicts, honesty."""

import numpy as np
import pytest

from loopflow import (
    NotFaceBasis,
    basis_from_steps,
    Termination,
    build_loop_system,
    eval_jacobian,
    hc_constants,
    h_diagonal,
    inf_norm,
    kantorovich_certificate,
    lipschitz_L,
    rheinboldt_certificate,
    solve,
)

from conftest import make_network


@pytest.fixture(scope="module")
def triangle_system():
    net = make_network(3, [(1, 2), (2, 3), (1, 3)], [3.0, 0.0, -3.0])
    return build_loop_system(net)


def test_lipschitz_goldens(k4_system, triangle_system):
    assert lipschitz_L(k4_system, "face") == 32.0
    assert lipschitz_L(k4_system, "general") == 42.0
    assert lipschitz_L(triangle_system, "general") == 6.0


def test_lipschitz_face_requires_face_basis(k4_doc):
    from test_cycles import NONFACE_K4_STEPS

    basis = basis_from_steps(k4_doc.network, NONFACE_K4_STEPS)
    sys = build_loop_system(k4_doc.network, basis=basis)
    with pytest.raises(NotFaceBasis):
        lipschitz_L(sys, "face")
    with pytest.raises(NotFaceBasis):
        kantorovich_certificate(sys, np.zeros(3), "face")


def test_hc_constants_goldens(k4_system, k4_x0, triple_system):
    face0 = hc_constants(k4_system, np.zeros(3), "face")
    assert face0.K == 16.0
    assert face0.delta0 == 16.0
    assert face0.short_cycle_fallback is False

    gen0 = hc_constants(k4_system, np.zeros(3), "general")
    assert gen0.K == 14.0
    assert gen0.delta1 == 24.0
    assert gen0.delta0 == 16.0

    face = hc_constants(k4_system, k4_x0, "face")
    assert face.delta0 == pytest.approx(2 * 4 * (2.0 + 2 * 1.38))
    assert face.delta1 == 16.0

    gen = hc_constants(k4_system, k4_x0, "general")
    assert gen.delta0 == pytest.approx(2 * 4 * (2.0 + 3 * 1.38))

    short = hc_constants(triple_system, np.zeros(2), "general")
    assert short.short_cycle_fallback is True
    # conservative slack: ell - k + 1 = 3 instead of ell - k - 2
    assert short.delta1 == 2 * 2 * 3


def test_kantorovich_golden(k4_system, k4_x0):
    cert = kantorovich_certificate(k4_system, k4_x0, "face")
    assert cert.satisfied is True
    assert cert.L == 32.0
    assert cert.beta == pytest.approx(0.7927374716764556, rel=1e-12)
    assert cert.eta == pytest.approx(0.004493312045455812, rel=1e-10)
    assert cert.h == pytest.approx(0.11398453857177611, rel=1e-10)
    assert cert.h < 0.12
    assert cert.r == pytest.approx(0.0047835468060856935, rel=1e-10)

    general = kantorovich_certificate(k4_system, k4_x0, "general")
    assert general.L == 42.0
    assert general.satisfied is True
    assert general.h == pytest.approx(cert.h * 42.0 / 32.0, rel=1e-12)


def test_kantorovich_at_solution(triple_system):
    cert = kantorovich_certificate(triple_system, np.array([1.0, 1.0]))
    assert cert.eta == 0.0
    assert cert.h == 0.0
    assert cert.satisfied is True
    assert cert.r == 0.0


def test_kantorovich_far_start_unsatisfied(triple_system):
    cert = kantorovich_certificate(triple_system, np.array([100.0, 100.0]))
    assert cert.satisfied is False
    assert cert.r is None


def test_kantorovich_singular_start_reports_failure():
    net = make_network(3, [(1, 2), (2, 3), (1, 3)], [0.0, 0.0, 0.0])
    sys = build_loop_system(net, psi=np.zeros(3))
    cert = kantorovich_certificate(sys, np.zeros(1))
    assert cert.satisfied is False
    assert cert.beta is None
    assert "singular" in cert.failure.lower()


def test_rheinboldt_golden_triple(triple_system):
    cert = rheinboldt_certificate(triple_system, np.array([1.01, 1.01]))
    assert cert.beta == pytest.approx(1.0 / 3.98, rel=1e-12)
    assert cert.eta == pytest.approx(0.015, rel=1e-10)
    assert cert.L == 12.0
    assert cert.K == 6.0
    assert cert.delta0 == pytest.approx(30.12)
    assert cert.delta1 == 12.0
    assert cert.short_cycle_fallback is True
    assert cert.h == pytest.approx(0.0015726630017052574, rel=1e-10)
    # beta*delta0 = 7.57 > 1: linear convergence is not certified here
    assert cert.satisfied is False
    assert cert.r is None


def test_rheinboldt_at_solution(triple_system):
    cert = rheinboldt_certificate(triple_system, np.array([1.0, 1.0]))
    assert cert.eta == 0.0
    assert cert.h == 0.0
    assert cert.beta == 0.25
    assert cert.satisfied is False  # beta*delta0 = 7.5 >= 1


def test_rheinboldt_satisfied_on_triangle(triangle_system):
    x_star = 3.0 * (np.sqrt(2.0) - 1.0)
    x0 = np.array([x_star + 0.01])
    cert = rheinboldt_certificate(triangle_system, x0)
    assert cert.short_cycle_fallback is False
    assert cert.delta0 == 0.0 and cert.delta1 == 0.0
    assert cert.satisfied is True
    assert cert.h <= 0.5
    assert cert.r is not None
    # honesty: HC from x0 converges with every iterate inside the ball
    trace = solve(triangle_system, x0, method="hc")
    assert trace.termination is Termination.RESIDUAL_TOL
    for x in trace.iterates:
        assert inf_norm(x - x0) <= cert.r + 1e-15


def test_rheinboldt_r_limit_at_zero_h():
    # mu = [1, 1, 2] puts the solution at exactly x = 1.5, so F(x0) == 0.0
    net = make_network(3, [(1, 2), (2, 3), (1, 3)], [3.0, 0.0, -3.0], mu=[1.0, 1.0, 2.0])
    sys = build_loop_system(net)
    cert = rheinboldt_certificate(sys, np.array([1.5]))
    assert cert.eta == 0.0
    assert cert.h == 0.0
    assert cert.satisfied is True
    assert cert.r == cert.eta / (1.0 - cert.beta * cert.delta0) == 0.0


def test_rheinboldt_zero_h_entry_reports_failure():
    net = make_network(3, [(1, 2), (2, 3), (1, 3)], [0.0, 0.0, 0.0])
    sys = build_loop_system(net, psi=np.zeros(3))
    cert = rheinboldt_certificate(sys, np.zeros(1))
    assert cert.satisfied is False
    assert cert.beta is None
    assert cert.failure


def test_certificate_consistency_identity(triangle_system):
    x0 = np.array([3.0 * (np.sqrt(2.0) - 1.0) + 0.01])
    cert = rheinboldt_certificate(triangle_system, x0)
    base = cert.beta * cert.eta * cert.L
    bd = cert.beta * cert.delta0
    lower = base * min(1.0, (cert.K + cert.delta1) / cert.L) / (1.0 - bd) ** 2
    assert cert.h >= lower - 1e-15


def test_kantorovich_honesty_k4(k4_system, k4_x0):
    cert = kantorovich_certificate(k4_system, k4_x0, "face")
    assert cert.satisfied
    trace = solve(k4_system, k4_x0, method="nr")
    assert trace.termination is Termination.RESIDUAL_TOL
    for x in trace.iterates:
        assert inf_norm(x - k4_x0) <= cert.r


def test_sampled_bound_soundness_k4(k4_system):
    rng = np.random.default_rng(12)
    x0 = np.zeros(3)
    for mode in ("general", "face"):
        L = lipschitz_L(k4_system, mode)
        consts = hc_constants(k4_system, x0, mode)
        assert consts.short_cycle_fallback is False
        for _ in range(200):
            x = x0 + rng.uniform(-1, 1, size=3)
            y = x0 + rng.uniform(-1, 1, size=3)
            Jx = eval_jacobian(k4_system, x)
            Jy = eval_jacobian(k4_system, y)
            assert inf_norm(Jx - Jy) <= L * inf_norm(x - y) + 1e-12
            Hx = np.diag(h_diagonal(k4_system, x))
            H0 = np.diag(h_diagonal(k4_system, x0))
            assert inf_norm(Hx - H0) <= consts.K * inf_norm(x - x0) + 1e-12
            assert inf_norm(Jx - Hx) <= consts.delta0 + consts.delta1 * inf_norm(x - x0) + 1e-12
