"""A-priori convergence certificates for the two loop solvers.

Every constant is a closed-form bound in the basis combinatorics (k, total
length ell, vertex count n) scaled by mu_max. The Newton certificate is the
Kantorovich condition h = beta*eta*L < 1/2; the Hardy Cross certificate is
the Rheinboldt-style condition on the diagonal approximation, which needs
the extra constants K (Lipschitz bound for H) and delta0, delta1 (bound on
||F' - H||). Face bases (every edge on at most two cycles) admit sharper
constants; `basis_mode` selects which family is used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cycles import validate_face_basis
from .errors import NotFaceBasis, Singular
from .linalg import inf_norm, inf_norm_inverse, lu_solve
from .solver import LoopSystem, eval_F, eval_jacobian, h_diagonal

__all__ = [
    "NrCertificate",
    "HcCertificate",
    "HcConstants",
    "lipschitz_L",
    "hc_constants",
    "kantorovich_certificate",
    "rheinboldt_certificate",
]


@dataclass(frozen=True)
class NrCertificate:
    """Kantorovich certificate for Newton; satisfied iff h < 1/2."""

    beta: float | None
    eta: float | None
    L: float
    h: float | None
    r: float | None
    satisfied: bool
    basis_mode: str
    failure: str = ""

    def as_dict(self) -> dict:
        return {
            "method": "nr",
            "basis_mode": self.basis_mode,
            "beta": self.beta,
            "eta": self.eta,
            "L": self.L,
            "h": self.h,
            "r": self.r,
            "satisfied": self.satisfied,
            "failure": self.failure or None,
        }


@dataclass(frozen=True)
class HcCertificate:
    """Rheinboldt certificate for Hardy Cross.

    Satisfied iff beta*delta0 < 1 and h <= 1/2 with
    h = beta*eta*L*max(1,(K+delta1)/L)/(1-beta*delta0)^2.
    """

    beta: float | None
    eta: float | None
    L: float
    K: float
    delta0: float
    delta1: float
    h: float | None
    r: float | None
    satisfied: bool
    basis_mode: str
    short_cycle_fallback: bool
    failure: str = ""

    def as_dict(self) -> dict:
        return {
            "method": "hc",
            "basis_mode": self.basis_mode,
            "beta": self.beta,
            "eta": self.eta,
            "L": self.L,
            "K": self.K,
            "delta0": self.delta0,
            "delta1": self.delta1,
            "h": self.h,
            "r": self.r,
            "satisfied": self.satisfied,
            "short_cycle_fallback": self.short_cycle_fallback,
            "failure": self.failure or None,
        }


@dataclass(frozen=True)
class HcConstants:
    K: float
    delta0: float
    delta1: float
    short_cycle_fallback: bool


def _require_mode(sys: LoopSystem, basis_mode: str):
    if basis_mode not in ("general", "face"):
        raise ValueError(f"unknown basis mode {basis_mode!r}")
    if basis_mode == "face" and not validate_face_basis(sys.ecm):
        raise NotFaceBasis("an edge lies on more than two cycles; face constants do not apply")


def lipschitz_L(sys: LoopSystem, basis_mode: str = "general") -> float:
    """Global Lipschitz bound for F': 2k(ell-k+1) generally, 8n for face bases."""
    _require_mode(sys, basis_mode)
    if basis_mode == "face":
        return 8.0 * sys.n * sys.mu_max
    return 2.0 * sys.k * (sys.ell - sys.k + 1) * sys.mu_max


def hc_constants(sys: LoopSystem, x0: np.ndarray, basis_mode: str = "general") -> HcConstants:
    """Constants K, delta0, delta1 bounding H's variation and ||F' - H||.

    The delta bounds assume every basis cycle has at least 3 edges; when a
    shorter cycle exists the always-valid factor ell-k+1 replaces ell-k-2
    and the fallback is flagged.
    """
    _require_mode(sys, basis_mode)
    x0 = np.asarray(x0, dtype=float)
    lengths = np.count_nonzero(sys.A, axis=0)
    fallback = bool(np.any(lengths < 3))
    slack = (sys.ell - sys.k + 1) if fallback else (sys.ell - sys.k - 2)
    x0_norm = inf_norm(x0)
    mu_max = sys.mu_max
    if basis_mode == "face":
        K = 4.0 * sys.n * mu_max
        delta0 = 2.0 * slack * (sys.psi_max + 2.0 * x0_norm) * mu_max
        delta1 = 4.0 * slack * mu_max
    else:
        K = 2.0 * (sys.ell - sys.k + 1) * mu_max
        delta0 = 2.0 * slack * (sys.psi_max + sys.k * x0_norm) * mu_max
        delta1 = 2.0 * sys.k * slack * mu_max
    return HcConstants(K=K, delta0=delta0, delta1=delta1, short_cycle_fallback=fallback)


def kantorovich_certificate(
    sys: LoopSystem, x0: np.ndarray, basis_mode: str = "general"
) -> NrCertificate:
    """Newton certificate at x0: beta = ||F'(x0)^-1||, eta = ||F'(x0)^-1 F(x0)||.

    A singular Jacobian yields an unsatisfied certificate carrying the
    failure reason rather than an exception.
    """
    L = lipschitz_L(sys, basis_mode)
    x0 = np.asarray(x0, dtype=float)
    J = eval_jacobian(sys, x0)
    try:
        beta = inf_norm_inverse(J)
        eta = inf_norm(lu_solve(J, eval_F(sys, x0)))
    except Singular as exc:
        return NrCertificate(
            beta=None, eta=None, L=L, h=None, r=None,
            satisfied=False, basis_mode=basis_mode, failure=f"singular Jacobian at x0: {exc}",
        )
    h = beta * eta * L
    satisfied = h < 0.5
    r = (1.0 - np.sqrt(1.0 - 2.0 * h)) / (beta * L) if satisfied else None
    return NrCertificate(
        beta=beta, eta=eta, L=L, h=h, r=r, satisfied=satisfied, basis_mode=basis_mode,
    )


def rheinboldt_certificate(
    sys: LoopSystem, x0: np.ndarray, basis_mode: str = "general"
) -> HcCertificate:
    """Hardy Cross certificate at x0 using the diagonal H in place of F'.

    beta = ||H(x0)^-1|| = 1/min_c H_cc, eta = ||H(x0)^-1 F(x0)||. The radius
    r uses the limit value eta/(1 - beta*delta0) when h = 0.
    """
    L = lipschitz_L(sys, basis_mode)
    consts = hc_constants(sys, x0, basis_mode)
    x0 = np.asarray(x0, dtype=float)
    h_diag = h_diagonal(sys, x0)
    hmax = float(np.max(h_diag)) if sys.k else 0.0
    if hmax == 0.0 or float(np.min(h_diag)) <= 1e-12 * hmax:
        return HcCertificate(
            beta=None, eta=None, L=L, K=consts.K, delta0=consts.delta0, delta1=consts.delta1,
            h=None, r=None, satisfied=False, basis_mode=basis_mode,
            short_cycle_fallback=consts.short_cycle_fallback,
            failure="H(x0) has a zero diagonal entry (a cycle with all flows zero)",
        )
    beta = 1.0 / float(np.min(h_diag))
    eta = float(np.max(np.abs(eval_F(sys, x0) / h_diag)))
    beta_delta0 = beta * consts.delta0
    if beta_delta0 == 1.0:
        h = None
        satisfied = False
    else:
        h = beta * eta * L * max(1.0, (consts.K + consts.delta1) / L) / (1.0 - beta_delta0) ** 2
        satisfied = beta_delta0 < 1.0 and h <= 0.5
    if satisfied:
        r = eta / (1.0 - beta_delta0) if h == 0.0 else eta * (1.0 - np.sqrt(1.0 - 2.0 * h)) / (h * (1.0 - beta_delta0))
    else:
        r = None
    return HcCertificate(
        beta=beta, eta=eta, L=L, K=consts.K, delta0=consts.delta0, delta1=consts.delta1,
        h=h, r=r, satisfied=satisfied, basis_mode=basis_mode,
        short_cycle_fallback=consts.short_cycle_fallback,
    )
