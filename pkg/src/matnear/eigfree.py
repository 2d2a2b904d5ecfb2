"""Eigenvalue-free solvers: Rayleigh-quotient and matrix-vector flows.

Two nearness problems are solved without eigen- or singular-value
decompositions inside the iteration loop.  The dissipativity radius
maximizes the real part of Rayleigh quotients of structured perturbations
of the matrix; the structured distance to singularity minimizes squared
norms of matrix-vector products.  Both inner flows touch the matrix only
through products with vectors, which is asserted with operation counters.
A dense decomposition is permitted once at startup for the initial
vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotDissipativeError, RhoBlowupError
from .rank1 import FlowConfig
from .structures import (
    StructureSpace,
    sylvester_build,
    sylvester_coefficients,
    sylvester_real,
)
from .twolevel import OuterConfig, OuterRow, SolveReport, newton_bisection, InnerEval

__all__ = [
    "OpCounter",
    "numerical_abscissa",
    "dissipativity_radius",
    "singularity_distance_mvp",
    "coprimality_radius",
    "CoprimalityResult",
]


@dataclass
class OpCounter:
    """Counts the vector-level operations performed by the inner loops."""

    matvec: int = 0
    dot: int = 0
    projections: int = 0

    def reset(self):
        self.matvec = self.dot = self.projections = 0


def numerical_abscissa(A: np.ndarray) -> float:
    """Largest eigenvalue of the Hermitian part: the smallest ``w`` with
    ``||exp(tA)|| <= exp(t w)`` for all nonnegative ``t``."""
    A = np.asarray(A)
    H = 0.5 * (A + A.conj().T)
    return float(np.linalg.eigvalsh(H)[-1])


# ---------------------------------------------------------------------------
# dissipativity radius


def _herm_apply(A, E, eps, v, counter):
    """Product of the Hermitian part of ``A + eps E`` with ``v``."""
    w = A @ v + eps * (E @ v)
    wh = A.conj().T @ v + eps * (E.conj().T @ v)
    counter.matvec += 4
    return 0.5 * (w + wh)


def _rayleigh_loop(A, space, eps, v, cfg, counter, scale):
    """Drive ``v`` to a maximizer of ``Re v* (A + eps E(v)) v`` with
    ``E(v) = Pi_S(v v*)/||Pi_S(v v*)||``; matrix-vector products only."""
    real_case = space.real and np.isrealobj(A)
    if real_case:
        v = np.real(v).astype(float)
        v = v / np.linalg.norm(v)

    def assemble(v):
        P = space.project(np.outer(v, v.conj()))
        counter.projections += 1
        nrm = np.linalg.norm(P)
        if nrm < 1e-14:
            raise RhoBlowupError("projection annihilates v v*")
        return P / nrm

    E = assemble(v)
    Hv = _herm_apply(A, E, eps, v, counter)
    f_cur = -float(np.real(v.conj() @ Hv))
    counter.dot += 1
    h = cfg.h0
    status = "max-steps"
    nops = 0
    for _ in range(cfg.max_steps):
        rayq = float(np.real(v.conj() @ Hv))
        resid = Hv - rayq * v
        counter.dot += 2
        g_k = 2.0 * float(np.real(resid.conj() @ resid)) / scale
        if np.linalg.norm(resid) <= cfg.tol_stationary * max(1.0, abs(rayq)):
            status = "converged"
            break
        collapsed = False
        rejected = False
        h_k = h
        while True:
            v_new = v + (h / scale) * resid
            v_new = v_new / np.linalg.norm(v_new)
            if real_case:
                v_new = np.real(v_new)
                v_new /= np.linalg.norm(v_new)
            E_new = assemble(v_new)
            Hv_new = _herm_apply(A, E_new, eps, v_new, counter)
            f_new = -float(np.real(v_new.conj() @ Hv_new))
            counter.dot += 1
            nops += 1
            if f_new < f_cur:
                break
            rejected = True
            h /= cfg.theta
            if h < cfg.h_min:
                collapsed = True
                break
        if collapsed:
            status = "step-collapse"
            break
        if f_new >= f_cur - (h / cfg.theta) * g_k:
            h_next = h / cfg.theta
        elif not rejected and h == h_k:
            h_next = cfg.theta * h
        else:
            h_next = h
        h = min(max(h_next, cfg.h_min), cfg.h_max)
        converged = abs(f_new - f_cur) <= cfg.tol_stationary * max(1.0, abs(f_cur))
        v, E, Hv, f_cur = v_new, E_new, Hv_new, f_new
        if converged and np.linalg.norm(Hv - float(np.real(v.conj() @ Hv)) * v) <= 1e-8:
            status = "converged"
            break
    return v, E, f_cur, status, nops


def dissipativity_radius(
    A: np.ndarray,
    space: StructureSpace,
    cfg: OuterConfig | None = None,
    counter: OpCounter | None = None,
) -> SolveReport:
    """Smallest structured perturbation making the numerical range touch
    the imaginary axis.

    The inner iteration maximizes Rayleigh quotients through the reduced
    flow ``vdot = Herm(A + eps E)v - <Herm(A + eps E)v, v> v`` with
    ``E = Pi_S(v v*)/||Pi_S(v v*)||`` and uses only matrix-vector and
    inner products; the outer Newton-bisection solves
    ``Re(v* (A + eps E) v) = 0`` with derivative ``-||Pi_S(v v*)||``.
    """
    A = np.asarray(A)
    cfg = cfg or OuterConfig(
        inner=FlowConfig(tol_stationary=1e-11, max_steps=50000, h0=1.0, h_max=1e3)
    )
    counter = counter if counter is not None else OpCounter()
    omega = numerical_abscissa(A)
    if omega >= 0:
        raise NotDissipativeError(f"numerical abscissa {omega:.3e} is nonnegative")
    scale = abs(omega)

    # startup: one Hermitian eigensolve for the initial vector
    H = 0.5 * (A + A.conj().T)
    w, V = np.linalg.eigh(H)
    v0 = V[:, -1]

    def evaluate(eps, warm):
        v = warm if warm is not None else v0
        v, E, f, status, nops = _rayleigh_loop(
            A, space, eps, v, cfg.inner, counter, scale
        )
        piVV = space.project(np.outer(v, v.conj()))
        slope = -float(np.linalg.norm(piVV))
        return InnerEval(f, slope, v, nops, extras={"E": E})

    if cfg.eps0 is not None:
        eps0 = cfg.eps0
    else:
        piVV0 = space.project(np.outer(v0, v0.conj()))
        eps0 = scale / max(np.linalg.norm(piVV0), 1e-14)

    report = newton_bisection(evaluate, 0.0, cfg, eps0)
    v = report.state
    if v is not None:
        P = space.project(np.outer(v, v.conj()))
        report.perturbation = report.eps_star * P / np.linalg.norm(P)
    report.extras["counter"] = counter
    return report


# ---------------------------------------------------------------------------
# structured distance to singularity via matrix-vector products


def _mvp_loop(A, space, eps, u, v, cfg, counter):
    """Minimize ``(||u^T M||^2 + ||M v||^2)/2`` for ``M = A + eps E`` with
    ``E = -Pi_S(u v^T)/||Pi_S(u v^T)||``; matrix-vector products only."""

    def assemble(u, v):
        P = space.project(np.outer(u, v))
        counter.projections += 1
        nrm = np.linalg.norm(P)
        if nrm < 1e-14:
            raise RhoBlowupError("projection annihilates u v^T")
        return -P / nrm, 1.0 / nrm

    def functional(u, v, E):
        Mu = A.T @ u + eps * (E.T @ u)
        Mv = A @ v + eps * (E @ v)
        counter.matvec += 4
        counter.dot += 2
        return (
            0.5 * float(Mu @ Mu) + 0.5 * float(Mv @ Mv),
            Mu,
            Mv,
        )

    E, eta = assemble(u, v)
    f_cur, Mu, Mv = functional(u, v, E)
    h = cfg.h0
    status = "max-steps"
    nops = 0
    for _ in range(cfg.max_steps):
        # reduced gradient directions for u and v
        G = space.project(
            np.outer(u, Mu) + np.outer(Mv, v)
        )  # Pi_S(u u^T M + M v v^T)
        counter.projections += 1
        gamma = float(u @ (G @ v))
        counter.matvec += 1
        counter.dot += 1
        g_u = A @ Mu + eps * (E @ Mu) - eps * eta**2 * gamma * (E @ v) - eps * eta * (G @ v)
        g_v = (
            A.T @ Mv
            + eps * (E.T @ Mv)
            - eps * eta**2 * gamma * (E.T @ u)
            - eps * eta * (G.T @ u)
        )
        counter.matvec += 8
        du = -g_u + float(g_u @ u) * u
        dv = -g_v + float(g_v @ v) * v
        counter.dot += 2
        g_k = float(du @ du) + float(dv @ dv)
        counter.dot += 2
        if math.sqrt(g_k) <= cfg.tol_stationary * max(1.0, f_cur):
            status = "converged"
            break
        collapsed = False
        rejected = False
        h_k = h
        while True:
            u_new = u + h * du
            v_new = v + h * dv
            u_new /= np.linalg.norm(u_new)
            v_new /= np.linalg.norm(v_new)
            E_new, eta_new = assemble(u_new, v_new)
            f_new, Mu_new, Mv_new = functional(u_new, v_new, E_new)
            nops += 1
            if f_new < f_cur:
                break
            rejected = True
            h /= cfg.theta
            if h < cfg.h_min:
                collapsed = True
                break
        if collapsed:
            status = "step-collapse"
            break
        if f_new >= f_cur - (h / cfg.theta) * g_k:
            h_next = h / cfg.theta
        elif not rejected and h == h_k:
            h_next = cfg.theta * h
        else:
            h_next = h
        h = min(max(h_next, cfg.h_min), cfg.h_max)
        converged = abs(f_new - f_cur) <= cfg.tol_stationary * max(1.0, abs(f_cur))
        u, v, E, eta, f_cur, Mu, Mv = u_new, v_new, E_new, eta_new, f_new, Mu_new, Mv_new
        if converged:
            status = "converged"
            break
    sigma_signed = float(u @ Mv)
    counter.dot += 1
    return u, v, E, f_cur, sigma_signed, status, nops


def singularity_distance_mvp(
    A: np.ndarray,
    space: StructureSpace,
    cfg: OuterConfig | None = None,
    counter: OpCounter | None = None,
    theta_stop: float = 1e-8,
) -> SolveReport:
    """Structured distance to singularity of a real matrix, eigenvalue-free.

    The inner flow drives unit vectors ``u, v`` toward the smallest
    singular pair of ``A + eps E`` with the optimal structured perturbation
    ``E = -Pi_S(u v^T)/||Pi_S(u v^T)||``; all loop work is matrix-vector
    products and inner products.  The outer iteration finds the smallest
    ``eps`` with ``sigma_min(A + eps E(eps)) <= theta_stop * ||A||_2``
    using the derivative ``d sigma/d eps = -||Pi_S(u v^T)||``.  The signed
    bilinear form ``u^T (A + eps E) v`` flags past-the-root evaluations.
    """
    A = np.asarray(A, dtype=float)
    if not np.isrealobj(A) or not space.real:
        raise ValueError("the matrix-vector route handles real matrices only")
    cfg = cfg or OuterConfig(
        inner=FlowConfig(tol_stationary=1e-12, max_steps=50000, h0=0.5, h_max=1e3)
    )
    counter = counter if counter is not None else OpCounter()
    norm2 = float(np.linalg.svd(A, compute_uv=False)[0])
    tol_sigma = theta_stop * norm2

    # startup: one SVD for the initial singular pair
    U, s, Vh = np.linalg.svd(A)
    u0, v0 = U[:, -1].copy(), Vh[-1, :].copy()
    if s[-1] <= tol_sigma:
        return SolveReport(0.0, "converged", [], perturbation=np.zeros_like(A))

    def evaluate(eps, warm):
        u, v = warm if warm is not None else (u0, v0)
        # sign convention: u^T (A + eps E) v > 0 at the start of the flow
        E0 = -space.project(np.outer(u, v))
        nrm = np.linalg.norm(E0)
        if nrm > 1e-14 and float(u @ (A @ v)) + eps * float(u @ (E0 / nrm @ v)) < 0:
            u = -u
        u, v, E, f, sigma_signed, status, nops = _mvp_loop(
            A, space, eps, u, v, cfg.inner, counter
        )
        piUV = space.project(np.outer(u, v))
        slope = -float(np.linalg.norm(piUV))
        return InnerEval(
            sigma_signed, slope, (u, v), nops, extras={"E": E, "f": f}
        )

    piUV0 = np.linalg.norm(space.project(np.outer(u0, v0)))
    eps0 = cfg.eps0 if cfg.eps0 is not None else s[-1] / max(piUV0, 1e-14)

    saved_tol = cfg.tol_min
    cfg = _with_tol_min(cfg, tol_sigma)
    report = newton_bisection(evaluate, 0.0, cfg, eps0, mode="onesided")
    u, v = report.state
    P = space.project(np.outer(u, v))
    report.perturbation = -report.eps_star * P / np.linalg.norm(P)
    report.extras["counter"] = counter
    report.extras["uv"] = (u, v)
    return report


def _with_tol_min(cfg: OuterConfig, tol_min: float) -> OuterConfig:
    from dataclasses import replace

    return replace(cfg, tol_min=tol_min)


# ---------------------------------------------------------------------------
# coprimality radius of a polynomial pair


@dataclass
class CoprimalityResult:
    rho_co: float
    eps_star: float
    p_perturbed: np.ndarray
    q_perturbed: np.ndarray
    common_zeros: np.ndarray
    report: SolveReport


def _common_zeros_from_nullspace(S: np.ndarray, ndim: int) -> np.ndarray:
    """Common zeros from the null space of a singular Sylvester matrix.

    Null vectors have the Vandermonde-like form ``(z^{2n-1}, ..., z, 1)``;
    the shift structure turns the computed null basis into a small
    eigenvalue problem whose eigenvalues are the common zeros.
    """
    U, s, Vh = np.linalg.svd(S)
    N = Vh[-ndim:, :].conj().T  # (2n, ndim) basis of the numerical null space
    N_up = N[:-1, :]
    N_dn = N[1:, :]
    M, *_ = np.linalg.lstsq(N_dn, N_up, rcond=None)
    return np.linalg.eigvals(M)


def coprimality_radius(
    a: np.ndarray,
    b: np.ndarray,
    cfg: OuterConfig | None = None,
    route: str = "eig",
) -> CoprimalityResult:
    """Distance from a coprime polynomial pair to the nearest pair with a
    common zero, in the Euclidean norm of the coefficient vectors.

    Polynomials are given highest-degree-first and padded to a common
    degree n (the leading coefficient of the second may be zero).  The
    problem is the structured distance to singularity of the Sylvester
    matrix; every coefficient occupies n band positions, so the
    coefficient-space distance is the matrix distance divided by
    ``sqrt(n)``.  Returns the perturbed coefficient pair and the common
    zeros recovered from the null space of the singular Sylvester matrix.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    deg = max(a.size, b.size) - 1
    a = np.concatenate([np.zeros(deg + 1 - a.size), a])
    b = np.concatenate([np.zeros(deg + 1 - b.size), b])
    S = sylvester_build(a, b)
    n = deg
    space = sylvester_real(n)

    norm2 = float(np.linalg.svd(S, compute_uv=False)[0])
    smin = float(np.linalg.svd(S, compute_uv=False)[-1])
    if smin <= 1e-12 * norm2:
        zeros = _common_zeros_from_nullspace(S, _null_dim(S, norm2))
        return CoprimalityResult(
            0.0, 0.0, a, b, zeros, SolveReport(0.0, "converged", [])
        )

    if route == "mvp":
        report = singularity_distance_mvp(S, space, cfg)
    else:
        from .twolevel import singularity_distance_eig

        report = singularity_distance_eig(S, space, cfg or OuterConfig())
    S_hat = S + report.perturbation
    a_hat, b_hat = sylvester_coefficients(S_hat)
    zeros = _common_zeros_from_nullspace(S_hat, _null_dim(S_hat, norm2))
    return CoprimalityResult(
        rho_co=report.eps_star / math.sqrt(n),
        eps_star=report.eps_star,
        p_perturbed=a_hat,
        q_perturbed=b_hat,
        common_zeros=zeros,
        report=report,
    )


def _null_dim(S: np.ndarray, scale: float) -> int:
    s = np.linalg.svd(S, compute_uv=False)
    thr = max(1e-6 * scale, 10.0 * s[-1])
    return max(int(np.sum(s <= thr)), 1)
