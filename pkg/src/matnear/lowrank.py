"""Fixed-rank real gradient flow with a norm-preserving BUG integrator.

Real perturbations optimizing a target eigenvalue have optimizers of rank
at most 2 (rank 1 when the eigenvalue is real), so the real flow lives on
the manifold of rank-2 matrices ``E = U S V^T`` of unit Frobenius norm.
One time step updates the bases by the K- and L-substeps, then solves a
small Galerkin system for ``S`` and renormalizes it; this basis-update and
Galerkin (BUG) stepping stays stable when ``S`` is nearly singular.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import EigenTriple, TargetSelector, target_eigentriple
from .objectives import Objective
from .rank1 import FlowConfig, FlowResult, FlowTraceRow

__all__ = [
    "RankRState",
    "real_gradient",
    "tangent_project_rankr",
    "bug_step",
    "decay_rate_g_rankr",
    "run_rank2_flow",
    "initial_rank2_state",
]


@dataclass(frozen=True)
class RankRState:
    """Real rank-r perturbation ``E = U S V^T`` with orthonormal bases
    and, for unit-norm perturbations, ``||S||_F = 1``."""

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        r = self.S.shape[0]
        for B in (self.U, self.V):
            if np.linalg.norm(B.T @ B - np.eye(r)) > 1e-10:
                raise ValueError("basis factors must have orthonormal columns")

    @property
    def rank(self) -> int:
        return self.S.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return self.U @ self.S @ self.V.T


def real_gradient(obj: Objective, triple: EigenTriple) -> tuple[np.ndarray, np.ndarray]:
    """Factors ``(W, Y)`` of the real gradient ``G = Re(two_f_bar x y*) = W Y^T``.

    ``W`` stacks the real and imaginary parts of ``two_f_bar * x``, ``Y``
    those of ``y``; the product has rank 1 for a real target eigenvalue and
    rank 2 otherwise.
    """
    w = obj.two_f_bar(triple.lam) * triple.x
    W = np.column_stack([w.real, w.imag])
    Y = np.column_stack([triple.y.real, triple.y.imag])
    return W, Y


def tangent_project_rankr(state: RankRState, Z: np.ndarray) -> np.ndarray:
    """Projection onto the tangent space at ``U S V^T``:
    ``P(Z) = Z - (I - U U^T) Z (I - V V^T)``."""
    U, V = state.U, state.V
    ZV = Z @ V
    UZ = U.T @ Z
    return ZV @ V.T + U @ UZ - U @ (U.T @ ZV) @ V.T


def _geval(A, eps, obj, sel, E):
    """Real gradient of the functional at perturbation matrix ``E``."""
    triple = target_eigentriple(A + eps * E, sel)
    W, Y = real_gradient(obj, triple)
    return W @ Y.T, triple


def _heun(F, X0, h):
    """One second-order explicit Runge step for ``Xdot = F(X)``.

    Returns the updated matrix and the number of gradient evaluations.
    """
    k1 = F(X0)
    k2 = F(X0 + h * k1)
    return X0 + 0.5 * h * (k1 + k2), 2


def bug_step(
    A: np.ndarray,
    eps: float,
    obj: Objective,
    sel: TargetSelector,
    state: RankRState,
    h: float,
) -> tuple[RankRState, EigenTriple, int]:
    """One norm-preserving BUG step of size ``h``.

    K- and L-substeps propagate ``U S`` and ``V S^T`` with the frozen
    opposite basis and are orthonormalized by QR; the S-substep solves the
    Galerkin-projected equation in the new bases, starting from the
    normalized overlap ``M S N^T`` and renormalizing the result.  Returns
    the new state, the eigentriple at the new perturbation, and the number
    of eigenvalue solves used.
    """
    U0, S0, V0 = state.U, state.S, state.V
    neigs = 0

    def FK(K):
        nonlocal neigs
        G, _ = _geval(A, eps, obj, sel, K @ V0.T)
        neigs += 1
        return -G @ V0

    def FL(L):
        nonlocal neigs
        G, _ = _geval(A, eps, obj, sel, U0 @ L.T)
        neigs += 1
        return -G.T @ U0

    K1, _ = _heun(FK, U0 @ S0, h)
    U1, _ = np.linalg.qr(K1)
    M = U1.T @ U0

    L1, _ = _heun(FL, V0 @ S0.T, h)
    V1, _ = np.linalg.qr(L1)
    N = V1.T @ V0

    def FS(S):
        nonlocal neigs
        G, _ = _geval(A, eps, obj, sel, U1 @ S @ V1.T)
        neigs += 1
        return -U1.T @ G @ V1

    S_start = M @ S0 @ N.T
    S_start = S_start / np.linalg.norm(S_start)
    S1, _ = _heun(FS, S_start, h)
    S1 = S1 / np.linalg.norm(S1)

    new_state = RankRState(U1, S1, V1)
    triple = target_eigentriple(A + eps * new_state.matrix, sel)
    neigs += 1
    return new_state, triple, neigs


def decay_rate_g_rankr(
    eps: float,
    kappa: float,
    W: np.ndarray,
    Y: np.ndarray,
    state: RankRState,
) -> float:
    """Decay rate of the functional along the rank-r flow, computed from
    the small overlap matrices ``P = U^T W`` and ``Q = V^T Y``:

    ``g = eps*kappa*(||P Y^T||^2 + ||W Q^T||^2 - ||P Q^T||^2 - <P Q^T, S>^2)``.
    """
    P = state.U.T @ W
    Q = state.V.T @ Y
    yty = Y.T @ Y
    wtw = W.T @ W
    t1 = float(np.trace(P.T @ P @ yty))
    t2 = float(np.trace(Q.T @ Q @ wtw))
    PQ = P @ Q.T
    t3 = float(np.sum(PQ**2))
    t4 = float(np.sum(PQ * state.S)) ** 2
    return max(eps * kappa * (t1 + t2 - t3 - t4), 0.0)


def initial_rank2_state(
    obj: Objective,
    triple: EigenTriple,
    rng: np.random.Generator | None = None,
) -> RankRState:
    """Steepest-descent rank-2 state ``E = -G/||G||`` padded to rank 2.

    When the gradient has rank 1 (real target eigenvalue) the missing
    basis directions are completed with random orthogonal vectors and the
    second singular value of ``S`` is seeded at a tiny value.
    """
    rng = rng or np.random.default_rng(0)
    W, Y = real_gradient(obj, triple)
    n = W.shape[0]
    U, RW = np.linalg.qr(W)
    V, RY = np.linalg.qr(Y)
    S = -RW @ RY.T
    U, V, S = _complete_rank(U, V, S, n, rng)
    S = S / np.linalg.norm(S)
    return RankRState(U, S, V)


def _complete_rank(U, V, S, n, rng, floor=1e-12):
    """Pad degenerate factors so that S is invertible with rank 2."""
    u2, s2, v2 = np.linalg.svd(S)
    if s2[-1] < floor * max(s2[0], 1.0):
        s2 = np.maximum(s2, floor * max(s2[0], 1.0))
        S = u2 @ np.diag(s2) @ v2
    # replace numerically zero basis columns by random orthogonal completions
    def fix(B):
        Q, R = np.linalg.qr(B)
        d = np.abs(np.diag(R))
        if np.all(d > 1e-14):
            return Q * np.sign(np.diag(R))
        X = rng.standard_normal((n, B.shape[1]))
        X[:, d > 1e-14] = B[:, d > 1e-14]
        Q, _ = np.linalg.qr(X)
        return Q

    return fix(U), fix(V), S


def run_rank2_flow(
    A: np.ndarray,
    eps: float,
    obj: Objective,
    sel: TargetSelector,
    init: RankRState,
    cfg: FlowConfig = FlowConfig(),
    rng: np.random.Generator | None = None,
) -> FlowResult:
    """Drive the rank-2 constrained real gradient flow to a stationary point.

    Same acceptance and step-size policy as the rank-1 flow, plus the
    step-enlargement probe: when a step of size ``h`` survives both tests,
    a trial step of size ``theta*h`` is computed and kept if it decreases
    the functional further (its eigensolve is then reused as the accepted
    step).
    """
    A = np.asarray(A, dtype=float)
    rng = rng or np.random.default_rng(0)
    state = init
    triple = target_eigentriple(A + eps * state.matrix, sel)
    neigs = 1
    f_cur = obj.value(triple.lam)
    h = cfg.h0
    trace: list[FlowTraceRow] = []
    status = "max-steps"
    h_last = 0.0

    for k in range(cfg.max_steps):
        W, Y = real_gradient(obj, triple)
        g_k = decay_rate_g_rankr(eps, triple.kappa, W, Y, state)
        trace.append(FlowTraceRow(k, h, triple.lam, f_cur, g_k))
        if np.sqrt(g_k / (eps * triple.kappa)) <= cfg.tol_stationary * max(
            1.0, np.linalg.norm(W @ Y.T)
        ):
            status = "converged"
            break

        h_k = h
        rejected = False
        collapsed = False
        while True:
            cand_state, cand_triple, ne = bug_step(A, eps, obj, sel, state, h)
            neigs += ne
            f_new = obj.value(cand_triple.lam)
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

        h_next = h
        if f_new >= f_cur - (h / cfg.theta) * g_k:
            h_next = h / cfg.theta
        elif not rejected and h == h_k and cfg.theta * h <= cfg.h_max:
            # probe a larger step; reuse its eigensolve if it is better
            probe_state, probe_triple, ne = bug_step(A, eps, obj, sel, state, cfg.theta * h)
            neigs += ne
            f_probe = obj.value(probe_triple.lam)
            if f_probe < f_new:
                cand_state, cand_triple, f_new = probe_state, probe_triple, f_probe
                h = cfg.theta * h
                h_next = h
        h_next = min(max(h_next, cfg.h_min), cfg.h_max)

        converged = abs(f_new - f_cur) <= cfg.tol_stationary
        state, triple, h_last = cand_state, cand_triple, h
        f_cur, h = f_new, h_next
        if converged:
            status = "converged"
            break

    # fixed-point polish toward E = -G/||G|| while the functional decreases
    for _ in range(cfg.polish_steps):
        W, Y = real_gradient(obj, triple)
        gnorm = np.linalg.norm(W @ Y.T)
        if gnorm < 1e-14:
            break
        U, RW = np.linalg.qr(W)
        V, RY = np.linalg.qr(Y)
        S = -RW @ RY.T
        U, V, S = _complete_rank(U, V, S, A.shape[0], rng)
        cand = RankRState(U, S / np.linalg.norm(S), V)
        cand_triple = target_eigentriple(A + eps * cand.matrix, sel)
        neigs += 1
        f_new = obj.value(cand_triple.lam)
        if f_new >= f_cur:
            break
        state, triple, f_cur = cand, cand_triple, f_new

    return FlowResult(
        state=state,
        triple=triple,
        f=f_cur,
        status=status,
        trace=trace,
        neigs=neigs,
        h_last=h_last,
    )
