"""Structure-projected rank-1 gradient flow.

For a linear structure space S, the perturbation is ``E = Pi_S(Y)`` with
``Y = rho u v*`` rank-1 and ``rho = 1/||Pi_S(u v*)||_F`` keeping ``E`` of
unit Frobenius norm.  The factor equations match the unstructured ones up
to the positive factor ``rho``, so the same splitting integrator applies
with ``rho`` frozen within each step.  Global monotone decay is not
guaranteed for the projected flow, so steps are accepted only when the
functional decreases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RhoBlowupError, ZeroGradientError
from .linalg import EigenTriple, TargetSelector, target_eigentriple
from .objectives import DEGENERATE_TOL, Objective
from .rank1 import (
    FlowConfig,
    FlowResult,
    FlowTraceRow,
    Rank1State,
    _split_step_vectors,
    decay_rate_g,
    free_gradient,
    scalars_at,
)
from .structures import StructureSpace

__all__ = [
    "StructuredRank1State",
    "structured_gradient",
    "structured_rank1_step",
    "run_structured_flow",
    "structured_steepest_descent",
]

RHO_BLOWUP_TOL = 1e-12


@dataclass(frozen=True)
class StructuredRank1State:
    """Factors of ``E = rho * Pi_S(u v*)`` with ``rho`` making E unit norm."""

    u: np.ndarray
    v: np.ndarray
    rho: float
    space: StructureSpace

    @classmethod
    def from_vectors(cls, u, v, space: StructureSpace) -> "StructuredRank1State":
        u = np.asarray(u, dtype=complex)
        v = np.asarray(v, dtype=complex)
        u = u / np.linalg.norm(u)
        v = v / np.linalg.norm(v)
        nrm = np.linalg.norm(space.project(np.outer(u, v.conj())))
        if nrm < RHO_BLOWUP_TOL:
            raise RhoBlowupError(
                f"projection annihilates u v*: ||Pi_S(uv*)|| = {nrm:.3e}"
            )
        return cls(u, v, 1.0 / nrm, space)

    @property
    def rank1(self) -> Rank1State:
        return Rank1State(self.u, self.v)

    @property
    def matrix(self) -> np.ndarray:
        """The structured perturbation ``E`` of unit Frobenius norm."""
        return self.rho * self.space.project(np.outer(self.u, self.v.conj()))


def structured_gradient(
    space: StructureSpace, obj: Objective, triple: EigenTriple
) -> np.ndarray:
    """Projection onto S of the free gradient ``two_f_bar x y*``.

    A zero result signals a violated non-degeneracy hypothesis (for a
    matrix in S the structured gradient is nonzero whenever the real part
    of ``conj(lam) * two_f_bar(lam)`` is, for real-linear S).
    """
    return space.project(free_gradient(obj, triple).matrix)


def structured_steepest_descent(
    space: StructureSpace, obj: Objective, triple: EigenTriple
) -> StructuredRank1State:
    """State whose projected matrix points along ``-Pi_S(G)``."""
    grad = free_gradient(obj, triple)
    if grad.degenerate:
        raise ZeroGradientError("free gradient vanishes at the starting triple")
    phase = -grad.gamma / abs(grad.gamma)
    return StructuredRank1State.from_vectors(phase * triple.x, triple.y, space)


def structured_rank1_step(
    A: np.ndarray,
    eps: float,
    obj: Objective,
    space: StructureSpace,
    sel: TargetSelector,
    state: StructuredRank1State,
    h: float,
    triple: EigenTriple | None = None,
) -> tuple[StructuredRank1State, EigenTriple]:
    """One splitting step of the structure-projected rank-1 flow.

    ``rho`` rescales time, so the effective step for the factor update is
    ``h / rho``; ``rho`` is then recomputed from the new factors.
    """
    if triple is None:
        triple = target_eigentriple(A + eps * state.matrix, sel)
    grad = free_gradient(obj, triple)
    beta = complex(state.v.conj() @ triple.y)
    alphabar = complex(triple.x.conj() @ state.u)
    Gv = grad.gamma * np.conj(beta) * triple.x
    Gsu = np.conj(grad.gamma) * alphabar * triple.y
    u1, v1 = _split_step_vectors(state.u, state.v, Gv, Gsu, h / state.rho)
    new_state = StructuredRank1State.from_vectors(u1, v1, space)
    new_triple = target_eigentriple(A + eps * new_state.matrix, sel)
    return new_state, new_triple


def _structured_decay_rate(
    space: StructureSpace,
    eps: float,
    obj: Objective,
    triple: EigenTriple,
    state: StructuredRank1State,
) -> float:
    """First-order decay rate of the functional along the projected flow.

    The rank-1 projection and the structure projection do not commute, so
    the rate differs from the unstructured formula; it is computed from
    ``Ydot = -P_Y(G) + Re<P_Y G, E> Y`` as
    ``-(eps*kappa/rho) Re<Pi_S(G), Ydot>`` (clamped at zero, since descent
    is not guaranteed globally for the projected flow).
    """
    G = free_gradient(obj, triple).matrix
    u, v, rho = state.u, state.v, state.rho
    Y = rho * np.outer(u, v.conj())
    E = state.matrix
    Gv = G @ v
    uG = u.conj() @ G
    uGv = complex(u.conj() @ Gv)
    PyG = (
        np.outer(Gv, v.conj()) + np.outer(u, uG) - uGv * np.outer(u, v.conj())
    )
    Ydot = -PyG + float(np.real(np.vdot(PyG, E))) * Y
    rate = -(eps * triple.kappa / rho) * float(
        np.real(np.vdot(space.project(G), Ydot))
    )
    return max(rate, 0.0)


def run_structured_flow(
    A: np.ndarray,
    eps: float,
    obj: Objective,
    sel: TargetSelector,
    space: StructureSpace,
    init: StructuredRank1State,
    cfg: FlowConfig = FlowConfig(),
) -> FlowResult:
    """Integrate the structured rank-1 flow into a stationary point.

    Acceptance requires strict decrease of the functional (monotonicity is
    enforced by rejection since the projected flow does not guarantee it
    globally); the Armijo reference slope reuses the rank-1 decay rate
    scaled by ``1/rho``.  At stationarity the structured perturbation is a
    real multiple of the structured gradient.
    """
    A = np.asarray(A)
    state = init
    triple = target_eigentriple(A + eps * state.matrix, sel)
    neigs = 1
    f_cur = obj.value(triple.lam)
    h = cfg.h0
    trace: list[FlowTraceRow] = []
    status = "max-steps"
    h_last = 0.0

    for k in range(cfg.max_steps):
        if free_gradient(obj, triple).degenerate:
            status = "converged"
            break
        g_k = _structured_decay_rate(space, eps, obj, triple, state)
        trace.append(FlowTraceRow(k, h, triple.lam, f_cur, g_k))
        if _structured_stationarity(space, obj, triple, state) <= cfg.tol_stationary:
            status = "converged"
            break

        h_k = h
        rejected = False
        collapsed = False
        while True:
            cand_state, cand_triple = structured_rank1_step(
                A, eps, obj, space, sel, state, h, triple
            )
            neigs += 1
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

        healthy = f_new < f_cur - (h / cfg.theta) * g_k
        if not healthy:
            h_next = h / cfg.theta
        elif not rejected and h == h_k:
            h_next = cfg.theta * h
        else:
            h_next = h
        h_next = min(max(h_next, cfg.h_min), cfg.h_max)

        converged = healthy and abs(f_new - f_cur) <= cfg.tol_stationary * max(
            1.0, abs(f_cur)
        )
        state, triple, h_last = cand_state, cand_triple, h
        f_cur, h = f_new, h_next
        if converged:
            status = "converged"
            break

    # fixed-point polish: u,v <- aligned with the eigenvectors
    for _ in range(cfg.polish_steps):
        grad = free_gradient(obj, triple)
        if grad.degenerate:
            break
        phase = -grad.gamma / abs(grad.gamma)
        try:
            cand = StructuredRank1State.from_vectors(
                phase * triple.x, triple.y, space
            )
        except RhoBlowupError:
            break
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


def _structured_stationarity(
    space: StructureSpace,
    obj: Objective,
    triple: EigenTriple,
    state: StructuredRank1State,
) -> float:
    """Distance of E from the ray of the structured gradient.

    Stationary points satisfy ``E = c * Pi_S(G)`` with real ``c``; returns
    the Frobenius norm of the residual after the optimal real scaling,
    normalized by ``max(1, ||Pi_S(G)||)``.
    """
    G_s = structured_gradient(space, obj, triple)
    gnorm = np.linalg.norm(G_s)
    if gnorm < DEGENERATE_TOL:
        return 0.0
    E = state.matrix
    c = float(np.real(np.vdot(G_s, E))) / gnorm**2
    return float(np.linalg.norm(E - c * G_s)) / max(1.0, gnorm)
