"""Norm-constrained rank-1 gradient flow and its splitting integrator.

The flow evolves a unit-norm rank-1 perturbation ``E = u v*`` so that a
functional of a target eigenvalue of ``A + eps*E`` decreases.  One discrete
step is an explicit Euler step on the non-rotational part of the vector
differential equations, a renormalization of both vectors, and an exact
phase rotation.  Step sizes are controlled by an Armijo-type rule driven by
the analytic decay rate of the continuous flow.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ZeroGradientError
from .linalg import EigenTriple, TargetSelector, target_eigentriple
from .objectives import DEGENERATE_TOL, Objective

__all__ = [
    "Rank1State",
    "Rank1Gradient",
    "SplittingScalars",
    "FlowConfig",
    "FlowTraceRow",
    "FlowResult",
    "free_gradient",
    "tangent_project_rank1",
    "splitting_step",
    "decay_rate_g",
    "run_rank1_flow",
]


@dataclass(frozen=True)
class Rank1State:
    """Unit-norm rank-1 perturbation stored as its two unit factors."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        for w in (self.u, self.v):
            if abs(np.linalg.norm(w) - 1.0) > 1e-12:
                raise ValueError("factors of a Rank1State must have unit norm")

    @property
    def matrix(self) -> np.ndarray:
        return np.outer(self.u, self.v.conj())

    @classmethod
    def from_vectors(cls, u: np.ndarray, v: np.ndarray) -> "Rank1State":
        u = np.asarray(u, dtype=complex)
        v = np.asarray(v, dtype=complex)
        return cls(u / np.linalg.norm(u), v / np.linalg.norm(v))


@dataclass(frozen=True)
class Rank1Gradient:
    """Rank-1 gradient ``gamma * x y*`` of an eigenvalue functional."""

    gamma: complex
    x: np.ndarray
    y: np.ndarray

    @property
    def factors(self) -> tuple[np.ndarray, np.ndarray]:
        """Factor pair ``(gamma * x, y)``."""
        return self.gamma * self.x, self.y

    @property
    def matrix(self) -> np.ndarray:
        return self.gamma * np.outer(self.x, self.y.conj())

    @property
    def norm(self) -> float:
        return abs(self.gamma)

    @property
    def degenerate(self) -> bool:
        return self.norm < DEGENERATE_TOL


@dataclass(frozen=True)
class SplittingScalars:
    """Scalars entering one splitting step: ``alpha = u*x``, ``beta = v*y``,
    ``gamma = two_f_bar(lam)`` and the rotation rate."""

    alpha: complex
    beta: complex
    gamma: complex

    @property
    def theta_rot(self) -> float:
        return -0.5 * float(np.imag(self.alpha * np.conj(self.beta) * self.gamma))


@dataclass(frozen=True)
class FlowConfig:
    """Step-size and termination parameters for the discrete flows."""

    h0: float = 0.1
    theta: float = 2.0
    h_min: float = 1e-8
    h_max: float = 10.0
    tol_stationary: float = 1e-9
    max_steps: int = 5000
    polish_steps: int = 20


@dataclass(frozen=True)
class FlowTraceRow:
    k: int
    h: float
    lam: complex
    f: float
    g: float


@dataclass
class FlowResult:
    state: object
    triple: EigenTriple
    f: float
    status: str  # converged | max-steps | step-collapse
    trace: list = field(default_factory=list)
    neigs: int = 0
    h_last: float = 0.0
    target_switches: int = 0


def free_gradient(obj: Objective, triple: EigenTriple) -> Rank1Gradient:
    """Rescaled gradient ``two_f_bar * x y*`` of the functional at a triple."""
    return Rank1Gradient(obj.two_f_bar(triple.lam), triple.x, triple.y)


def tangent_project_rank1(state: Rank1State, Z: np.ndarray) -> np.ndarray:
    """Orthogonal projection of ``Z`` onto the tangent space at ``u v*``:
    ``P(Z) = Z - (I - u u*) Z (I - v v*)``."""
    u, v = state.u, state.v
    Zv = Z @ v
    uZ = u.conj() @ Z
    uZv = u.conj() @ Zv
    return (
        np.outer(Zv, v.conj()) + np.outer(u, uZ) - uZv * np.outer(u, v.conj())
    )


def _split_step_vectors(
    u: np.ndarray,
    v: np.ndarray,
    Gv: np.ndarray,
    Gsu: np.ndarray,
    h: float,
) -> tuple[np.ndarray, np.ndarray]:
    """One splitting step for the factor equations with gradient actions
    ``Gv = G v`` and ``Gsu = G* u``.

    Euler on the non-rotational part, renormalization, then the exact
    rotation ``u -> exp(i theta h) u``, ``v -> exp(-i theta h) v``.
    """
    uGv = complex(u.conj() @ Gv)
    uh = u + h * (uGv * u - Gv)
    vh = v + h * (np.conj(uGv) * v - Gsu)
    uh /= np.linalg.norm(uh)
    vh /= np.linalg.norm(vh)
    theta = -0.5 * np.imag(uGv)
    rot = np.exp(1j * theta * h)
    return rot * uh, np.conj(rot) * vh


def splitting_step(
    A: np.ndarray,
    eps: float,
    obj: Objective,
    sel: TargetSelector,
    state: Rank1State,
    h: float,
    triple: EigenTriple | None = None,
) -> tuple[Rank1State, EigenTriple]:
    """One discrete step of the rank-1 constrained gradient flow.

    Recomputes the target eigentriple of ``A + eps*u(h)v(h)*`` after the
    update.  ``triple`` may pass in the eigentriple of the current state
    to avoid one eigensolve.
    """
    if triple is None:
        triple = target_eigentriple(A + eps * state.matrix, sel)
    grad = free_gradient(obj, triple)
    gamma = grad.gamma
    beta = complex(state.v.conj() @ triple.y)
    alphabar = complex(triple.x.conj() @ state.u)
    Gv = gamma * np.conj(beta) * triple.x
    Gsu = np.conj(gamma) * alphabar * triple.y
    u1, v1 = _split_step_vectors(state.u, state.v, Gv, Gsu, h)
    new_state = Rank1State(u1, v1)
    new_triple = target_eigentriple(A + eps * new_state.matrix, sel)
    return new_state, new_triple


def scalars_at(state: Rank1State, obj: Objective, triple: EigenTriple) -> SplittingScalars:
    return SplittingScalars(
        alpha=complex(state.u.conj() @ triple.x),
        beta=complex(state.v.conj() @ triple.y),
        gamma=obj.two_f_bar(triple.lam),
    )


def decay_rate_g(eps: float, triple: EigenTriple, sc: SplittingScalars) -> float:
    """Analytic decay rate of the functional along the rank-1 flow,

    ``g = eps*kappa*(|gamma|^2 (|a|^2 + |b|^2 - |a|^2 |b|^2) - Re(a conj(b) gamma)^2)``,

    which is nonnegative and vanishes exactly at stationary points.
    """
    a2 = abs(sc.alpha) ** 2
    b2 = abs(sc.beta) ** 2
    proj2 = abs(sc.gamma) ** 2 * (a2 + b2 - a2 * b2)
    inner = np.real(sc.alpha * np.conj(sc.beta) * sc.gamma)
    return max(eps * triple.kappa * (proj2 - inner**2), 0.0)


def _stationarity_norm(eps: float, triple: EigenTriple, sc: SplittingScalars) -> float:
    """Norm of the projected gradient step direction, ``sqrt(g/(eps*kappa))``."""
    g = decay_rate_g(eps, triple, sc)
    return float(np.sqrt(g / (eps * triple.kappa)))


def _grow_to_sphere(A, eps, obj, sel, E, cfg):
    """Inequality-constraint phase: free gradient descent ``Edot = -G``
    from an interior perturbation until the unit sphere is reached.

    Returns a rank-1 state obtained from the dominant singular pair of
    the grown perturbation (the free path need not stay rank 1)."""
    A = np.asarray(A)
    h = cfg.h0
    neigs = 0
    triple = target_eigentriple(A + eps * E, sel)
    neigs += 1
    f_cur = obj.value(triple.lam)
    for _ in range(cfg.max_steps):
        if np.linalg.norm(E) >= 1.0:
            break
        G = free_gradient(obj, triple)
        if G.degenerate:
            break
        cand = E - h * G.matrix
        if np.linalg.norm(cand) > 1.0:
            cand = cand / np.linalg.norm(cand)
        cand_triple = target_eigentriple(A + eps * cand, sel)
        neigs += 1
        f_new = obj.value(cand_triple.lam)
        if f_new < f_cur:
            E, triple, f_cur = cand, cand_triple, f_new
            h = min(h * cfg.theta, cfg.h_max)
        else:
            h /= cfg.theta
            if h < cfg.h_min:
                break
    U, s, Vh = np.linalg.svd(E)
    return Rank1State.from_vectors(U[:, 0], Vh[0, :].conj()), neigs


def run_rank1_flow(
    A: np.ndarray,
    eps: float,
    obj: Objective,
    sel: TargetSelector,
    init: Rank1State,
    cfg: FlowConfig = FlowConfig(),
    init_scale: float = 1.0,
) -> FlowResult:
    """Integrate the rank-1 constrained gradient flow to a stationary point.

    ``init_scale < 1`` starts from the interior perturbation
    ``init_scale * u v*`` under the inequality constraint ``||E|| <= 1``:
    the free gradient flow grows the perturbation to the unit sphere,
    where the norm-constrained rank-1 flow takes over.

    Steps are accepted only if the functional strictly decreases, which
    makes the sequence of accepted values monotone.  The proposed step is
    divided by ``theta`` after a weak decrease (Armijo test against the
    analytic decay rate) and multiplied by ``theta`` after a rejection-free
    step.  Terminates at stationarity, on ``max_steps``, or when the step
    size collapses below ``h_min``.

    After stationarity is reached, up to ``polish_steps`` fixed-point
    iterations ``E <- -G/||G||`` are applied while they strictly decrease
    the functional; they sharpen the alignment of the factors with the
    eigenvectors at negligible cost.
    """
    A = np.asarray(A)
    state = init
    grow_neigs = 0
    if init_scale < 1.0:
        state, grow_neigs = _grow_to_sphere(
            A, eps, obj, sel, init_scale * init.matrix, cfg
        )
    triple = target_eigentriple(A + eps * state.matrix, sel)
    neigs = 1 + grow_neigs
    f_cur = obj.value(triple.lam)
    h = cfg.h0
    trace: list[FlowTraceRow] = []
    status = "max-steps"
    switches = 0
    h_last = 0.0

    for k in range(cfg.max_steps):
        sc = scalars_at(state, obj, triple)
        if free_gradient(obj, triple).degenerate:
            status = "converged"
            break
        g_k = decay_rate_g(eps, triple, sc)
        trace.append(FlowTraceRow(k, h, triple.lam, f_cur, g_k))
        if _stationarity_norm(eps, triple, sc) <= cfg.tol_stationary * max(
            1.0, abs(sc.gamma)
        ):
            status = "converged"
            break

        h_k = h
        rejected = False
        collapsed = False
        while True:
            cand_state, cand_triple = splitting_step(
                A, eps, obj, sel, state, h, triple
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

        # Armijo-style update of the proposed step for the next iteration.
        if f_new >= f_cur - (h / cfg.theta) * g_k:
            h_next = h / cfg.theta
        elif not rejected and h == h_k:
            h_next = cfg.theta * h
        else:
            h_next = h
        h_next = min(max(h_next, cfg.h_min), cfg.h_max)

        if abs(cand_triple.lam - triple.lam) > 10.0 * abs(f_new - f_cur) + 1.0:
            switches += 1

        converged = abs(f_new - f_cur) <= cfg.tol_stationary
        state, triple, h_last = cand_state, cand_triple, h
        f_cur, h = f_new, h_next
        if converged:
            status = "converged"
            break

    # Fixed-point polish: E <- -G/||G|| while the functional decreases.
    for _ in range(cfg.polish_steps):
        grad = free_gradient(obj, triple)
        if grad.degenerate:
            break
        phase = -grad.gamma / abs(grad.gamma)
        cand = Rank1State.from_vectors(phase * triple.x, triple.y)
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
        target_switches=switches,
    )


def steepest_descent_state(obj: Objective, triple: EigenTriple) -> Rank1State:
    """Unit-norm rank-1 state aligned with ``-G`` at the given triple."""
    grad = free_gradient(obj, triple)
    if grad.degenerate:
        raise ZeroGradientError("gradient vanishes; no descent direction")
    phase = -grad.gamma / abs(grad.gamma)
    return Rank1State.from_vectors(phase * triple.x, triple.y)
