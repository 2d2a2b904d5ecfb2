"""Outer iteration: Newton-bisection on the optimal-value function phi.

``phi(eps)`` is the minimum of an eigenvalue functional over unit-norm
(possibly structured) perturbations of size ``eps``; it is decreasing with
derivative ``phi'(eps) = -kappa(eps) * ||G(eps)||_F`` at the inner
optimizer, which drives Newton steps.  A bracket around the root is
maintained and bisection takes over whenever Newton leaves it; after
repeated bisections the lower bound is relaxed to recover from
inconsistent brackets caused by jumps between branches of local optima.
Inner solves are warm-started from the previous extremal perturbation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import structures as st
from .errors import NotStableError, ZeroGradientError
from .linalg import (
    EigenTriple,
    TargetSelector,
    largest_modulus,
    rightmost,
    smallest_modulus,
    target_eigentriple,
)
from .lowrank import initial_rank2_state, real_gradient, run_rank2_flow
from .objectives import (
    Objective,
    modulus,
    neg_half_modulus_squared,
    neg_real_part,
)
from .rank1 import (
    FlowConfig,
    Rank1State,
    free_gradient,
    run_rank1_flow,
    steepest_descent_state,
)
from .structured import (
    StructuredRank1State,
    run_structured_flow,
    structured_gradient,
    structured_steepest_descent,
)

__all__ = [
    "OuterConfig",
    "OuterRow",
    "SolveReport",
    "phi_derivative",
    "newton_bisection",
    "initial_guess",
    "stability_radius",
    "singularity_distance_eig",
    "eps_stability_radius",
]


@dataclass(frozen=True)
class OuterConfig:
    """Parameters of the outer Newton-bisection iteration."""

    tol0: float | None = None
    tol_min: float = 1e-8
    k_max: int = 50
    eps_lb: float = 0.0
    eps_ub: float = math.inf
    relax_after_bisections: int = 2
    eps0: float | None = None
    inner: FlowConfig = field(
        default_factory=lambda: FlowConfig(tol_stationary=1e-12, max_steps=20000)
    )


@dataclass(frozen=True)
class OuterRow:
    k: int
    eps: float
    phi: float
    inner_eigs: int
    h_last: float


@dataclass
class SolveReport:
    """Result of a two-level solve: optimal size, extremal perturbation,
    and the outer iteration history."""

    eps_star: float
    status: str  # converged | max-iters | breakdown
    rows: list[OuterRow]
    perturbation: np.ndarray | None = None
    state: object | None = None
    extras: dict = field(default_factory=dict)

    @property
    def phi_final(self) -> float:
        return self.rows[-1].phi if self.rows else math.nan


@dataclass
class InnerEval:
    """One inner optimization: value, slope, converged state."""

    phi: float
    slope: float
    state: object
    neigs: int
    h_last: float = 0.0
    extras: dict = field(default_factory=dict)


def phi_derivative(triple: EigenTriple, G: np.ndarray) -> float:
    """Derivative of the optimal-value function, ``-||G||_F / (x*y)``."""
    gnorm = float(np.linalg.norm(G))
    if gnorm < 1e-14:
        raise ZeroGradientError("gradient vanishes; phi' undefined")
    return -triple.kappa * gnorm


def _slope_or_none(triple: EigenTriple, G: np.ndarray) -> float | None:
    try:
        return phi_derivative(triple, G)
    except ZeroGradientError:
        return None


def newton_bisection(
    evaluate, r: float, cfg: OuterConfig, eps0: float, mode: str = "crossing"
) -> SolveReport:
    """Find the smallest root of ``phi(eps) = r`` for decreasing ``phi``.

    ``evaluate(eps, warm_state)`` returns an :class:`InnerEval`; each call
    is warm-started from the state of the nearest previously evaluated
    ``eps``.  Newton steps use the returned slope; iterates leaving the
    bracket are replaced by its midpoint, and after
    ``relax_after_bisections`` consecutive bisections the lower bound is
    relaxed by the factor 7/8.

    In ``crossing`` mode phi changes sign at the root and the iteration
    stops when ``|phi - r|`` drops below ``tol_min`` (scaled).  In
    ``onesided`` mode phi reaches ``r`` from above and stays there (or the
    evaluator reports past-the-root points with ``phi < r``); the smallest
    at-root ``eps`` is refined until the bracket is tight.
    """
    lb, ub = cfg.eps_lb, cfg.eps_ub
    eps = eps0
    history: list[tuple[float, object, float]] = []
    rows: list[OuterRow] = []
    phi_prev = None
    tol_k = cfg.tol0
    tol_phi = cfg.tol_min * max(1.0, abs(r))
    consecutive_bisections = 0
    stalls = 0
    status = "max-iters"
    best = None
    at_root = None  # smallest eps seen with phi at/past r (onesided mode)

    for k in range(cfg.k_max):
        # Warm-start from the nearest evaluated eps.  In onesided mode only
        # below-root states qualify: past-root evaluations may sit on a
        # different stationary branch, and continuing the below-root branch
        # across the root is what locates the smallest root.
        pool = history
        if mode == "onesided":
            pool = [t for t in history if t[2] > r + tol_phi]
        warm = min(pool, key=lambda t: abs(t[0] - eps))[1] if pool else None
        ev = evaluate(eps, warm)
        history.append((eps, ev.state, ev.phi))
        rows.append(OuterRow(k, eps, ev.phi, ev.neigs, ev.h_last))
        past = ev.phi - r <= (tol_phi if mode == "onesided" else -math.inf)
        if ev.phi < r or past:
            ub = min(ub, eps)
            if past and (at_root is None or eps < at_root[0]):
                at_root = (eps, ev.state)
        else:
            lb = max(lb, eps)
        if best is None or abs(ev.phi - r) < abs(best[1] - r):
            best = (eps, ev.phi, ev.state)

        if mode == "crossing":
            if abs(ev.phi - r) <= tol_phi:
                status = "converged"
                break
            if phi_prev is not None and abs(ev.phi - phi_prev) < (
                tol_k or cfg.tol_min
            ):
                stalls += 1
                if stalls >= 4:
                    status = "breakdown"
                    break
            else:
                stalls = 0
        else:
            if at_root is not None and ub - lb <= 1e-7 * max(1.0, ub):
                status = "converged"
                break

        # Newton proposal from the inner slope
        if ev.slope is not None and ev.slope < 0:
            eps_next = eps - (ev.phi - r) / ev.slope
        else:
            eps_next = math.inf
        if not (lb < eps_next < ub) or not math.isfinite(eps_next):
            if math.isfinite(ub):
                eps_next = 0.5 * (lb + ub)
                consecutive_bisections += 1
            else:
                eps_next = max(2.0 * eps, 1e-12)
                consecutive_bisections = 0
        else:
            consecutive_bisections = 0
        if consecutive_bisections >= cfg.relax_after_bisections and mode == "crossing":
            lb *= 1.0 - 1.0 / 8.0
            consecutive_bisections = 0

        if tol_k is None:
            tol_k = abs(eps_next - eps) / 10.0
        else:
            tol_k = max(1e-2 * tol_k, cfg.tol_min)
        phi_prev = ev.phi
        eps = eps_next
        if math.isfinite(ub) and ub - lb <= 1e-15 * max(1.0, ub):
            status = "breakdown" if mode == "crossing" else "converged"
            break

    if mode == "onesided" and at_root is not None:
        eps_star, state_star = at_root
    else:
        eps_star, _, state_star = best
    return SolveReport(eps_star=eps_star, status=status, rows=rows, state=state_star)


def initial_guess(
    A: np.ndarray,
    obj: Objective,
    sel: TargetSelector,
    r: float,
    space: st.StructureSpace | None = None,
) -> tuple[object, float]:
    """Steepest-descent starting perturbation and formal first Newton step.

    ``E0 = -G0/||G0||`` at the unperturbed matrix and
    ``eps0 = (x*y) (f(lam(A)) - r) / ||G0||_F``.
    """
    triple = target_eigentriple(np.asarray(A), sel)
    f0 = obj.value(triple.lam)
    if space is None or space.kind == "full-complex":
        grad = free_gradient(obj, triple)
        if grad.degenerate:
            raise ZeroGradientError("gradient vanishes at the unperturbed matrix")
        state0 = steepest_descent_state(obj, triple)
        gnorm = grad.norm
    elif space.kind == "full-real":
        W, Y = real_gradient(obj, triple)
        gnorm = float(np.linalg.norm(W @ Y.T))
        if gnorm < 1e-14:
            raise ZeroGradientError("real gradient vanishes at the unperturbed matrix")
        state0 = initial_rank2_state(obj, triple)
    else:
        G = structured_gradient(space, obj, triple)
        gnorm = float(np.linalg.norm(G))
        if gnorm < 1e-14:
            raise ZeroGradientError(
                "structured gradient vanishes at the unperturbed matrix"
            )
        state0 = structured_steepest_descent(space, obj, triple)
    eps0 = triple.xy * (f0 - r) / gnorm
    return state0, eps0


def _rank1_evaluator(A, obj, sel, cfg):
    def evaluate(eps, warm):
        init = warm if isinstance(warm, Rank1State) else None
        if init is None:
            triple = target_eigentriple(A, sel)
            init = steepest_descent_state(obj, triple)
        res = run_rank1_flow(A, eps, obj, sel, init, cfg.inner)
        grad = free_gradient(obj, res.triple)
        slope = _slope_or_none(res.triple, grad.matrix)
        return InnerEval(
            res.f, slope, res.state, res.neigs, res.h_last,
            extras={"lam": res.triple.lam, "triple": res.triple},
        )

    return evaluate


def _rank2_evaluator(A, obj, sel, cfg):
    def evaluate(eps, warm):
        init = warm
        if init is None:
            triple = target_eigentriple(A, sel)
            init = initial_rank2_state(obj, triple)
        res = run_rank2_flow(A, eps, obj, sel, init, cfg.inner)
        W, Y = real_gradient(obj, res.triple)
        slope = _slope_or_none(res.triple, W @ Y.T)
        return InnerEval(
            res.f, slope, res.state, res.neigs, res.h_last,
            extras={"lam": res.triple.lam, "triple": res.triple},
        )

    return evaluate


def _structured_evaluator(A, obj, sel, space, cfg):
    def evaluate(eps, warm):
        init = warm
        if init is None:
            triple = target_eigentriple(A, sel)
            init = structured_steepest_descent(space, obj, triple)
        res = run_structured_flow(A, eps, obj, sel, space, init, cfg.inner)
        G = structured_gradient(space, obj, res.triple)
        slope = _slope_or_none(res.triple, G)
        return InnerEval(
            res.f, slope, res.state, res.neigs, res.h_last,
            extras={"lam": res.triple.lam, "triple": res.triple},
        )

    return evaluate


def _inner_evaluator(A, obj, sel, space, cfg):
    """Pick the inner engine for the structure: rank-1 for unstructured
    complex, rank-2 real for unstructured real, projected rank-1 else."""
    if space is None or space.kind == "full-complex":
        return _rank1_evaluator(A, obj, sel, cfg)
    if space.kind == "full-real":
        return _rank2_evaluator(np.asarray(A, dtype=float), obj, sel, cfg)
    return _structured_evaluator(A, obj, sel, space, cfg)


def _finalize(report: SolveReport, eps: float) -> SolveReport:
    state = report.state
    if state is not None and hasattr(state, "matrix"):
        report.perturbation = eps * state.matrix
    return report


def stability_radius(
    A: np.ndarray,
    space: st.StructureSpace | None = None,
    flavor: str = "hurwitz",
    cfg: OuterConfig = OuterConfig(),
) -> SolveReport:
    """Distance to instability of a Hurwitz or Schur matrix.

    Hurwitz: smallest ``eps`` such that some perturbation in the structure
    space of norm ``eps`` moves an eigenvalue onto the imaginary axis
    (root of the negated pseudospectral abscissa).  Schur: smallest
    ``eps`` moving an eigenvalue onto the unit circle.
    """
    A = np.asarray(A)
    lam = np.linalg.eigvals(A)
    if flavor == "hurwitz":
        if np.max(lam.real) >= 0:
            raise NotStableError("matrix is not Hurwitz stable")
        obj, sel, r = neg_real_part(), rightmost(), 0.0
    elif flavor == "schur":
        if np.max(np.abs(lam)) >= 1:
            raise NotStableError("matrix is not Schur stable")
        obj, sel, r = neg_half_modulus_squared(), largest_modulus(), -0.5
    else:
        raise ValueError(f"unknown flavor {flavor!r}")

    state0, eps0 = initial_guess(A, obj, sel, r, space)
    if cfg.eps0 is not None:
        eps0 = cfg.eps0
    evaluate = _inner_evaluator(A, obj, sel, space, cfg)

    def eval_warm(eps, warm):
        return evaluate(eps, warm if warm is not None else state0)

    report = newton_bisection(eval_warm, r, cfg, eps0)
    return _finalize(report, report.eps_star)


def singularity_distance_eig(
    A: np.ndarray,
    space: st.StructureSpace | None = None,
    cfg: OuterConfig = OuterConfig(),
) -> SolveReport:
    """Structured distance to singularity via eigenvalue optimization.

    Drives the smallest-modulus eigenvalue of ``A + eps E`` to zero over
    structured perturbations; ``phi(eps)`` is the optimized modulus.
    """
    A = np.asarray(A)
    if np.min(np.abs(np.linalg.eigvals(A))) == 0.0:
        return SolveReport(0.0, "converged", [], perturbation=np.zeros_like(A))
    obj, sel, r = modulus(), smallest_modulus(), 0.0
    try:
        state0, eps0 = initial_guess(A, obj, sel, r, space)
    except ZeroGradientError:
        state0, eps0 = _movable_eigenvalue_guess(A, obj, space)
    if cfg.eps0 is not None:
        eps0 = cfg.eps0
    evaluate = _inner_evaluator(A, obj, sel, space, cfg)

    # The optimized modulus is V-shaped in eps: past the root the inner
    # flow converges to the continuation of the stationary branch, where
    # the eigenvalue modulus grows again.  A minimizing perturbation is a
    # NEGATIVE real multiple of the (structured) gradient; on the far side
    # of the V the multiple turns positive, which flags "past the root"
    # and lets the outer iteration bracket the smallest root.
    def eval_warm(eps, warm):
        ev = evaluate(eps, warm if warm is not None else state0)
        triple = ev.extras.get("triple")
        if triple is not None and abs(triple.lam) > 0:
            if space is None or space.kind == "full-complex":
                G = free_gradient(obj, triple).matrix
            else:
                G = structured_gradient(space, obj, triple)
            c = float(np.real(np.vdot(G, ev.state.matrix)))
            if c > 0.0:
                ev.phi = -ev.phi
        return ev

    report = newton_bisection(eval_warm, r, cfg, eps0, mode="onesided")
    # report the unsigned modulus in the rows
    report.rows = [
        OuterRow(row.k, row.eps, abs(row.phi), row.inner_eigs, row.h_last)
        for row in report.rows
    ]
    return _finalize(report, report.eps_star)


def _movable_eigenvalue_guess(A, obj, space):
    """Fallback start when the smallest-modulus eigenvalue cannot be moved
    within the structure: pick the eigenvalue with nonzero structured
    gradient whose formal Newton step to zero modulus is smallest."""
    import scipy.linalg as sla

    lam_all, vl, vr = sla.eig(np.asarray(A), left=True, right=True)
    best = None
    for i in range(lam_all.size):
        x, y = vl[:, i], vr[:, i]
        s = x.conj() @ y
        if abs(s) < 1e-12:
            continue
        x = x * (s / abs(s)) / np.linalg.norm(x)
        y = y / np.linalg.norm(y)
        triple = EigenTriple(complex(lam_all[i]), x, y)
        G = (
            structured_gradient(space, obj, triple)
            if space is not None
            else free_gradient(obj, triple).matrix
        )
        gnorm = float(np.linalg.norm(G))
        if gnorm < 1e-12:
            continue
        step = triple.xy * obj.value(triple.lam) / gnorm
        if best is None or step < best[0]:
            best = (step, triple)
    if best is None:
        raise ZeroGradientError(
            "no eigenvalue is movable within the structure space"
        )
    eps0, triple = best
    if space is None or space.kind == "full-complex":
        state0 = steepest_descent_state(obj, triple)
    else:
        state0 = structured_steepest_descent(space, obj, triple)
    return state0, eps0


# ---------------------------------------------------------------------------
# structured eps-stability radius (reduced rank-1 formulation)


def _reduced_gradient(space, E, triple, delta, eps):
    """Gradient of the reduced functional
    ``-Re lam(A + eps E + delta Pi_S(E)/||Pi_S(E)||)`` at ``E = u v*``."""
    G = -np.outer(triple.x, triple.y.conj())
    piE = space.project(E)
    eta = 1.0 / np.linalg.norm(piE)
    piG = space.project(G)
    inner = float(np.real(np.vdot(G, eta * piE)))
    return eps * G + delta * eta * piG - delta * eta * inner * (eta * piE)


def _reduced_flow(A, space, eps, delta, init: Rank1State, cfg: FlowConfig):
    """Splitting integration of the reduced rank-1 flow for the joint
    unstructured/structured stability problem."""
    from .rank1 import _split_step_vectors

    A = np.asarray(A)
    sel = rightmost()

    def assemble(state):
        E = state.matrix
        piE = space.project(E)
        eta = 1.0 / np.linalg.norm(piE)
        M = A + eps * E + delta * eta * piE
        return M, E, piE, eta

    state = init
    M, E, piE, eta = assemble(state)
    triple = target_eigentriple(M, sel)
    neigs = 1
    f_cur = -triple.lam.real
    h = cfg.h0
    status = "max-steps"
    h_last = 0.0

    for _ in range(cfg.max_steps):
        Gt = _reduced_gradient(space, state.matrix, triple, delta, eps)
        Gv = Gt @ state.v
        Gsu = Gt.conj().T @ state.u
        uGv = complex(state.u.conj() @ Gv)
        # decay rate of the reduced functional along the projected flow
        proj2 = (
            float(np.linalg.norm(Gv) ** 2 + np.linalg.norm(Gsu) ** 2)
            - abs(uGv) ** 2
        )
        g_k = max(triple.kappa * (proj2 - np.real(uGv) ** 2), 0.0)
        if np.sqrt(max(proj2 - np.real(uGv) ** 2, 0.0)) <= cfg.tol_stationary * max(
            1.0, np.linalg.norm(Gt)
        ):
            status = "converged"
            break

        h_k = h
        rejected = False
        collapsed = False
        while True:
            u1, v1 = _split_step_vectors(state.u, state.v, Gv, Gsu, h)
            cand = Rank1State(u1, v1)
            Mc = assemble(cand)[0]
            cand_triple = target_eigentriple(Mc, sel)
            neigs += 1
            f_new = -cand_triple.lam.real
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
        h_next = min(max(h_next, cfg.h_min), cfg.h_max)
        converged = abs(f_new - f_cur) <= cfg.tol_stationary
        state, triple, h_last = cand, cand_triple, h
        f_cur, h = f_new, h_next
        if converged:
            status = "converged"
            break

    return state, triple, f_cur, status, neigs, h_last


def eps_stability_radius(
    A: np.ndarray,
    space: st.StructureSpace,
    eps: float | None = None,
    delta: float | None = None,
    cfg: OuterConfig = OuterConfig(),
) -> SolveReport:
    """Structured stability radius of the eps-pseudospectrum.

    With ``eps`` given, finds the largest structured perturbation size
    ``delta`` keeping the complex eps-pseudospectrum of all perturbed
    matrices in the closed left half-plane (the smallest root of
    ``phi(delta, eps) = 0``); with ``delta`` given, solves for ``eps``.
    The inner problem is the reduced rank-1 flow whose stationary
    gradient collapses to ``eps * (-x y*)``; the outer derivative is
    ``-kappa ||Pi_S(x y*)||`` in ``delta`` and ``-kappa`` in ``eps``.
    """
    A = np.asarray(A)
    if (eps is None) == (delta is None):
        raise ValueError("exactly one of eps and delta must be given")
    solve_for = "delta" if delta is None else "eps"
    lam = np.linalg.eigvals(A)
    if np.max(lam.real) >= 0:
        raise NotStableError("matrix is not Hurwitz stable")

    triple0 = target_eigentriple(A, rightmost())
    state0 = Rank1State.from_vectors(triple0.x, triple0.y)

    def evaluate(z, warm):
        init = warm if warm is not None else state0
        d, e = (z, eps) if solve_for == "delta" else (delta, z)
        state, triple, f, status, neigs, h_last = _reduced_flow(
            A, space, e, d, init, cfg.inner
        )
        piXY = space.project(np.outer(triple.x, triple.y.conj()))
        slope_d = -triple.kappa * float(np.linalg.norm(piXY))
        slope_e = -triple.kappa
        Gt = _reduced_gradient(space, state.matrix, triple, d, e)
        gerr = float(
            np.linalg.norm(Gt + e * np.outer(triple.x, triple.y.conj()))
        )
        slope = slope_d if solve_for == "delta" else slope_e
        return InnerEval(
            f, slope, state, neigs, h_last, extras={"gradprop_residual": gerr}
        )

    # formal first Newton step from the unperturbed rightmost eigenvalue
    if cfg.eps0 is not None:
        z0 = cfg.eps0
    else:
        piXY0 = space.project(np.outer(triple0.x, triple0.y.conj()))
        denom = (
            float(np.linalg.norm(piXY0)) if solve_for == "delta" else 1.0
        )
        base = -triple0.lam.real - (eps if solve_for == "delta" else delta or 0.0)
        z0 = max(triple0.xy * base / denom, 1e-6)

    report = newton_bisection(evaluate, 0.0, cfg, z0)
    report.extras["solve_for"] = solve_for
    # expose the structured perturbation Delta = delta * Pi_S(E)/||Pi_S(E)||
    if report.state is not None:
        E = report.state.matrix
        piE = space.project(E)
        d_star = report.eps_star if solve_for == "delta" else delta
        e_star = eps if solve_for == "delta" else report.eps_star
        report.perturbation = d_star * piE / np.linalg.norm(piE)
        # at a converged stationary point the reduced gradient collapses
        # to eps times the plain gradient; record the residual
        M = A + e_star * E + d_star * piE / np.linalg.norm(piE)
        triple = target_eigentriple(M, rightmost())
        Gt = _reduced_gradient(space, E, triple, d_star, e_star)
        report.extras["gradprop_residual"] = float(
            np.linalg.norm(Gt + e_star * np.outer(triple.x, triple.y.conj()))
        )
    return report
