"""Pseudospectrum membership, abscissa algorithms and boundary tracers.

The complex eps-pseudospectrum is the sublevel set
``{z : sigma_min(A - z I) <= eps}``; its boundary is the level set.  For
rank-1 perturbations the Frobenius and 2-norm versions coincide, so a
single code path serves both norms.  Abscissa solvers: the criss-cross
method (vertical/horizontal level-set searches through a Hamiltonian
eigenvalue correspondence), fixed-point iterations on rank-1
perturbations (plain and monotone), and the discretized rank-1 flow from
:mod:`matnear.rank1`.  Boundary tracers: a tangential-transversal
predictor/corrector and a ladder of nearest-point problems; the ladder
extends verbatim to structured pseudospectra.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    NoImaginaryCrossingError,
    NotOnBoundaryError,
    TangentUndefinedError,
)
from .linalg import (
    EigenTriple,
    nearest_to,
    rightmost,
    smallest_singular_triplet,
    target_eigentriple,
)
from .objectives import distance_squared_to, neg_real_part
from .rank1 import (
    FlowConfig,
    Rank1State,
    _split_step_vectors,
    free_gradient,
    run_rank1_flow,
)
from .structured import StructuredRank1State, run_structured_flow

__all__ = [
    "BoundaryPoint",
    "CrissCrossTrace",
    "in_pseudospectrum",
    "byers_hamiltonian",
    "crisscross_abscissa",
    "rank1_abscissa",
    "extremal_perturbation",
    "boundary_normal",
    "boundary_point_at",
    "trace_boundary",
]


def _sigma_min(A: np.ndarray, z: complex) -> float:
    n = A.shape[0]
    return float(np.linalg.svd(A - z * np.eye(n), compute_uv=False)[-1])


def in_pseudospectrum(A: np.ndarray, eps: float, lam: complex) -> bool:
    """Membership test ``sigma_min(A - lam I) <= eps``."""
    return _sigma_min(np.asarray(A), complex(lam)) <= eps


def byers_hamiltonian(A: np.ndarray, alpha: float, eps: float) -> np.ndarray:
    """Hamiltonian matrix whose imaginary eigenvalues ``i*beta`` mark the
    points where ``eps`` is a singular value of ``A - (alpha + i beta) I``."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    shifted = A - alpha * np.eye(n)
    return np.block(
        [
            [-shifted.conj().T, eps * np.eye(n)],
            [-eps * np.eye(n), shifted],
        ]
    )


@dataclass
class CrissCrossTrace:
    alphas: list = field(default_factory=list)
    verticals: list = field(default_factory=list)
    horizontals: list = field(default_factory=list)


def _imag_eigs(H: np.ndarray) -> np.ndarray:
    """Imaginary parts of the numerically purely imaginary eigenvalues.

    Double imaginary eigenvalues (level-set tangencies) split off the axis
    by the square root of the rounding level, so the detection threshold
    is loose; callers discard false positives with a singular-value test.
    """
    w = np.linalg.eigvals(H)
    tol = 1e-6 * max(1.0, np.linalg.norm(H) / np.sqrt(H.shape[0]))
    return np.sort(w[np.abs(w.real) <= tol].imag)


def crisscross_abscissa(
    A: np.ndarray, eps: float, tol: float = 1e-10, max_iters: int = 60
) -> tuple[float, CrissCrossTrace]:
    """Pseudospectral abscissa by alternating vertical/horizontal searches.

    The vertical search collects all boundary crossings of the line
    ``Re z = alpha_k`` (imaginary Hamiltonian eigenvalues filtered so that
    ``eps`` is the smallest singular value there); the horizontal search
    pushes the midpoint of each inner segment to the rightmost crossing of
    its horizontal line.  The iterates increase monotonically and converge
    to the abscissa, quadratically where the boundary is regular.
    """
    A = np.asarray(A)
    n = A.shape[0]
    filter_tol = 1e-8 * max(1.0, np.linalg.norm(A))
    trace = CrissCrossTrace()
    lam0 = np.linalg.eigvals(A)
    alpha = float(np.max(lam0.real))
    trace.alphas.append(alpha)

    for _ in range(max_iters):
        betas = _imag_eigs(byers_hamiltonian(A, alpha, eps))
        betas = np.array(
            [b for b in betas if abs(_sigma_min(A, alpha + 1j * b) - eps) <= filter_tol]
        )
        # deduplicate coincident crossings
        kept = []
        for b in betas:
            if not kept or b - kept[-1] > 1e-12 * max(1.0, abs(b)):
                kept.append(float(b))
        betas = kept
        trace.verticals.append(betas)
        if not betas:
            if len(trace.alphas) == 1:
                raise NoImaginaryCrossingError(
                    "vertical line through the spectral abscissa does not "
                    "meet the level set"
                )
            break

        candidates = []
        for j in range(len(betas) - 1):
            mid = 0.5 * (betas[j] + betas[j + 1])
            if _sigma_min(A, alpha + 1j * mid) <= eps + filter_tol:
                imag = _imag_eigs(byers_hamiltonian(1j * A, -mid, eps))
                crossings = [
                    float(a)
                    for a in imag
                    if abs(_sigma_min(A, a + 1j * mid) - eps) <= filter_tol
                ]
                if crossings:
                    candidates.append(max(crossings))
        trace.horizontals.append(candidates)
        if not candidates:
            break
        alpha_new = max(candidates)
        trace.alphas.append(alpha_new)
        if alpha_new - alpha <= tol:
            alpha = max(alpha, alpha_new)
            break
        alpha = alpha_new

    return alpha, trace


@dataclass
class Rank1IterResult:
    r: float
    state: Rank1State
    triple: EigenTriple
    trace: list
    status: str
    neigs: int = 0


def rank1_abscissa(
    A: np.ndarray,
    eps: float,
    mode: str = "monotone",
    tol: float = 1e-12,
    max_iters: int = 500,
    start: Rank1State | None = None,
) -> Rank1IterResult:
    """Pseudospectral abscissa by fixed-point iteration on rank-1 states.

    ``plain`` replaces the perturbation by the outer product of the
    current eigenvectors each step (may oscillate; capped and reported
    with status ``stagnated``).  ``monotone`` interpolates between the
    current factors and the eigenvectors, scaled so that the larger of
    ``u*x``, ``v*y`` is real positive, and halves the interpolation
    parameter until the real part increases by at least half the predicted
    initial slope ``eps*kappa*(1 - Re(conj(a) b))*(Re a + Re b)``.
    """
    A = np.asarray(A)
    sel = rightmost()
    if start is None:
        t0 = target_eigentriple(A, sel)
        state = Rank1State.from_vectors(t0.x, t0.y)
    else:
        state = start
    triple = target_eigentriple(A + eps * state.matrix, sel)
    neigs = 1
    r_prev = -np.inf
    r_cur = triple.lam.real
    trace = [(0, triple.lam)]
    status = "stagnated"

    for k in range(1, max_iters + 1):
        if r_cur - r_prev <= tol and k > 1:
            status = "converged"
            break
        x, y = triple.x, triple.y
        if mode == "plain":
            state = Rank1State.from_vectors(x, y)
            triple = target_eigentriple(A + eps * state.matrix, sel)
            neigs += 1
        elif mode == "monotone":
            u, v = state.u, state.v
            alpha = complex(u.conj() @ x)
            beta = complex(v.conj() @ y)
            # common phase making the larger overlap real positive
            big = alpha if abs(alpha) >= abs(beta) else beta
            if abs(big) > 0:
                c = np.conj(big) / abs(big)
                x, y = c * x, c * y
                alpha, beta = c * alpha, c * beta
            slope = (
                eps
                * triple.kappa
                * (1.0 - np.real(np.conj(alpha) * beta))
                * (alpha.real + beta.real)
            )
            t = 1.0
            lam0 = triple.lam
            while t > 1e-14:
                p = t * x + (1 - t) * u
                q = t * y + (1 - t) * v
                cand = Rank1State.from_vectors(p, q)
                cand_triple = target_eigentriple(A + eps * cand.matrix, sel)
                neigs += 1
                if cand_triple.lam.real > lam0.real + 0.5 * t * slope:
                    state, triple = cand, cand_triple
                    break
                t /= 2.0
            else:
                status = "converged"
                break
        else:
            raise ValueError(f"unknown mode {mode!r}")
        r_prev, r_cur = r_cur, triple.lam.real
        trace.append((k, triple.lam))
    else:
        status = "stagnated" if mode == "plain" else status

    return Rank1IterResult(r_cur, state, triple, trace, status, neigs)


def extremal_perturbation(
    A: np.ndarray, eps: float, lam: complex, tol: float = 1e-8
) -> np.ndarray:
    """Minimal-norm perturbation realizing the boundary point ``lam``.

    Requires ``sigma_min(A - lam I) = eps`` up to ``tol``; the result is
    the rank-1 matrix ``-eps u v*`` built from the smallest singular pair,
    so that ``lam`` is an eigenvalue of ``A + Delta``.
    """
    A = np.asarray(A)
    n = A.shape[0]
    trip = smallest_singular_triplet(A - lam * np.eye(n))
    if abs(trip.sigma - eps) > tol * max(1.0, np.linalg.norm(A)):
        raise NotOnBoundaryError(
            f"sigma_min = {trip.sigma:.6e} differs from eps = {eps:.6e}"
        )
    return -eps * np.outer(trip.u, trip.v.conj())


def boundary_normal(u: np.ndarray, v: np.ndarray) -> complex:
    """Outer normal ``|u*v| / (u*v)`` of the boundary at the point realized
    by the factors ``(u, v)``."""
    s = complex(np.dot(np.conj(u).ravel(), v.ravel()))
    if abs(s) < 1e-12:
        raise TangentUndefinedError("u*v is numerically zero")
    return abs(s) / s


@dataclass(frozen=True)
class BoundaryPoint:
    """A traced boundary point with its outer normal and realizing state."""

    lam: complex
    normal: complex
    state: object


def boundary_point_at(A: np.ndarray, eps: float, lam: complex, tol: float = 1e-8) -> BoundaryPoint:
    """Boundary point constructed from the extremal perturbation at ``lam``."""
    delta = extremal_perturbation(A, eps, lam, tol)
    # Delta = eps * u v* with u absorbing the sign
    trip = smallest_singular_triplet(np.asarray(A) - lam * np.eye(A.shape[0]))
    state = Rank1State.from_vectors(-trip.u, trip.v)
    return BoundaryPoint(complex(lam), boundary_normal(state.u, state.v), state)


def _tangential_step(A, eps, state, lam, h, sel_pad=None):
    """Splitting step for the rotated problem that moves the eigenvalue
    tangentially along the boundary; returns factors for the matrix
    ``zeta*A`` and the predicted eigenvalue."""
    zeta = complex(np.dot(np.conj(state.u).ravel(), state.v.ravel()))
    zeta = zeta / abs(zeta)
    B = 1j * zeta * np.asarray(A)
    ub = 1j * zeta * state.u
    vb = state.v
    triple = target_eigentriple(
        B + eps * np.outer(ub, vb.conj()), nearest_to(1j * zeta * lam)
    )
    # gradient of -Re(lam) for the rotated matrix: gamma = -1
    beta = complex(vb.conj() @ triple.y)
    alphabar = complex(triple.x.conj() @ ub)
    Gv = -np.conj(beta) * triple.x
    Gsu = -alphabar * triple.y
    u1, v1 = _split_step_vectors(ub, vb, Gv, Gsu, h)
    return zeta, -1j * u1, v1


def _transversal_flow(A, eps, u, v, lam_guess, cfg):
    """Integrate the horizontal system until the tracked eigenvalue of
    ``A + eps u v*`` stops moving right; returns (state, triple, neigs)."""
    A = np.asarray(A)
    h = cfg.h0
    neigs = 0
    state = Rank1State.from_vectors(u, v)
    triple = target_eigentriple(A + eps * state.matrix, nearest_to(lam_guess))
    neigs += 1
    for _ in range(cfg.max_steps):
        x, y = triple.x, triple.y
        alpha = complex(state.u.conj() @ x)
        beta = complex(state.v.conj() @ y)
        slope = (
            eps
            * triple.kappa
            * (abs(alpha) ** 2 * (1 - abs(beta) ** 2) + abs(beta) ** 2 * (1 - abs(alpha) ** 2))
        )
        if slope <= cfg.tol_stationary:
            break
        moved = False
        while h >= cfg.h_min:
            du = (y.conj() @ state.v) * x - (alpha * (y.conj() @ state.v)) * state.u
            dv = (x.conj() @ state.u) * y - (beta * (x.conj() @ state.u)) * state.v
            cand = Rank1State.from_vectors(state.u + h * du, state.v + h * dv)
            cand_triple = target_eigentriple(
                A + eps * cand.matrix, nearest_to(triple.lam)
            )
            neigs += 1
            if cand_triple.lam.real > triple.lam.real:
                moved = abs(cand_triple.lam.real - triple.lam.real) > cfg.tol_stationary
                state, triple = cand, cand_triple
                h = min(h * cfg.theta, cfg.h_max)
                break
            h /= cfg.theta
        else:
            break
        if not moved:
            break
    return state, triple, neigs


def _trace_tt(A, eps, start, h, n_points, cfg, tol_boundary):
    points = []
    state, lam = start.state, start.lam
    for _ in range(n_points):
        zeta, u0, v0 = _tangential_step(A, eps, state, lam, h)
        C = zeta * np.asarray(A)
        state_c, triple_c, _ = _transversal_flow(
            C, eps, u0, v0, zeta * lam, cfg
        )
        lam = complex(triple_c.lam / zeta)
        state = Rank1State.from_vectors(state_c.u / zeta, state_c.v)
        points.append(
            BoundaryPoint(lam, boundary_normal(state.u, state.v), state)
        )
    return points


def _trace_ladder(A, eps, start, delta, n_points, cfg, direction, space=None):
    points = []
    state, lam = start.state, start.lam
    tang = 1j if direction == "left" else -1j
    for _ in range(n_points):
        d = delta
        for _attempt in range(20):
            if space is None:
                normal = boundary_normal(state.u, state.v)
            else:
                normal = boundary_normal(state.u, state.v)
            mu = lam + d * normal * (1.0 + tang)
            obj = distance_squared_to(mu)
            sel = nearest_to(mu)
            if space is None:
                res = run_rank1_flow(A, eps, obj, sel, state, cfg)
            else:
                res = run_structured_flow(A, eps, obj, sel, space, state, cfg)
            lam_new = res.triple.lam
            if abs(lam_new - mu) > 0.25 * d:
                break
            # mu fell inside the set (curvature too high): shrink the rung
            d /= 2.0
        state = res.state
        lam = lam_new
        points.append(BoundaryPoint(lam, (mu - lam) / abs(mu - lam), state))
    return points


def trace_boundary(
    A: np.ndarray,
    eps: float,
    start: BoundaryPoint,
    method: str = "ladder",
    step: float = 0.1,
    n_points: int = 20,
    space=None,
    direction: str = "right",
    cfg: FlowConfig | None = None,
    tol_boundary: float = 1e-9,
) -> list[BoundaryPoint]:
    """Trace consecutive boundary points starting from ``start``.

    ``tangential-transversal`` alternates a step tangential to the
    boundary with a horizontal flow back onto it (complex pseudospectra
    only).  ``ladder`` repeatedly computes the nearest boundary point to a
    control point offset along the outer normal plus a tangential
    component of size ``step``; with ``space`` given it traces the
    structured pseudospectrum instead, each point being realized by a
    structured perturbation of norm ``eps``.
    """
    cfg = cfg or FlowConfig(tol_stationary=min(tol_boundary, 1e-10), polish_steps=30)
    if method in ("tt", "tangential-transversal"):
        if space is not None:
            raise ValueError("tangential-transversal tracing is complex-only")
        h = step if direction == "right" else -step
        return _trace_tt(np.asarray(A), eps, start, h, n_points, cfg, tol_boundary)
    if method == "ladder":
        return _trace_ladder(
            np.asarray(A), eps, start, step, n_points, cfg, direction, space
        )
    raise ValueError(f"unknown tracing method {method!r}")
