"""Dense eigenvalue/singular-value kernels used by every flow.

Provides normalized eigentriples for a selectable target eigenvalue,
first-order derivative formulas for eigenvalues, singular values and
eigenvectors, and the group inverse needed by the eigenvector derivative.
All operations are pure functions of their inputs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import (
    DefectiveTargetError,
    NearDefectiveWarning,
    ZeroNotSimpleError,
)

__all__ = [
    "EigenTriple",
    "SingularTriplet",
    "TargetSelector",
    "rightmost",
    "largest_modulus",
    "smallest_modulus",
    "nearest_to",
    "target_eigentriple",
    "eigenvalue_derivative",
    "singular_value_derivative",
    "group_inverse",
    "eigenvector_derivative",
    "smallest_singular_triplet",
]

#: x*y below this is treated as numerically defective.
DEFECTIVE_TOL = 1e-12

#: Relative gap below which a warning about near-multiplicity is issued.
GAP_TOL = 1e-10


@dataclass(frozen=True)
class EigenTriple:
    """Simple eigenvalue with unit-norm left/right eigenvectors.

    The pair is normalized so that ``x*y`` is real and positive, and the
    common phase is fixed so the largest-modulus entry of ``y`` is real
    positive.  ``kappa = 1/(x*y)`` is the eigenvalue condition number.
    """

    lam: complex
    x: np.ndarray
    y: np.ndarray

    @property
    def xy(self) -> float:
        return float(np.real(self.x.conj() @ self.y))

    @property
    def kappa(self) -> float:
        return 1.0 / self.xy

    def residuals(self, M: np.ndarray) -> tuple[float, float]:
        """Right and left eigen-residual norms for the matrix ``M``."""
        r_right = np.linalg.norm(M @ self.y - self.lam * self.y)
        r_left = np.linalg.norm(self.x.conj() @ M - self.lam * self.x.conj())
        return float(r_right), float(r_left)


@dataclass(frozen=True)
class SingularTriplet:
    """Singular value with unit-norm left/right singular vectors."""

    sigma: float
    u: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class TargetSelector:
    """Deterministic rule that picks one eigenvalue out of a spectrum.

    ``kind`` is one of ``rightmost-real-part``, ``largest-modulus``,
    ``smallest-modulus`` or ``nearest-to-point`` (the latter uses ``mu``).
    Ties on the primary key are broken by larger imaginary part, then by
    larger real part, so the selection is a total order.
    """

    kind: str
    mu: complex = 0j

    def primary_key(self, lam: np.ndarray) -> np.ndarray:
        lam = np.asarray(lam)
        if self.kind == "rightmost-real-part":
            return lam.real
        if self.kind == "largest-modulus":
            return np.abs(lam)
        if self.kind == "smallest-modulus":
            return -np.abs(lam)
        if self.kind == "nearest-to-point":
            return -np.abs(lam - self.mu)
        raise ValueError(f"unknown selector kind {self.kind!r}")

    def select(self, lam: np.ndarray) -> int:
        """Index of the selected eigenvalue (maximal key triple)."""
        lam = np.asarray(lam)
        keys = np.stack([self.primary_key(lam), lam.imag, lam.real])
        # lexsort sorts by the last key first; take the maximum.
        order = np.lexsort(keys[::-1])
        return int(order[-1])


def rightmost() -> TargetSelector:
    return TargetSelector("rightmost-real-part")


def largest_modulus() -> TargetSelector:
    return TargetSelector("largest-modulus")


def smallest_modulus() -> TargetSelector:
    return TargetSelector("smallest-modulus")


def nearest_to(mu: complex) -> TargetSelector:
    return TargetSelector("nearest-to-point", complex(mu))


def _fix_phases(lam: complex, x: np.ndarray, y: np.ndarray) -> EigenTriple:
    """Normalize and phase-fix an eigenvector pair.

    Enforces ``x*y`` real positive, then rotates both vectors by a common
    unit scalar so the largest-modulus entry of ``y`` is real positive.
    """
    x = x / np.linalg.norm(x)
    y = y / np.linalg.norm(y)
    s = x.conj() @ y
    if abs(s) < DEFECTIVE_TOL:
        raise DefectiveTargetError(
            f"eigenvalue {lam} numerically defective: |x*y| = {abs(s):.3e}"
        )
    x = x * (s / abs(s))
    j = int(np.argmax(np.abs(y)))
    c = np.conj(y[j]) / abs(y[j])
    return EigenTriple(complex(lam), x * c, y * c)


def target_eigentriple(M: np.ndarray, sel: TargetSelector) -> EigenTriple:
    """Eigentriple of the selected target eigenvalue of ``M``.

    Dense eigendecomposition with paired left eigenvectors; the result is
    deterministic for identical input bytes.  Warns if the selected
    eigenvalue is close to another one (gap below ``1e-10 * ||M||_F``)
    and raises :class:`DefectiveTargetError` if ``|x*y|`` is tiny.
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    lam, vl, vr = sla.eig(M, left=True, right=True)
    idx = sel.select(lam)
    if M.shape[0] > 1:
        others = np.delete(lam, idx)
        gap = np.min(np.abs(others - lam[idx]))
        if gap < GAP_TOL * max(1.0, np.linalg.norm(M)):
            # stable message so repeated occurrences deduplicate
            warnings.warn(
                "target eigenvalue is numerically close to another one; "
                "eigenvector accuracy may degrade",
                NearDefectiveWarning,
                stacklevel=2,
            )
    return _fix_phases(lam[idx], vl[:, idx], vr[:, idx])


def eigenvalue_derivative(triple: EigenTriple, Adot: np.ndarray) -> complex:
    """Derivative of a simple eigenvalue along the matrix direction ``Adot``.

    Returns ``x* Adot y / (x*y)``.
    """
    return complex(triple.x.conj() @ Adot @ triple.y) / triple.xy


def singular_value_derivative(trip: SingularTriplet, Mdot: np.ndarray) -> float:
    """Derivative of a simple singular value: ``Re(u* Mdot v)``."""
    return float(np.real(trip.u.conj() @ Mdot @ trip.v))


def _null_pair(N: np.ndarray) -> EigenTriple:
    """Eigentriple for the (assumed simple) zero eigenvalue of ``N``."""
    return target_eigentriple(N, smallest_modulus())


def group_inverse(N: np.ndarray, triple: EigenTriple | None = None) -> np.ndarray:
    """Group inverse of a matrix with a simple zero eigenvalue.

    Computed as ``Pi N^+ Pi`` with the spectral projection
    ``Pi = I - kappa y x*`` and the Moore-Penrose pseudoinverse taken with
    the smallest singular value dropped (it is the numerical zero).  The
    result Z satisfies ``NZ = ZN``, ``ZNZ = Z`` and ``NZN = N``, as well
    as ``Zy = 0`` and ``x*Z = 0``.
    """
    N = np.asarray(N, dtype=complex)
    n = N.shape[0]
    U, s, Vh = np.linalg.svd(N)
    if n >= 2 and s[-2] < 1e-10 * max(1.0, np.linalg.norm(N)):
        raise ZeroNotSimpleError(
            f"second-smallest singular value {s[-2]:.3e} too small: "
            "zero eigenvalue not numerically simple"
        )
    if triple is None:
        triple = _null_pair(N)
    sinv = np.zeros(n)
    sinv[: n - 1] = 1.0 / s[: n - 1]
    pinv = (Vh.conj().T * sinv) @ U.conj().T
    proj = np.eye(n) - triple.kappa * np.outer(triple.y, triple.x.conj())
    return proj @ pinv @ proj


def eigenvector_derivative(
    A: np.ndarray, triple: EigenTriple, Adot: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Derivatives of the normalized left/right eigenvectors.

    With ``Z`` the group inverse of ``A - lam I``,

        ``ydot = -Z Adot y + Re(y* Z Adot y) y``
        ``xdot* = -x* Adot Z + Re(x* Adot Z x) x*``

    which preserve the unit norms and keep ``x*y`` real.
    """
    n = A.shape[0]
    shifted = EigenTriple(0j, triple.x, triple.y)
    Z = group_inverse(np.asarray(A, dtype=complex) - triple.lam * np.eye(n), shifted)
    x, y = triple.x, triple.y
    ZAy = Z @ (Adot @ y)
    ydot = -ZAy + np.real(y.conj() @ ZAy) * y
    xAZ = (x.conj() @ Adot) @ Z
    xdot = -xAZ.conj() + np.real(xAZ @ x) * x
    return xdot, ydot


def smallest_singular_triplet(M: np.ndarray) -> SingularTriplet:
    """Smallest singular value of ``M`` with its singular vectors.

    The common phase of ``(u, v)`` is fixed so the largest-modulus entry
    of ``v`` is real positive.
    """
    M = np.asarray(M)
    U, s, Vh = np.linalg.svd(M)
    u = U[:, -1]
    v = Vh[-1, :].conj()
    j = int(np.argmax(np.abs(v)))
    c = np.conj(v[j]) / abs(v[j])
    return SingularTriplet(float(s[-1]), u * c, v * c)
