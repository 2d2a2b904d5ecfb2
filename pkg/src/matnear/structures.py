"""Linear perturbation-structure spaces and their orthogonal projections.

A structure space is a complex- or real-linear subspace of square complex
matrices.  Its orthogonal projection (with respect to the real part of the
Frobenius inner product) is idempotent, self-adjoint and a contraction.
Real-linear spaces project complex input by taking the real part before
any structural averaging, so their members are returned as real arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegreeMismatchError, DimensionMismatchError

__all__ = [
    "SparsityPattern",
    "StructureSpace",
    "full_complex",
    "full_real",
    "sparse_complex",
    "sparse_real",
    "range_corange",
    "toeplitz_complex",
    "toeplitz_real",
    "hamiltonian_real",
    "sylvester_real",
    "sylvester_build",
    "sylvester_projection",
    "sylvester_coefficients",
]


@dataclass(frozen=True)
class SparsityPattern:
    """Sorted, deduplicated set of (row, col) index pairs."""

    indices: tuple[tuple[int, int], ...]

    @classmethod
    def from_pairs(cls, pairs) -> "SparsityPattern":
        return cls(tuple(sorted({(int(i), int(j)) for i, j in pairs})))

    @classmethod
    def from_matrix(cls, M: np.ndarray, tol: float = 0.0) -> "SparsityPattern":
        rows, cols = np.nonzero(np.abs(np.asarray(M)) > tol)
        return cls.from_pairs(zip(rows.tolist(), cols.tolist()))

    def mask(self, shape: tuple[int, int]) -> np.ndarray:
        m = np.zeros(shape, dtype=bool)
        for i, j in self.indices:
            if not (0 <= i < shape[0] and 0 <= j < shape[1]):
                raise DimensionMismatchError(
                    f"pattern index {(i, j)} outside shape {shape}"
                )
            m[i, j] = True
        return m


@dataclass(frozen=True)
class StructureSpace:
    """A structure space with a precomputed projection kernel.

    Use the module-level factory functions to construct instances; the
    ``project`` method applies the orthogonal projection.
    """

    kind: str
    n: int
    real: bool
    pattern: SparsityPattern | None = None
    _pb: np.ndarray | None = field(default=None, repr=False)
    _pc: np.ndarray | None = field(default=None, repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    def _check(self, Z: np.ndarray) -> np.ndarray:
        Z = np.asarray(Z)
        if Z.shape != self.shape:
            raise DimensionMismatchError(
                f"expected shape {self.shape}, got {Z.shape}"
            )
        return Z

    def project(self, Z: np.ndarray) -> np.ndarray:
        """Orthogonal projection of ``Z`` onto the space."""
        Z = self._check(Z)
        if self.real:
            Z = np.real(Z)
        kind = self.kind
        if kind in ("full-complex", "full-real"):
            return Z.copy()
        if kind in ("sparse-complex", "sparse-real"):
            out = np.zeros_like(Z)
            m = self.pattern.mask(self.shape)
            out[m] = Z[m]
            return out
        if kind == "range-corange":
            return self._pb @ Z @ self._pc
        if kind in ("toeplitz-complex", "toeplitz-real"):
            out = np.zeros_like(Z)
            n = self.n
            for k in range(-(n - 1), n):
                d = np.diagonal(Z, offset=k)
                out += np.diag(np.full(n - abs(k), d.mean()), k=k)
            return out
        if kind == "hamiltonian-real":
            d = self.n // 2
            J = np.block(
                [[np.zeros((d, d)), np.eye(d)], [-np.eye(d), np.zeros((d, d))]]
            )
            JZ = J @ Z
            return -J @ ((JZ + JZ.T) / 2.0)
        if kind == "sylvester-real":
            return sylvester_projection(Z)
        raise ValueError(f"unknown structure kind {kind!r}")

    def is_member(self, Z: np.ndarray, tol: float = 1e-12) -> bool:
        """True iff ``Z`` is within relative distance ``tol`` of the space."""
        Z = self._check(Z)
        nz = np.linalg.norm(Z)
        if nz == 0.0:
            return True
        return np.linalg.norm(Z - self.project(Z)) <= tol * nz


def full_complex(n: int) -> StructureSpace:
    return StructureSpace("full-complex", n, real=False)


def full_real(n: int) -> StructureSpace:
    return StructureSpace("full-real", n, real=True)


def sparse_complex(pattern: SparsityPattern, n: int) -> StructureSpace:
    return StructureSpace("sparse-complex", n, real=False, pattern=pattern)


def sparse_real(pattern: SparsityPattern, n: int) -> StructureSpace:
    return StructureSpace("sparse-real", n, real=True, pattern=pattern)


def range_corange(B: np.ndarray, C: np.ndarray) -> StructureSpace:
    """Space ``{B D C : D real k-by-l}`` for full-rank real ``B``, ``C``.

    The projectors ``B B^+`` and ``C^+ C`` are formed once here.
    """
    B = np.asarray(B, dtype=float)
    C = np.asarray(C, dtype=float)
    if B.ndim != 2 or C.ndim != 2 or B.shape[0] != C.shape[1]:
        raise DimensionMismatchError("B must be n-by-k and C l-by-n")
    pb = B @ np.linalg.pinv(B)
    pc = np.linalg.pinv(C) @ C
    return StructureSpace("range-corange", B.shape[0], real=True, _pb=pb, _pc=pc)


def toeplitz_complex(n: int) -> StructureSpace:
    return StructureSpace("toeplitz-complex", n, real=False)


def toeplitz_real(n: int) -> StructureSpace:
    return StructureSpace("toeplitz-real", n, real=True)


def hamiltonian_real(d: int) -> StructureSpace:
    """Real Hamiltonian matrices of size 2d (``J A`` symmetric)."""
    return StructureSpace("hamiltonian-real", 2 * d, real=True)


def sylvester_real(n: int) -> StructureSpace:
    """Real Sylvester matrices of two degree-n polynomials (size 2n)."""
    return StructureSpace("sylvester-real", 2 * n, real=True)


def sylvester_build(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Sylvester matrix of two degree-n coefficient vectors.

    Coefficients are given highest degree first; the leading coefficient
    of ``a`` must be nonzero.  Row block i of the result carries the
    coefficients of ``a`` shifted right by i, the lower block those of
    ``b``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 1 or b.ndim != 1 or a.size != b.size:
        raise DegreeMismatchError("coefficient vectors must have equal length")
    n = a.size - 1
    if n < 1:
        raise DegreeMismatchError("polynomial degree must be at least 1")
    if a[0] == 0.0:
        raise DegreeMismatchError("leading coefficient of the first polynomial is zero")
    S = np.zeros((2 * n, 2 * n))
    for i in range(n):
        S[i, i : i + n + 1] = a
        S[n + i, i : i + n + 1] = b
    return S


def _sylvester_coeff_means(Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    Z = np.asarray(Z)
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1] or Z.shape[0] % 2 != 0:
        raise DimensionMismatchError("Sylvester projection needs an even square matrix")
    n = Z.shape[0] // 2
    a = np.empty(n + 1)
    b = np.empty(n + 1)
    for k in range(n + 1):
        rows = np.arange(n)
        a[k] = np.mean(np.real(Z[rows, rows + k]))
        b[k] = np.mean(np.real(Z[n + rows, rows + k]))
    return a, b


def sylvester_projection(Z: np.ndarray) -> np.ndarray:
    """Orthogonal projection of a 2n-by-2n matrix onto Sylvester form.

    Each polynomial coefficient occupies n band positions; the projection
    replaces them by the mean of the real parts at those positions.
    """
    a, b = _sylvester_coeff_means(Z)
    return sylvester_build(a, b) if a[0] != 0.0 else _build_allow_zero(a, b)


def _build_allow_zero(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Same band layout as sylvester_build without the leading-coefficient check
    # (projections of arbitrary matrices may average to a zero leading entry).
    n = a.size - 1
    S = np.zeros((2 * n, 2 * n))
    for i in range(n):
        S[i, i : i + n + 1] = a
        S[n + i, i : i + n + 1] = b
    return S


def sylvester_coefficients(S: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient vectors (highest degree first) of a Sylvester matrix.

    Uses the band averages, so it is exact on members of the space and
    the least-squares fit otherwise.
    """
    return _sylvester_coeff_means(S)
