"""Objective functionals of a target eigenvalue.

Every objective is a smooth real-valued function ``f(lam, conj(lam))``
symmetric under conjugation of its arguments.  The quantity that drives
all gradients is ``two_f_bar = 2 * df/d(conj(lam))``; the free gradient of
the eigenvalue functional is the rank-1 matrix ``two_f_bar * x y*``.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = [
    "Objective",
    "neg_real_part",
    "neg_half_modulus_squared",
    "distance_squared_to",
    "modulus",
]

#: gradients with Frobenius norm below this are flagged degenerate
DEGENERATE_TOL = 1e-14


@dataclass(frozen=True)
class Objective:
    """A functional ``f`` with its anti-holomorphic derivative.

    ``kind`` is one of ``neg-real-part``, ``neg-half-modulus-squared``,
    ``distance-squared-to`` or ``modulus``; ``mu`` is the reference point
    of ``distance-squared-to``.
    """

    kind: str
    mu: complex = 0j

    def value(self, lam: complex) -> float:
        if self.kind == "neg-real-part":
            return -lam.real
        if self.kind == "neg-half-modulus-squared":
            return -0.5 * abs(lam) ** 2
        if self.kind == "distance-squared-to":
            return abs(lam - self.mu) ** 2
        if self.kind == "modulus":
            return abs(lam)
        raise ValueError(f"unknown objective kind {self.kind!r}")

    def two_f_bar(self, lam: complex) -> complex:
        """``2 df/d(conj(lam))`` evaluated at ``lam``."""
        if self.kind == "neg-real-part":
            return -1.0 + 0j
        if self.kind == "neg-half-modulus-squared":
            return -lam
        if self.kind == "distance-squared-to":
            return 2.0 * (lam - self.mu)
        if self.kind == "modulus":
            if abs(lam) == 0.0:
                return 0j
            return lam / abs(lam)
        raise ValueError(f"unknown objective kind {self.kind!r}")


def neg_real_part() -> Objective:
    """``f = -Re(lam)``; maximizes the real part (abscissa problems)."""
    return Objective("neg-real-part")


def neg_half_modulus_squared() -> Objective:
    """``f = -|lam|^2 / 2``; maximizes the modulus (radius problems)."""
    return Objective("neg-half-modulus-squared")


def distance_squared_to(mu: complex) -> Objective:
    """``f = |lam - mu|^2``; pulls the eigenvalue toward ``mu``."""
    return Objective("distance-squared-to", complex(mu))


def modulus() -> Objective:
    """``f = |lam|``; minimized to drive an eigenvalue to zero."""
    return Objective("modulus")
