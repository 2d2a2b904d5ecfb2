import numpy as np
import pytest

import matnear as mn
from matnear.linalg import GAP_TOL

from conftest import EXAMPLE8


def random_complex(rng, n, m=None):
    m = m or n
    return rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))


class TestTargetSelection:
    def test_rightmost_diagonal(self):
        A = np.diag([-1.0, -2.0 + 3.0j])
        t = mn.target_eigentriple(A, mn.rightmost())
        assert t.lam == pytest.approx(-1.0)
        assert np.allclose(t.x, [1, 0])
        assert np.allclose(t.y, [1, 0])

    def test_largest_modulus_diagonal(self):
        t = mn.target_eigentriple(np.diag([-1.0, -2.0]), mn.largest_modulus())
        assert t.lam == pytest.approx(-2.0)

    def test_smallest_modulus_and_nearest(self):
        A = np.diag([3.0, 1.0, -5.0])
        assert mn.target_eigentriple(A, mn.smallest_modulus()).lam == pytest.approx(1.0)
        assert mn.target_eigentriple(A, mn.nearest_to(4.0)).lam == pytest.approx(3.0)

    def test_tie_break_larger_imaginary_part(self):
        A = np.diag([1.0 + 1.0j, 1.0 - 1.0j])
        t = mn.target_eigentriple(A, mn.rightmost())
        assert t.lam.imag > 0

    def test_rightmost_matches_full_spectrum(self, example8):
        t = mn.target_eigentriple(example8, mn.rightmost())
        lam = np.linalg.eigvals(example8)
        assert t.lam.real == pytest.approx(np.max(lam.real), abs=1e-12)

    def test_deterministic(self, example8):
        t1 = mn.target_eigentriple(example8, mn.rightmost())
        t2 = mn.target_eigentriple(example8.copy(), mn.rightmost())
        assert t1.lam == t2.lam
        assert t1.x.tobytes() == t2.x.tobytes()
        assert t1.y.tobytes() == t2.y.tobytes()


class TestEigenTripleInvariants:
    @pytest.mark.parametrize("seed", range(5))
    def test_normalization_and_residuals(self, seed):
        rng = np.random.default_rng(seed)
        A = random_complex(rng, 6)
        t = mn.target_eigentriple(A, mn.rightmost())
        assert abs(np.linalg.norm(t.x) - 1) < 1e-12
        assert abs(np.linalg.norm(t.y) - 1) < 1e-12
        s = t.x.conj() @ t.y
        assert s.real > 0
        assert abs(s.imag) <= 1e-12 * abs(s)
        r_right, r_left = t.residuals(A)
        scale = np.linalg.norm(A)
        assert r_right <= 1e-10 * scale
        assert r_left <= 1e-10 * scale

    def test_phase_convention(self, rng):
        A = random_complex(rng, 5)
        t = mn.target_eigentriple(A, mn.rightmost())
        j = int(np.argmax(np.abs(t.y)))
        assert t.y[j].real > 0
        assert abs(t.y[j].imag) < 1e-12

    def test_defective_raises(self):
        # Jordan block: left/right eigenvectors orthogonal
        J = np.array([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(mn.DefectiveTargetError):
            mn.target_eigentriple(J, mn.rightmost())


class TestEigenvalueDerivative:
    def test_unit_direction(self):
        A = np.diag([-1.0, -2.0])
        t = mn.target_eigentriple(A, mn.rightmost())
        Adot = np.zeros((2, 2))
        Adot[0, 0] = 1.0
        assert mn.eigenvalue_derivative(t, Adot) == pytest.approx(1.0)
        assert mn.eigenvalue_derivative(t, np.zeros((2, 2))) == 0

    @pytest.mark.parametrize("seed", range(4))
    def test_matches_central_difference(self, seed):
        rng = np.random.default_rng(100 + seed)
        A = random_complex(rng, 5)
        Adot = random_complex(rng, 5)
        t = mn.target_eigentriple(A, mn.rightmost())
        d = mn.eigenvalue_derivative(t, Adot)
        h = 1e-6
        sel = mn.nearest_to(t.lam)
        lp = mn.target_eigentriple(A + h * Adot, sel).lam
        lm = mn.target_eigentriple(A - h * Adot, sel).lam
        fd = (lp - lm) / (2 * h)
        assert abs(d - fd) <= 1e-5 * max(1.0, abs(fd))


class TestSingularValueDerivative:
    def test_unit_direction(self):
        M = np.diag([3.0, 1.0])
        trip = mn.smallest_singular_triplet(M)
        Mdot = np.zeros((2, 2))
        Mdot[1, 1] = 1.0
        assert mn.singular_value_derivative(trip, Mdot) == pytest.approx(1.0)

    def test_skew_pairing_gives_zero(self):
        M = np.diag([3.0, 1.0])
        trip = mn.smallest_singular_triplet(M)
        # u* Mdot v purely imaginary
        Mdot = 1j * np.outer(trip.u, trip.v.conj())
        assert mn.singular_value_derivative(trip, Mdot) == pytest.approx(0.0, abs=1e-14)

    @pytest.mark.parametrize("seed", range(4))
    def test_matches_central_difference(self, seed):
        rng = np.random.default_rng(200 + seed)
        M = random_complex(rng, 4)
        Mdot = random_complex(rng, 4)
        trip = mn.smallest_singular_triplet(M)
        d = mn.singular_value_derivative(trip, Mdot)
        h = 1e-6
        sp = np.linalg.svd(M + h * Mdot, compute_uv=False)[-1]
        sm = np.linalg.svd(M - h * Mdot, compute_uv=False)[-1]
        fd = (sp - sm) / (2 * h)
        assert abs(d - fd) <= 1e-5 * max(1.0, abs(fd))


class TestGroupInverse:
    def test_diagonal(self):
        Z = mn.group_inverse(np.diag([0.0, 2.0]))
        assert np.allclose(Z, np.diag([0.0, 0.5]), atol=1e-14)

    def test_upper_triangular(self):
        N = np.array([[0.0, 1.0], [0.0, 3.0]])
        Z = mn.group_inverse(N)
        assert np.allclose(Z, [[0.0, 1.0 / 9.0], [0.0, 1.0 / 3.0]], atol=1e-14)
        for lhs, rhs in ((N @ Z, Z @ N), (Z @ N @ Z, Z), (N @ Z @ N, N)):
            assert np.linalg.norm(lhs - rhs) <= 1e-12 * max(1.0, np.linalg.norm(N))

    def test_defining_identities_random(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            n = int(rng.integers(3, 7))
            V = random_complex(rng, n) + 2 * np.eye(n)
            d = np.concatenate([[0.0], rng.uniform(0.5, 3.0, n - 1)])
            N = V @ np.diag(d) @ np.linalg.inv(V)
            Z = mn.group_inverse(N)
            scale = np.linalg.norm(N)
            assert np.linalg.norm(N @ Z - Z @ N) <= 1e-10 * scale
            assert np.linalg.norm(Z @ N @ Z - Z) <= 1e-10 * max(np.linalg.norm(Z), 1)
            assert np.linalg.norm(N @ Z @ N - N) <= 1e-10 * scale
            t = mn.target_eigentriple(N, mn.smallest_modulus())
            assert np.linalg.norm(Z @ t.y) <= 1e-10 * np.linalg.norm(Z)
            assert np.linalg.norm(t.x.conj() @ Z) <= 1e-10 * np.linalg.norm(Z)

    def test_zero_not_simple(self):
        with pytest.raises(mn.ZeroNotSimpleError):
            mn.group_inverse(np.diag([0.0, 1e-14, 1.0]))


class TestEigenvectorDerivative:
    def test_zero_direction(self):
        A = np.diag([-1.0, -2.0])
        t = mn.target_eigentriple(A, mn.rightmost())
        xdot, ydot = mn.eigenvector_derivative(A, t, np.zeros((2, 2)))
        assert np.allclose(xdot, 0)
        assert np.allclose(ydot, 0)

    @pytest.mark.parametrize("seed", range(4))
    def test_differentiated_eigenequation(self, seed):
        rng = np.random.default_rng(300 + seed)
        A = random_complex(rng, 5)
        Adot = random_complex(rng, 5)
        t = mn.target_eigentriple(A, mn.rightmost())
        lamdot = mn.eigenvalue_derivative(t, Adot)
        xdot, ydot = mn.eigenvector_derivative(A, t, Adot)
        # d/dt of (A y - lam y) = 0
        resid = Adot @ t.y + A @ ydot - lamdot * t.y - t.lam * ydot
        assert np.linalg.norm(resid) <= 1e-8 * np.linalg.norm(A)
        # norm preservation and reality of d/dt(x*y)
        assert abs(np.real(t.x.conj() @ xdot)) <= 1e-10
        assert abs(np.real(t.y.conj() @ ydot)) <= 1e-10
        dxy = xdot.conj() @ t.y + t.x.conj() @ ydot
        assert abs(np.imag(dxy)) <= 1e-8

    def test_matches_projector_difference(self, rng):
        # yy* is phase-free, so its finite difference checks ydot
        A = random_complex(rng, 5)
        Adot = random_complex(rng, 5)
        t = mn.target_eigentriple(A, mn.rightmost())
        _, ydot = mn.eigenvector_derivative(A, t, Adot)
        h = 1e-6
        sel = mn.nearest_to(t.lam)
        yp = mn.target_eigentriple(A + h * Adot, sel).y
        ym = mn.target_eigentriple(A - h * Adot, sel).y
        fd = (np.outer(yp, yp.conj()) - np.outer(ym, ym.conj())) / (2 * h)
        an = np.outer(ydot, t.y.conj()) + np.outer(t.y, ydot.conj())
        assert np.linalg.norm(fd - an) <= 1e-5 * max(1.0, np.linalg.norm(an))


class TestSmallestSingularTriplet:
    def test_diagonal(self):
        trip = mn.smallest_singular_triplet(np.diag([3.0, 1.0]))
        assert trip.sigma == pytest.approx(1.0)
        assert abs(abs(trip.u[1]) - 1) < 1e-14
        assert abs(abs(trip.v[1]) - 1) < 1e-14

    def test_unitary(self, rng):
        Q, _ = np.linalg.qr(random_complex(rng, 5))
        trip = mn.smallest_singular_triplet(Q)
        assert trip.sigma == pytest.approx(1.0, abs=1e-12)

    def test_matches_full_svd(self, rng):
        M = random_complex(rng, 6)
        trip = mn.smallest_singular_triplet(M)
        s = np.linalg.svd(M, compute_uv=False)
        assert trip.sigma == pytest.approx(s[-1], abs=1e-12)
        assert np.linalg.norm(M @ trip.v - trip.sigma * trip.u) <= 1e-12 * s[0]
        assert np.linalg.norm(trip.u.conj() @ M - trip.sigma * trip.v.conj()) <= 1e-12 * s[0]
