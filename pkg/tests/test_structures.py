import numpy as np
import pytest

import matnear as mn

from conftest import RANGE_B, CORANGE_C


def random_complex(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def all_spaces(n=6):
    pattern = mn.SparsityPattern.from_pairs(
        [(0, 0), (1, 2), (2, 1), (3, 3), (4, 0), (5, 5), (0, 4)]
    )
    return {
        "full-complex": mn.full_complex(n),
        "full-real": mn.full_real(n),
        "sparse-complex": mn.sparse_complex(pattern, n),
        "sparse-real": mn.sparse_real(pattern, n),
        "toeplitz-complex": mn.toeplitz_complex(n),
        "toeplitz-real": mn.toeplitz_real(n),
        "hamiltonian-real": mn.hamiltonian_real(n // 2),
        "sylvester-real": mn.sylvester_real(n // 2),
        "range-corange": mn.range_corange(
            np.arange(12, dtype=float).reshape(6, 2) + 1.0,
            np.arange(18, dtype=float).reshape(3, 6) - 4.0,
        ),
    }


class TestProjectionExamples:
    def test_full_real(self):
        Z = np.array([[1 + 1j, 2], [0, -1j]])
        out = mn.full_real(2).project(Z)
        assert np.allclose(out, [[1, 2], [0, 0]])

    def test_hamiltonian_small(self):
        Z = np.array([[1.0, 0.0], [0.0, 0.0]])
        out = mn.hamiltonian_real(1).project(Z)
        assert np.allclose(out, [[0.5, 0.0], [0.0, -0.5]])
        # J * projection is symmetric
        J = np.array([[0.0, 1.0], [-1.0, 0.0]])
        JP = J @ out
        assert np.allclose(JP, JP.T)

    def test_toeplitz_identity(self):
        out = mn.toeplitz_real(3).project(np.eye(3))
        assert np.allclose(out, np.eye(3))

    def test_range_corange_membership(self, rng):
        space = mn.range_corange(RANGE_B, CORANGE_C)
        D = rng.standard_normal((2, 3))
        member = RANGE_B @ D @ CORANGE_C
        assert np.allclose(space.project(member), member, atol=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(mn.DimensionMismatchError):
            mn.full_real(3).project(np.eye(4))


class TestProjectionProperties:
    @pytest.mark.parametrize("name", list(all_spaces().keys()))
    def test_idempotent_selfadjoint_contractive(self, name):
        space = all_spaces()[name]
        rng = np.random.default_rng(hash(name) % 2**32)
        n = space.n
        for _ in range(100):
            Z = random_complex(rng, n)
            W = random_complex(rng, n)
            PZ = space.project(Z)
            scale = max(1.0, np.linalg.norm(Z))
            assert np.linalg.norm(space.project(PZ) - PZ) <= 1e-12 * scale
            lhs = np.real(np.vdot(space.project(Z), W))
            rhs = np.real(np.vdot(Z, space.project(W)))
            assert abs(lhs - rhs) <= 1e-12 * scale * max(1.0, np.linalg.norm(W))
            assert np.linalg.norm(PZ) <= np.linalg.norm(Z) + 1e-12 * scale
            assert space.is_member(PZ, 1e-12) or np.linalg.norm(PZ) < 1e-13


class TestMembership:
    def test_full_real(self, rng):
        space = mn.full_real(4)
        assert space.is_member(rng.standard_normal((4, 4)))
        assert not space.is_member(1j * np.eye(4))

    def test_hamiltonian(self, rng):
        space = mn.hamiltonian_real(2)
        J = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
        S = rng.standard_normal((4, 4))
        S = 0.5 * (S + S.T)
        Z = np.linalg.solve(J, S)  # J Z symmetric by construction
        assert space.is_member(Z, 1e-12)


class TestSylvester:
    def test_build_matches_reference_layout(self):
        S = mn.sylvester_build([1.0, 2.0, 2.0, 2.0], [2.0, 0.0, 1.0, -2.0])
        expected = np.array(
            [
                [1, 2, 2, 2, 0, 0],
                [0, 1, 2, 2, 2, 0],
                [0, 0, 1, 2, 2, 2],
                [2, 0, 1, -2, 0, 0],
                [0, 2, 0, 1, -2, 0],
                [0, 0, 2, 0, 1, -2],
            ],
            dtype=float,
        )
        assert np.array_equal(S, expected)

    def test_equal_polynomials_rank_deficient(self):
        S = mn.sylvester_build([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert np.linalg.matrix_rank(S) < S.shape[0]

    def test_degree_one(self):
        S = mn.sylvester_build([1.0, 0.0], [0.0, 1.0])
        assert np.array_equal(S, np.eye(2))

    def test_degree_errors(self):
        with pytest.raises(mn.DegreeMismatchError):
            mn.sylvester_build([1.0, 2.0], [1.0, 2.0, 3.0])
        with pytest.raises(mn.DegreeMismatchError):
            mn.sylvester_build([0.0, 2.0], [1.0, 3.0])
        with pytest.raises(mn.DegreeMismatchError):
            mn.sylvester_build([1.0], [1.0])

    def test_projection_of_ones(self):
        S = mn.sylvester_projection(np.ones((6, 6)))
        a, b = mn.sylvester_coefficients(S)
        assert np.allclose(a, 1.0)
        assert np.allclose(b, 1.0)

    def test_projection_idempotent_on_members(self):
        S = mn.sylvester_build([1.0, 2.0, 2.0, 2.0], [2.0, 0.0, 1.0, -2.0])
        assert np.allclose(mn.sylvester_projection(S), S)

    def test_projection_orthogonality(self, rng):
        Z = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        P = mn.sylvester_projection(Z)
        for _ in range(20):
            W = mn.sylvester_build(rng.standard_normal(4), rng.standard_normal(4))
            resid = np.real(np.vdot(Z - P, W))
            assert abs(resid) <= 1e-12 * np.linalg.norm(Z) * np.linalg.norm(W)

    def test_odd_dimension_rejected(self):
        with pytest.raises(mn.DimensionMismatchError):
            mn.sylvester_projection(np.ones((5, 5)))


class TestSparsityPattern:
    def test_sorted_dedup(self):
        p = mn.SparsityPattern.from_pairs([(1, 0), (0, 1), (1, 0)])
        assert p.indices == ((0, 1), (1, 0))

    def test_from_matrix(self):
        M = np.array([[0.0, 2.0], [0.0, -3.0]])
        p = mn.SparsityPattern.from_matrix(M)
        assert p.indices == ((0, 1), (1, 1))

    def test_out_of_range(self):
        p = mn.SparsityPattern.from_pairs([(5, 5)])
        with pytest.raises(mn.DimensionMismatchError):
            mn.sparse_real(p, 3).project(np.eye(3))
