import numpy as np
import pytest

import matnear as mn
from matnear.objectives import distance_squared_to, neg_real_part


def _chunked_max_real_eig(mats):
    best = -np.inf
    for i in range(0, mats.shape[0], 4000):
        w = np.linalg.eigvals(mats[i : i + 4000])
        best = max(best, float(w.real.max()))
    return best


class TestRealGradient:
    def test_real_eigenvalue_rank_one(self):
        A = np.array([[1.0, 0.5], [0.0, -2.0]])
        t = mn.target_eigentriple(A, mn.rightmost())
        W, Y = mn.real_gradient(neg_real_part(), t)
        G = W @ Y.T
        assert np.linalg.matrix_rank(G, tol=1e-10) == 1
        assert np.allclose(G, -np.real(np.outer(t.x, t.y.conj())), atol=1e-12)

    def test_complex_eigenvalue_rank_two(self):
        x = np.array([1.0, 1.0j]) / np.sqrt(2)
        y = np.array([1.0, -1.0j]) / np.sqrt(2)
        t = mn.EigenTriple(1.0j, x, y)
        W, Y = mn.real_gradient(neg_real_part(), t)
        assert np.linalg.matrix_rank(W @ Y.T, tol=1e-10) == 2

    def test_zero_gradient(self):
        t = mn.EigenTriple(2.0 + 0j, np.array([1.0 + 0j]), np.array([1.0 + 0j]))
        W, Y = mn.real_gradient(distance_squared_to(2.0), t)
        assert np.linalg.norm(W @ Y.T) == 0


class TestTangentProjection:
    def _random_state(self, rng, n, r=2):
        U, _ = np.linalg.qr(rng.standard_normal((n, r)))
        V, _ = np.linalg.qr(rng.standard_normal((n, r)))
        S = rng.standard_normal((r, r))
        return mn.RankRState(U, S / np.linalg.norm(S), V)

    def test_projects_e_to_itself(self, rng):
        state = self._random_state(rng, 6)
        E = state.matrix
        assert np.linalg.norm(mn.tangent_project_rankr(state, E) - E) < 1e-12

    def test_full_rank_is_identity(self, rng):
        state = self._random_state(rng, 3, r=3)
        Z = rng.standard_normal((3, 3))
        assert np.linalg.norm(mn.tangent_project_rankr(state, Z) - Z) < 1e-12

    def test_idempotent(self, rng):
        state = self._random_state(rng, 7)
        Z = rng.standard_normal((7, 7))
        PZ = mn.tangent_project_rankr(state, Z)
        assert np.linalg.norm(mn.tangent_project_rankr(state, PZ) - PZ) < 1e-12


class TestBugStep:
    def test_zero_gradient_reproduces_state(self, rng, example8):
        # distance objective centered at the current eigenvalue: G = 0
        U, _ = np.linalg.qr(rng.standard_normal((8, 2)))
        V, _ = np.linalg.qr(rng.standard_normal((8, 2)))
        S = rng.standard_normal((2, 2))
        state = mn.RankRState(U, S / np.linalg.norm(S), V)
        lam0 = mn.target_eigentriple(
            example8 + state.matrix, mn.rightmost()
        ).lam
        obj = distance_squared_to(lam0)
        new_state, _, _ = mn.bug_step(example8, 1.0, obj, mn.rightmost(), state, 0.1)
        assert np.linalg.norm(new_state.matrix - state.matrix) <= 1e-12
        assert abs(np.linalg.norm(new_state.S) - 1.0) <= 1e-14

    def test_core_norm_always_one(self, rng, example8):
        U, _ = np.linalg.qr(rng.standard_normal((8, 2)))
        V, _ = np.linalg.qr(rng.standard_normal((8, 2)))
        S = rng.standard_normal((2, 2))
        state = mn.RankRState(U, S / np.linalg.norm(S), V)
        new_state, _, _ = mn.bug_step(
            example8, 1.0, neg_real_part(), mn.rightmost(), state, 0.05
        )
        assert abs(np.linalg.norm(new_state.S) - 1.0) <= 1e-14
        assert np.linalg.norm(new_state.U.T @ new_state.U - np.eye(2)) <= 1e-12
        assert np.linalg.norm(new_state.V.T @ new_state.V - np.eye(2)) <= 1e-12

    def test_robust_to_tiny_core_singular_value(self, rng, example8):
        t0 = mn.target_eigentriple(example8, mn.rightmost())
        state = mn.initial_rank2_state(neg_real_part(), t0, rng)
        u2, s2, v2 = np.linalg.svd(state.S)
        S = u2 @ np.diag([1.0, 1e-12]) @ v2
        state = mn.RankRState(state.U, S / np.linalg.norm(S), state.V)
        new_state, triple, _ = mn.bug_step(
            example8, 1.0, neg_real_part(), mn.rightmost(), state, 0.05
        )
        assert np.all(np.isfinite(new_state.matrix))
        # one flow step from the fragile state does not increase the functional
        res = mn.run_rank2_flow(
            example8, 1.0, neg_real_part(), mn.rightmost(), state,
            mn.FlowConfig(max_steps=3, tol_stationary=1e-14), rng
        )
        fs = [row.f for row in res.trace]
        assert all(fs[i + 1] < fs[i] for i in range(len(fs) - 1))


class TestDecayRate:
    def test_matches_dense_formula(self, rng, example8):
        eps = 0.8
        U, _ = np.linalg.qr(rng.standard_normal((8, 2)))
        V, _ = np.linalg.qr(rng.standard_normal((8, 2)))
        S = rng.standard_normal((2, 2))
        state = mn.RankRState(U, S / np.linalg.norm(S), V)
        triple = mn.target_eigentriple(example8 + eps * state.matrix, mn.rightmost())
        W, Y = mn.real_gradient(neg_real_part(), triple)
        g = mn.decay_rate_g_rankr(eps, triple.kappa, W, Y, state)
        G = W @ Y.T
        E = state.matrix
        PG = mn.tangent_project_rankr(state, G)
        dense = eps * triple.kappa * (
            np.linalg.norm(PG) ** 2 - np.sum(G * E) ** 2
        )
        assert g == pytest.approx(dense, rel=1e-10)

    def test_zero_cases(self, rng):
        U, _ = np.linalg.qr(rng.standard_normal((5, 2)))
        V, _ = np.linalg.qr(rng.standard_normal((5, 2)))
        S = rng.standard_normal((2, 2))
        state = mn.RankRState(U, S / np.linalg.norm(S), V)
        # W = 0 -> g = 0
        Z = np.zeros((5, 2))
        assert mn.decay_rate_g_rankr(1.0, 1.0, Z, Z, state) == 0.0
        # G a multiple of E (stationary): g = 0
        W = U.copy()
        Y = V @ state.S.T
        assert mn.decay_rate_g_rankr(1.0, 1.0, W, Y, state) == pytest.approx(0.0, abs=1e-12)


class TestRank2Flow:
    def test_normal_matrix_real_abscissa(self):
        A = np.diag([-1.0, -2.0])
        t0 = mn.target_eigentriple(A, mn.rightmost())
        init = mn.initial_rank2_state(neg_real_part(), t0)
        res = mn.run_rank2_flow(A, 0.5, neg_real_part(), mn.rightmost(), init)
        assert -res.f == pytest.approx(-0.5, abs=1e-8)

    def test_real_below_complex(self, example8):
        t0 = mn.target_eigentriple(example8, mn.rightmost())
        init = mn.initial_rank2_state(neg_real_part(), t0)
        res = mn.run_rank2_flow(
            example8, 1.0, neg_real_part(), mn.rightmost(), init,
            mn.FlowConfig(tol_stationary=1e-9),
        )
        alpha_c, _ = mn.crisscross_abscissa(example8, 1.0)
        assert -res.f <= alpha_c + 1e-9
        fs = [row.f for row in res.trace]
        assert all(fs[i + 1] < fs[i] for i in range(len(fs) - 1))
        assert abs(np.linalg.norm(res.state.S) - 1.0) <= 1e-12

    def test_monte_carlo_lower_bound(self, example8):
        t0 = mn.target_eigentriple(example8, mn.rightmost())
        init = mn.initial_rank2_state(neg_real_part(), t0)
        res = mn.run_rank2_flow(
            example8, 1.0, neg_real_part(), mn.rightmost(), init,
            mn.FlowConfig(tol_stationary=1e-9),
        )
        rng = np.random.default_rng(11)
        n_samp = 100_000
        mats = np.empty((n_samp, 8, 8))
        for i in range(0, n_samp, 5000):
            k = min(5000, n_samp - i)
            U = rng.standard_normal((k, 8, 2))
            V = rng.standard_normal((k, 8, 2))
            S = rng.standard_normal((k, 2, 2))
            Uq, _ = np.linalg.qr(U)
            Vq, _ = np.linalg.qr(V)
            S /= np.linalg.norm(S, axis=(1, 2), keepdims=True)
            E = Uq @ S @ np.transpose(Vq, (0, 2, 1))
            mats[i : i + k] = example8[None, :, :] + E
        sample_max = _chunked_max_real_eig(mats)
        assert sample_max <= -res.f + 1e-8

    def test_rank_law_real_target(self):
        # real rightmost eigenvalue: converged core is numerically rank 1
        A = np.array(
            [
                [0.5, 0.2, 0.0],
                [0.0, -1.0, 0.3],
                [0.1, 0.0, -2.0],
            ]
        )
        t0 = mn.target_eigentriple(A, mn.rightmost())
        assert abs(t0.lam.imag) < 1e-12
        init = mn.initial_rank2_state(neg_real_part(), t0)
        res = mn.run_rank2_flow(
            A, 0.4, neg_real_part(), mn.rightmost(), init,
            mn.FlowConfig(tol_stationary=1e-11),
        )
        s = np.linalg.svd(res.state.S, compute_uv=False)
        assert res.triple.lam.imag == pytest.approx(0.0, abs=1e-8)
        assert s[-1] <= 1e-8
