import numpy as np
import pytest

from sketchbench import (
    coherence,
    leverage_scores,
    pseudoinverse,
    spectral_norm,
    split_spectrum,
    stable_rank,
    thin_qr,
    thin_svd,
    truncated_svd,
)
from sketchbench.errors import (
    GapViolation,
    InvalidInput,
    InvalidRank,
    RankDeficient,
)
from sketchbench.kernels import spectral_norm_estimate
from sketchbench.testmatrices import fast_decay

from conftest import random_orthonormal


class TestThinQR:
    def test_identity(self):
        f = thin_qr(np.eye(3))
        np.testing.assert_allclose(f.Q, np.eye(3), atol=1e-15)
        np.testing.assert_allclose(f.R, np.eye(3), atol=1e-15)

    def test_first_column_norm_in_r(self):
        Y = np.array([[3.0, 0.0], [4.0, 0.0], [0.0, 1.0]])
        f = thin_qr(Y)
        assert f.R[0, 0] == pytest.approx(5.0)

    def test_gram_residual_seeded(self):
        g = np.random.Generator(np.random.Philox(key=7))
        Y = g.standard_normal((50, 10))
        f = thin_qr(Y)
        assert np.linalg.norm(f.Q.T @ f.Q - np.eye(10)) <= 1e-12

    def test_invariants(self, rng):
        for m, ell in [(20, 5), (100, 30), (7, 7)]:
            Y = rng.standard_normal((m, ell))
            f = thin_qr(Y)
            assert np.linalg.norm(f.Q.T @ f.Q - np.eye(ell)) <= 1e-10 * np.sqrt(ell)
            assert np.linalg.norm(f.Q @ f.R - Y) <= 1e-10 * np.linalg.norm(Y)
            assert np.all(np.diag(f.R) > 0)
            # upper triangular
            assert np.allclose(np.tril(f.R, -1), 0.0, atol=1e-12)

    def test_rank_deficient_column_reported(self, rng):
        Y = rng.standard_normal((10, 4))
        Y[:, 2] = 2.0 * Y[:, 0] + 3.0 * Y[:, 1]
        with pytest.raises(RankDeficient) as exc:
            thin_qr(Y)
        assert exc.value.column == 2

    def test_wide_input_rejected(self, rng):
        with pytest.raises(InvalidInput):
            thin_qr(rng.standard_normal((3, 5)))


class TestThinSVD:
    def test_diagonal(self):
        f = thin_svd(np.diag([3.0, 1.0]))
        np.testing.assert_allclose(f.S, [3.0, 1.0])

    def test_fast_decay_spectrum(self):
        A = fast_decay(256, 15, 2.0, seed=0)
        f = thin_svd(A)
        assert f.S[15] == pytest.approx(0.25, rel=1e-10)
        assert f.S[16] == pytest.approx(1.0 / 9.0, rel=1e-10)

    def test_matches_gram_eigenvalue_oracle(self):
        g = np.random.Generator(np.random.Philox(key=1))
        A = g.standard_normal((8, 6))
        f = thin_svd(A)
        evals = np.linalg.eigvalsh(A.T @ A)[::-1]
        np.testing.assert_allclose(f.S, np.sqrt(np.maximum(evals, 0.0)), atol=1e-10)

    def test_reconstruction_and_orthogonality(self, rng):
        A = rng.standard_normal((30, 12))
        f = thin_svd(A)
        r = f.S.shape[0]
        assert np.all(np.diff(f.S) <= 0) and np.all(f.S >= 0)
        assert np.linalg.norm((f.U * f.S) @ f.Vt - A) <= 1e-9 * np.linalg.norm(A)
        assert np.linalg.norm(f.U.T @ f.U - np.eye(r)) <= 1e-10 * np.sqrt(r)
        assert np.linalg.norm(f.Vt @ f.Vt.T - np.eye(r)) <= 1e-10 * np.sqrt(r)

    def test_nonfinite_rejected(self):
        with pytest.raises(InvalidInput):
            thin_svd(np.array([[1.0, np.nan]]))


class TestTruncatedSVD:
    def test_diagonal_eckart_young(self):
        t = truncated_svd(np.diag([3.0, 2.0, 1.0]), 2)
        resid = np.diag([3.0, 2.0, 1.0]) - (t.U * t.S) @ t.Vt
        assert np.linalg.norm(resid, 2) == pytest.approx(1.0, rel=1e-9)

    def test_fast_decay_error(self):
        A = fast_decay(256, 15, 2.0, seed=3)
        t = truncated_svd(A, 15)
        err = np.linalg.norm(A - (t.U * t.S) @ t.Vt, 2)
        assert err == pytest.approx(0.25, rel=1e-9)

    def test_matches_full_svd_oracle(self, rng):
        A = rng.standard_normal((10, 10))
        s = np.linalg.svd(A, compute_uv=False)
        t = truncated_svd(A, 3)
        err = np.linalg.norm(A - (t.U * t.S) @ t.Vt, 2)
        assert err == pytest.approx(s[3], rel=1e-9)

    def test_rank_out_of_range(self, rng):
        A = rng.standard_normal((4, 5))
        with pytest.raises(InvalidRank):
            truncated_svd(A, 0)
        with pytest.raises(InvalidRank):
            truncated_svd(A, 5)


class TestPseudoinverse:
    def test_identity(self):
        np.testing.assert_allclose(pseudoinverse(np.eye(4)), np.eye(4), atol=1e-12)

    def test_rank_deficient_diagonal(self):
        np.testing.assert_allclose(
            pseudoinverse(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]), atol=1e-12
        )

    def test_reconstruction_identity(self):
        g = np.random.Generator(np.random.Philox(key=3))
        A = g.standard_normal((4, 7))
        P = pseudoinverse(A)
        assert np.linalg.norm(A @ P @ A - A) <= 1e-10

    def test_moore_penrose_identities(self, rng):
        for shape in [(6, 4), (4, 6), (5, 5)]:
            A = rng.standard_normal(shape)
            P = pseudoinverse(A)
            scale = 1e-8 * np.linalg.norm(P, 2)
            assert np.linalg.norm(A @ P @ A - A, 2) <= scale * np.linalg.norm(A, 2)
            assert np.linalg.norm(P @ A @ P - P, 2) <= scale
            assert np.linalg.norm((A @ P).T - A @ P, 2) <= scale * np.linalg.norm(A, 2)
            assert np.linalg.norm((P @ A).T - P @ A, 2) <= scale * np.linalg.norm(A, 2)

    def test_zero_matrix(self):
        np.testing.assert_allclose(pseudoinverse(np.zeros((3, 2))), np.zeros((2, 3)))

    def test_bad_tolerance(self):
        with pytest.raises(InvalidInput):
            pseudoinverse(np.eye(2), rel_tol=2.0)


class TestSpectralNorm:
    def test_diagonal(self):
        assert spectral_norm(np.diag([3.0, 1.0])) == pytest.approx(3.0, rel=1e-8)

    def test_rank_one(self, rng):
        u = rng.standard_normal(8)
        u *= 2.0 / np.linalg.norm(u)
        v = rng.standard_normal(5)
        v *= 5.0 / np.linalg.norm(v)
        assert spectral_norm(np.outer(u, v)) == pytest.approx(10.0, rel=1e-8)

    def test_matches_svd(self):
        g = np.random.Generator(np.random.Philox(key=11))
        A = g.standard_normal((200, 100))
        assert spectral_norm(A) == pytest.approx(thin_svd(A).S[0], rel=1e-6)

    def test_zero_matrix(self):
        value, converged = spectral_norm_estimate(np.zeros((3, 3)))
        assert value == 0.0 and converged

    def test_deterministic(self, rng):
        A = rng.standard_normal((40, 30))
        assert spectral_norm(A) == spectral_norm(A)


class TestStableRank:
    def test_identity(self):
        assert stable_rank(np.eye(5)) == pytest.approx(5.0)

    def test_rank_one(self, rng):
        A = np.outer(rng.standard_normal(6), rng.standard_normal(4))
        assert stable_rank(A) == pytest.approx(1.0, rel=1e-10)

    def test_diagonal(self):
        assert stable_rank(np.diag([2.0, 1.0, 1.0])) == pytest.approx(1.5)

    def test_range(self, rng):
        A = rng.standard_normal((20, 8))
        sr = stable_rank(A)
        assert 1.0 <= sr <= 8.0 + 1e-12

    def test_zero_rejected(self):
        with pytest.raises(InvalidInput):
            stable_rank(np.zeros((2, 2)))


class TestSplitSpectrum:
    def test_fast_decay_gamma(self):
        A = fast_decay(256, 15, 2.0, seed=0)
        info = split_spectrum(A, 15)
        assert info.gamma[-1] == pytest.approx(0.25, rel=1e-10)

    def test_diag_gamma(self):
        info = split_spectrum(np.diag([2.0, 1.0]), 1)
        assert info.gamma[0] == pytest.approx(0.5)

    def test_gap_violation(self):
        with pytest.raises(GapViolation):
            split_spectrum(np.diag([1.0, 1.0]), 1)

    def test_blocks_conformal_and_ordered(self, rng):
        A = rng.standard_normal((12, 9))
        info = split_spectrum(A, 4)
        assert info.Uk.shape == (12, 4) and info.Vk.shape == (9, 4)
        assert info.Uperp.shape == (12, 5) and info.Vperp.shape == (9, 5)
        assert np.all(np.diff(info.gamma) >= -1e-15)
        assert info.gamma[-1] < 1.0
        # reconstruction from the two blocks
        recon = (info.Uk * info.sigma_k) @ info.Vk.T + (
            info.Uperp * info.sigma_perp
        ) @ info.Vperp.T
        assert np.linalg.norm(recon - A) <= 1e-9 * np.linalg.norm(A)


class TestCoherenceAndLeverage:
    def test_identity_columns(self):
        W = np.eye(6)[:, :2]
        assert coherence(W) == pytest.approx(1.0)
        p = leverage_scores(W)
        np.testing.assert_allclose(p[:2], 0.5)
        np.testing.assert_allclose(p[2:], 0.0)

    def test_hadamard_block(self):
        H = np.array([[1, 1], [1, -1], [1, 1], [1, -1]], dtype=float) / 2.0
        assert coherence(H) == pytest.approx(0.5)
        np.testing.assert_allclose(leverage_scores(H), 0.25)

    def test_brute_force_row_scan(self):
        g = np.random.Generator(np.random.Philox(key=2))
        W = random_orthonormal(50, 5, g)
        assert coherence(W) == pytest.approx(max(np.sum(W * W, axis=1)))

    def test_leverage_sums_to_one(self, rng):
        W = random_orthonormal(30, 6, rng)
        assert abs(leverage_scores(W).sum() - 1.0) <= 1e-12

    def test_coherence_range(self, rng):
        W = random_orthonormal(40, 4, rng)
        assert 4.0 / 40.0 - 1e-12 <= coherence(W) <= 1.0 + 1e-12

    def test_non_orthonormal_rejected(self, rng):
        with pytest.raises(InvalidInput):
            coherence(rng.standard_normal((10, 3)))
        with pytest.raises(InvalidInput):
            leverage_scores(rng.standard_normal((10, 3)))
