"""Dense linear-algebra primitives: factorizations, norms, spectrum utilities.

All functions are pure, operate on float64 numpy arrays, and never mutate
their inputs.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceError,
    GapViolation,
    InvalidInput,
    InvalidRank,
    RankDeficient,
)

_EPS = np.finfo(np.float64).eps

# Fixed Philox key for the deterministic power-iteration start vector.
_POWER_ITER_KEY = 0x5EEDC0FFEE


@dataclass(frozen=True)
class ThinQR:
    Q: np.ndarray
    R: np.ndarray


@dataclass(frozen=True)
class ThinSVD:
    U: np.ndarray
    S: np.ndarray
    Vt: np.ndarray


@dataclass(frozen=True)
class SpectrumInfo:
    """Singular-value split at index k with the trailing/leading blocks."""

    k: int
    Uk: np.ndarray
    Uperp: np.ndarray
    Vk: np.ndarray
    Vperp: np.ndarray
    sigma_k: np.ndarray
    sigma_perp: np.ndarray
    gamma: np.ndarray  # gamma_j = sigma_{k+1} / sigma_j for j = 1..k


def _as_matrix(A):
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise InvalidInput(f"expected a 2-d array, got ndim={A.ndim}")
    return A


def thin_qr(Y):
    """Thin QR with nonnegative R diagonal (unique for full-rank input).

    Raises RankDeficient naming the first offending column if Y loses
    column rank beyond max(m, l) * eps relative tolerance.
    """
    Y = _as_matrix(Y)
    m, ell = Y.shape
    if ell > m:
        raise InvalidInput(f"thin QR needs rows >= cols, got {m}x{ell}")
    Q, R = np.linalg.qr(Y, mode="reduced")
    signs = np.sign(np.diag(R))
    signs[signs == 0.0] = 1.0
    Q = Q * signs
    R = signs[:, None] * R
    diag = np.abs(np.diag(R))
    tol = max(m, ell) * _EPS * (diag.max() if diag.size else 0.0)
    bad = np.flatnonzero(diag <= tol)
    if bad.size:
        raise RankDeficient(int(bad[0]))
    return ThinQR(Q, R)


def thin_svd(A):
    """Thin SVD, singular values nonincreasing."""
    A = _as_matrix(A)
    if not np.all(np.isfinite(A)):
        raise InvalidInput("matrix has non-finite entries")
    try:
        U, S, Vt = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails
        raise ConvergenceError(f"SVD did not converge: {exc}") from exc
    return ThinSVD(U, S, Vt)


def truncated_svd(A, k):
    """Best rank-k approximation in factored form (Eckart-Young optimal)."""
    A = _as_matrix(A)
    if not (1 <= k <= min(A.shape)):
        raise InvalidRank(f"k={k} out of range for shape {A.shape}")
    f = thin_svd(A)
    return ThinSVD(f.U[:, :k].copy(), f.S[:k].copy(), f.Vt[:k, :].copy())


def pseudoinverse(A, rel_tol=None):
    """Moore-Penrose pseudoinverse with singular values below
    rel_tol * sigma_max treated as zero."""
    A = _as_matrix(A)
    if rel_tol is None:
        rel_tol = max(A.shape) * _EPS
    if not (0.0 < rel_tol < 1.0):
        raise InvalidInput(f"rel_tol must be in (0,1), got {rel_tol}")
    return np.linalg.pinv(A, rcond=rel_tol)


def spectral_norm_estimate(A, tol=1e-9, max_iter=5000):
    """Largest singular value via power iteration on A^T A.

    The start vector comes from a fixed internal Philox stream, so the
    result is reproducible. Returns (estimate, converged).
    """
    A = _as_matrix(A)
    if tol <= 0:
        raise InvalidInput("tol must be positive")
    m, n = A.shape
    if m == 0 or n == 0 or not A.any():
        return 0.0, True
    rng = np.random.Generator(np.random.Philox(key=_POWER_ITER_KEY))
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(max_iter):
        y = A @ v
        sigma_new = np.linalg.norm(y)
        if sigma_new == 0.0:
            # start vector fell in the null space; perturb and continue
            v = rng.standard_normal(n)
            v /= np.linalg.norm(v)
            continue
        w = A.T @ y
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return sigma_new, True
        v = w / nw
        if abs(sigma_new - sigma) <= tol * sigma_new:
            return sigma_new, True
        sigma = sigma_new
    return sigma, False


def spectral_norm(A, tol=1e-9, max_iter=5000):
    value, _ = spectral_norm_estimate(A, tol=tol, max_iter=max_iter)
    return value


def stable_rank(A):
    """||A||_F^2 / ||A||_2^2, always in [1, rank(A)]."""
    A = _as_matrix(A)
    fro2 = float(np.sum(A * A))
    if fro2 == 0.0:
        raise InvalidInput("stable rank undefined for the zero matrix")
    sigma1 = thin_svd(A).S[0]
    return fro2 / (sigma1 * sigma1)


def split_spectrum(A, k):
    """Split the SVD of A at index k; requires a strict gap sigma_k > sigma_{k+1}."""
    A = _as_matrix(A)
    if not (1 <= k < min(A.shape)):
        raise InvalidRank(f"k={k} out of range for shape {A.shape}")
    f = thin_svd(A)
    s = f.S
    if s[k] >= s[k - 1] * (1.0 - 1e-12):
        raise GapViolation(float(s[k - 1]), float(s[k]))
    gamma = s[k] / s[:k]
    return SpectrumInfo(
        k=k,
        Uk=f.U[:, :k].copy(),
        Uperp=f.U[:, k:].copy(),
        Vk=f.Vt[:k, :].T.copy(),
        Vperp=f.Vt[k:, :].T.copy(),
        sigma_k=s[:k].copy(),
        sigma_perp=s[k:].copy(),
        gamma=gamma,
    )


def _check_orthonormal(W, tol=1e-8):
    gram_resid = np.linalg.norm(W.T @ W - np.eye(W.shape[1]))
    if gram_resid > tol * np.sqrt(W.shape[1]):
        raise InvalidInput(f"columns not orthonormal: ||W'W - I||_F = {gram_resid:.3e}")


def coherence(W):
    """Largest squared row norm of an orthonormal-column matrix; in [d/n, 1]."""
    W = _as_matrix(W)
    _check_orthonormal(W)
    return float(np.max(np.sum(W * W, axis=1)))


def leverage_scores(Vk):
    """Row leverage scores of an orthonormal n x k block, summing to one."""
    Vk = _as_matrix(Vk)
    _check_orthonormal(Vk)
    return np.sum(Vk * Vk, axis=1) / Vk.shape[1]
