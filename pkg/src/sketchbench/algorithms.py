"""Randomized subspace-iteration SVD, stabilized Nystrom, and per-trial
structural diagnostics."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import FactorizationError, InvalidInput, InvalidRank
from .kernels import (
    _EPS,
    pseudoinverse,
    spectral_norm,
    split_spectrum,
    thin_qr,
    thin_svd,
)

# Residuals are materialized up to this side length; above it the spectral
# norm is computed on the implicit operator A - U S V'.
_MATERIALIZE_LIMIT = 4096


@dataclass(frozen=True)
class SketchConfig:
    """ell sketch columns, q subspace-iteration steps.

    stabilized=None interleaves thin-QR re-orthonormalization whenever
    q >= 1; the idealized single-product form is used for q = 0.
    """

    ell: int
    q: int = 0
    stabilized: bool = None

    def use_stabilized(self):
        if self.stabilized is None:
            return self.q >= 1
        return self.stabilized


@dataclass(frozen=True)
class LowRankApprox:
    U: np.ndarray
    S: np.ndarray
    Vt: np.ndarray
    form: str  # "svd" | "nystrom"

    def reconstruct(self):
        return (self.U * self.S) @ self.Vt

    @property
    def rank(self):
        return self.S.shape[0]


@dataclass(frozen=True)
class StructuralReport:
    """Per-trial values of the deterministic error decomposition."""

    k: int
    sigma_perp_norm: float
    gamma_k: float
    T: float  # ||Sigma_perp Omega2 pinv(Omega1)||_2
    sigma_min_omega1: float
    eta: float
    eps_cov: float
    lhs: float  # ||(I - QQ')A||_2^2
    rhs: float  # sigma_{k+1}^2 + gamma_k^{4q} T^2
    bound_holds: bool  # None when sigma_min_omega1 == 0 (not applicable)


def randomized_svd(A, Omega, cfg):
    """Subspace-iteration sketch-and-project SVD.

    Wide inputs (rows < cols) are handled by operating on the transpose and
    swapping the output factors; Omega must then have A.shape[0] rows.
    """
    A = np.asarray(A, dtype=np.float64)
    Omega = np.asarray(Omega, dtype=np.float64)
    m, n = A.shape
    if m < n:
        approx = randomized_svd(A.T, Omega, cfg)
        return LowRankApprox(U=approx.Vt.T, S=approx.S, Vt=approx.U.T, form="svd")
    if Omega.shape[0] != n:
        raise InvalidInput(f"Omega has {Omega.shape[0]} rows, expected {n}")

    if cfg.use_stabilized():
        Q = thin_qr(A @ Omega).Q
        for _ in range(cfg.q):
            Q = thin_qr(A.T @ Q).Q
            Q = thin_qr(A @ Q).Q
    else:
        Y = A @ Omega
        for _ in range(cfg.q):
            Y = A @ (A.T @ Y)
        Q = thin_qr(Y).Q
    B = Q.T @ A
    f = thin_svd(B)
    return LowRankApprox(U=Q @ f.U, S=f.S, Vt=f.Vt, form="svd")


def nystrom(A, Omega, shift_retries=3):
    """Shift-stabilized Nystrom approximation of a symmetric PSD matrix.

    Returns an eigendecomposition-form approximation U diag(S) U'.
    """
    A = np.asarray(A, dtype=np.float64)
    Omega = np.asarray(Omega, dtype=np.float64)
    n = A.shape[0]
    if A.shape[0] != A.shape[1]:
        raise InvalidInput("Nystrom needs a square matrix")
    sym_resid = np.linalg.norm(A - A.T)
    if sym_resid > 1e-10 * max(np.linalg.norm(A), 1e-300):
        raise InvalidInput(f"matrix not symmetric: ||A - A'||_F = {sym_resid:.3e}")
    Y = A @ Omega
    nu = math.sqrt(n) * _EPS * np.linalg.norm(Y, 2)
    if nu == 0.0:
        nu = math.sqrt(n) * _EPS
    for attempt in range(shift_retries + 1):
        Yn = Y + nu * Omega
        G = Omega.T @ Yn
        G = 0.5 * (G + G.T)
        try:
            C = np.linalg.cholesky(G)
        except np.linalg.LinAlgError:
            nu *= 2.0
            continue
        # B = Yn C^{-T}: forward-solve C X = Yn' then transpose
        B = _tri_solve(C, Yn.T).T
        f = thin_svd(B)
        eigvals = np.maximum(f.S * f.S - nu, 0.0)
        return LowRankApprox(U=f.U, S=eigvals, Vt=f.U.T, form="nystrom")
    raise FactorizationError(f"sketch Gram not positive definite after {shift_retries} retries")


def _tri_solve(L, B):
    """Forward solve L X = B for lower-triangular L."""
    from scipy.linalg import solve_triangular

    return solve_triangular(L, B, lower=True)


def truncate(approx, k):
    """Keep the top-k triples; Nystrom form stays symmetric PSD."""
    if not (1 <= k <= approx.rank):
        raise InvalidRank(f"k={k} out of range for rank {approx.rank}")
    U = approx.U[:, :k]
    S = approx.S[:k]
    Vt = approx.Vt[:k, :]
    return LowRankApprox(U=U, S=S, Vt=Vt, form=approx.form)


def relative_error(A, approx):
    """Spectral-norm relative error ||A - Ahat||_2 / ||A||_2."""
    A = np.asarray(A, dtype=np.float64)
    norm_a = spectral_norm(A)
    if norm_a == 0.0:
        raise InvalidInput("relative error undefined for the zero matrix")
    if max(A.shape) <= _MATERIALIZE_LIMIT:
        resid = A - approx.reconstruct()
        return spectral_norm(resid) / norm_a
    return _implicit_residual_norm(A, approx) / norm_a


def _implicit_residual_norm(A, approx, tol=1e-9, max_iter=5000):
    """Power iteration on (A - USV')'(A - USV') without materializing it."""
    US = approx.U * approx.S
    Vt = approx.Vt

    def apply(v):
        return A @ v - US @ (Vt @ v)

    def apply_t(w):
        return A.T @ w - Vt.T @ (US.T @ w)

    rng = np.random.Generator(np.random.Philox(key=0x5EEDC0FFEE))
    v = rng.standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(max_iter):
        y = apply(v)
        sigma_new = np.linalg.norm(y)
        if sigma_new == 0.0:
            return 0.0
        w = apply_t(y)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return sigma_new
        v = w / nw
        if abs(sigma_new - sigma) <= tol * sigma_new:
            return sigma_new
        sigma = sigma_new
    return sigma


def structural_report(A, Omega, k, q, column_scale=1.0, slack=1e-8):
    """Evaluate both sides of the deterministic error bound for one sketch.

    `column_scale` is the per-kind scale c with E[x x'] = c I; the sketch is
    rescaled to unit scale before computing the covariance deviations (the
    projector and the cross term T are invariant to that rescaling).
    """
    A = np.asarray(A, dtype=np.float64)
    Omega = np.asarray(Omega, dtype=np.float64)
    ell = Omega.shape[1]
    if ell < k:
        raise InvalidInput(f"need ell >= k, got ell={ell}, k={k}")
    spec = split_spectrum(A, k)
    scale = math.sqrt(column_scale)
    Om1 = (spec.Vk.T @ Omega) / scale
    Om2 = (spec.Vperp.T @ Omega) / scale
    sigma_perp = spec.sigma_perp
    sigma_perp_norm = float(sigma_perp[0])
    gamma_k = float(spec.gamma[-1])

    svals1 = np.linalg.svd(Om1, compute_uv=False)
    sigma_min = float(svals1[-1]) if svals1.size else 0.0
    # compare against the sketch's own scale: a sketch orthogonal to V_k
    # leaves only rounding noise in Om1
    omega_norm = float(np.linalg.norm(Omega, 2)) / scale
    degenerate = sigma_min <= max(Omega.shape) * _EPS * omega_norm

    Z = sigma_perp[:, None] * Om2
    T = float(np.linalg.norm(Z @ pseudoinverse(Om1), 2))
    eta = float(
        np.linalg.norm(Z @ Z.T / ell - np.diag(sigma_perp * sigma_perp), 2)
    ) / (sigma_perp_norm * sigma_perp_norm)
    eps_cov = float(np.linalg.norm(Om1 @ Om1.T / ell - np.eye(k), 2))

    lhs = rhs = float("nan")
    bound_holds = None
    if not degenerate:
        approx = randomized_svd(A, Omega, SketchConfig(ell=ell, q=q, stabilized=False))
        lhs = spectral_norm(A - approx.reconstruct()) ** 2
        rhs = sigma_perp_norm**2 + gamma_k ** (4 * q) * T * T
        bound_holds = lhs <= rhs * (1.0 + slack)
    return StructuralReport(
        k=k,
        sigma_perp_norm=sigma_perp_norm,
        gamma_k=gamma_k,
        T=T,
        sigma_min_omega1=sigma_min,
        eta=eta,
        eps_cov=eps_cov,
        lhs=lhs,
        rhs=rhs,
        bound_holds=bound_holds,
    )
